#include "qmpc/layers/linear.hpp"

#include "qmpc/kernels/kernels.hpp"

namespace qmpc {

namespace {

constexpr u64 kMask16 = 0xFFFF;

void check_ring16(const RssVec& v) {
    if (v.width != kLinearRing) throw StructuralError("expected 16-bit RSS operand");
}

std::vector<u64> bilinear_rows_local(const RssVec& lhs, const RssVec& rhs, std::size_t rows,
                                     std::size_t len) {
    check_ring16(lhs);
    check_ring16(rhs);
    if (len > kMaxInnerDim)
        throw ConfigError("inner dimension " + std::to_string(len) + " exceeds the 2^12 fold cap");
    if (lhs.size() != rows * len || rhs.size() != rows * len)
        throw StructuralError("row product shapes disagree");
    std::vector<u64> z(rows, 0);
    kernels::bilinear_dot_rows(lhs.next.data(), lhs.prev.data(), rhs.next.data(), rhs.prev.data(),
                               z.data(), rows, len, kMask16);
    return z;
}

}  // namespace

std::vector<u64> bilinear_matmul_local(const RssVec& lhs, const RssVec& rhs, std::size_t m,
                                       std::size_t k, std::size_t n) {
    check_ring16(lhs);
    check_ring16(rhs);
    if (k > kMaxInnerDim)
        throw ConfigError("inner dimension " + std::to_string(k) + " exceeds the 2^12 fold cap");
    if (lhs.size() != m * k || rhs.size() != k * n)
        throw StructuralError("matmul operand shapes disagree");
    std::vector<u64> z(m * n, 0);
    kernels::bilinear_matmul(lhs.next.data(), lhs.prev.data(), rhs.next.data(), rhs.prev.data(),
                             z.data(), m, k, n, kMask16);
    return z;
}

Share2Vec truncate_after_fold(Session& s, std::vector<u64> local_sums, u64 post_fold) {
    std::size_t count = local_sums.size();
    auto alpha = s.zero_share(count, kLinearRing);
    for (std::size_t i = 0; i < count; ++i) local_sums[i] = (local_sums[i] + alpha[i]) & kMask16;

    auto y0 = s.p0_to_p1(s.party() == 0 ? std::span<const u64>(local_sums)
                                        : std::span<const u64>{},
                         count, kLinearRing);
    Share2Vec out;
    out.width = kActBits;
    if (s.party() == 0) return out;
    out.comp.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        u64 y = local_sums[i];
        if (s.party() == 1) y = (y + y0[i]) & kMask16;
        y = (y * post_fold) & kMask16;
        out.comp[i] = y >> kFoldShift;
    }
    return out;
}

RssVec rss_inner_product_rows(Session& s, const RssVec& lhs_rows, const RssVec& rhs_rows,
                              std::size_t rows, std::size_t len) {
    auto z = bilinear_rows_local(lhs_rows, rhs_rows, rows, len);
    auto alpha = s.zero_share(rows, kLinearRing);
    for (std::size_t i = 0; i < rows; ++i) z[i] = (z[i] + alpha[i]) & kMask16;

    // Ring pass: party i sends z_i to party i+1. With <z>_j := z_{j+1}, the
    // own component is <z>_{i-1} and the received one is <z>_{i+1}.
    int next = (s.party() + 1) % 3;
    int prev = (s.party() + 2) % 3;
    if (s.party() == 1) s.stats().add_round(s.phase());
    std::vector<u64> received;
    if (s.party() == 0) {
        s.send_elems(next, tag::ReshareDelta, z, kLinearRing);
        received = s.recv_elems(prev, tag::ReshareDelta, rows, kLinearRing);
    } else {
        received = s.recv_elems(prev, tag::ReshareDelta, rows, kLinearRing);
        s.send_elems(next, tag::ReshareDelta, z, kLinearRing);
    }
    RssVec out;
    out.width = kLinearRing;
    out.next = std::move(received);
    out.prev = std::move(z);
    return out;
}

Share2Vec quantized_matmul(Session& s, const RssVec& lhs, const RssVec& rhs, std::size_t m,
                           std::size_t k, std::size_t n, u64 post_fold) {
    return truncate_after_fold(s, bilinear_matmul_local(lhs, rhs, m, k, n), post_fold);
}

Share2Vec quantized_dot_rows(Session& s, const RssVec& lhs_rows, const RssVec& rhs_rows,
                             std::size_t rows, std::size_t len, u64 post_fold) {
    return truncate_after_fold(s, bilinear_rows_local(lhs_rows, rhs_rows, rows, len), post_fold);
}

Share2Vec fc_quantized(Session& s, const FoldedWeights& w, const RssVec& x,
                       std::size_t positions) {
    if (w.w.size() != w.in_features * w.out_features)
        throw StructuralError("folded weight shape disagrees with dims");
    return quantized_matmul(s, x, w.w, positions, w.in_features, w.out_features, 1);
}

Share2Vec residual_requant(Session& s, const RssVec& a, const RssVec& x, u64 fold_a, u64 fold_x) {
    check_ring16(a);
    check_ring16(x);
    if (a.size() != x.size()) throw StructuralError("residual operand shapes disagree");
    Share2Vec out;
    out.width = kActBits;
    if (s.party() == 0) return out;
    out.comp.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        u64 next = (fold_a * a.next[i] + fold_x * x.next[i]) & kMask16;
        u64 prev = (fold_a * a.prev[i] + fold_x * x.prev[i]) & kMask16;
        u64 comp = s.party() == 1 ? (next + prev) & kMask16 : prev;
        out.comp[i] = comp >> kFoldShift;
    }
    return out;
}

}  // namespace qmpc
