#include "qmpc/kernels/kernels.hpp"

#include "shift_detail.hpp"

namespace qmpc::kernels {

void bilinear_matmul_serial(const u64* ln, const u64* lp, const u64* rn, const u64* rp,
                            u64* z, std::size_t m, std::size_t k, std::size_t n, u64 mask) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            u64 acc = 0;
            for (std::size_t t = 0; t < k; ++t) {
                u64 a_n = ln[i * k + t], a_p = lp[i * k + t];
                u64 b_n = rn[t * n + j], b_p = rp[t * n + j];
                acc += a_p * b_n + a_n * b_p + a_n * b_n;
            }
            z[i * n + j] = acc & mask;
        }
    }
}

void bilinear_dot_rows_serial(const u64* ln, const u64* lp, const u64* rn, const u64* rp,
                              u64* out, std::size_t rows, std::size_t len, u64 mask) {
    for (std::size_t r = 0; r < rows; ++r) {
        u64 acc = 0;
        const u64* an = ln + r * len;
        const u64* ap = lp + r * len;
        const u64* bn = rn + r * len;
        const u64* bp = rp + r * len;
        for (std::size_t t = 0; t < len; ++t)
            acc += ap[t] * bn[t] + an[t] * bp[t] + an[t] * bn[t];
        out[r] = acc & mask;
    }
}

void ring_matmul_serial(const u64* a, const u64* b, u64* c, std::size_t m, std::size_t k,
                        std::size_t n, u64 mask) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            u64 acc = 0;
            for (std::size_t t = 0; t < k; ++t) acc += a[i * k + t] * b[t * n + j];
            c[i * n + j] = acc & mask;
        }
    }
}

void shift_share_tables_serial(std::span<const ShiftShareJob> jobs) {
    for (const auto& j : jobs) detail::shift_share_one(j);
}

}  // namespace qmpc::kernels
