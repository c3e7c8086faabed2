#include "qmpc/layers/nonlinear.hpp"

namespace qmpc {

namespace {

constexpr TableMeta kMaxMeta{TableKind::Max, 4, 4, 4};
constexpr TableMeta kExpMeta{TableKind::Exp, 4, 0, 8};
constexpr TableMeta kDivMeta{TableKind::DivSoftmax, 4, 8, 4};
constexpr TableMeta kReluMeta{TableKind::Relu, 4, 0, 16};
constexpr TableMeta kLnMeta{TableKind::DivLayerNorm, 4, 4, 4};

}  // namespace

Share2Vec secure_max_rows(Session& s, TableSupply& supply, const Share2Vec& rows,
                          std::size_t nrows, std::size_t len) {
    if (len == 0) throw DomainError("maximum of an empty vector");
    bool holder = s.party() != 0;
    if (holder && rows.size() != nrows * len)
        throw StructuralError("row shape disagrees with share count");

    // cur: per-row survivors, kept only by P1/P2; the tournament structure
    // itself is public, so P0 walks the same levels to stay in SPMD step.
    std::vector<std::vector<u64>> cur(nrows);
    if (holder)
        for (std::size_t r = 0; r < nrows; ++r)
            cur[r].assign(rows.comp.begin() + r * len, rows.comp.begin() + (r + 1) * len);

    std::size_t width = len;
    while (width > 1) {
        std::size_t pairs_per_row = width / 2;
        auto tables = supply.take(kMaxMeta, pairs_per_row * nrows);
        Share2Vec a, b;
        a.width = b.width = 4;
        if (holder) {
            for (std::size_t r = 0; r < nrows; ++r)
                for (std::size_t p = 0; p < pairs_per_row; ++p) {
                    a.comp.push_back(cur[r][2 * p]);
                    b.comp.push_back(cur[r][2 * p + 1]);
                }
        }
        auto winners = eval_two_batch(s, tables, a, b);
        if (holder) {
            std::size_t pos = 0;
            for (std::size_t r = 0; r < nrows; ++r) {
                std::vector<u64> nxt;
                for (std::size_t p = 0; p < pairs_per_row; ++p) nxt.push_back(winners.comp[pos++]);
                if (width % 2) nxt.push_back(cur[r][width - 1]);
                cur[r] = std::move(nxt);
            }
        }
        width = pairs_per_row + (width % 2);
    }

    Share2Vec out;
    out.width = 4;
    if (holder) {
        out.comp.resize(nrows);
        for (std::size_t r = 0; r < nrows; ++r) out.comp[r] = cur[r][0];
    }
    return out;
}

Share2Vec mid_extract(Session& s, const Share2Vec& d, unsigned kappa) {
    if (kappa > 4) throw DomainError("kappa must be in [0,4]");
    if (s.party() != 0 && d.width != 8) throw StructuralError("mid_extract expects 8-bit shares");
    Share2Vec out;
    out.width = 4;
    if (s.party() == 0) return out;
    out.comp.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out.comp[i] = (d.comp[i] >> kappa) & 15;
    return out;
}

Share2Vec secure_softmax_rows(Session& s, TableSupply& supply, const Share2Vec& rows,
                              std::size_t nrows, std::size_t len, const SoftmaxParams& p) {
    if (len == 0) throw DomainError("softmax of an empty vector");
    if (len > p.cap)
        throw ConfigError("softmax length " + std::to_string(len) +
                          " exceeds the 8-bit denominator cap of " + std::to_string(p.cap));
    bool holder = s.party() != 0;

    // (1) row maxima
    auto xo = secure_max_rows(s, supply, rows, nrows, len);

    // (2) d_i = x_i - x_o over Z_16, locally on shares
    Share2Vec diff;
    diff.width = 4;
    if (holder) {
        diff.comp.resize(nrows * len);
        for (std::size_t r = 0; r < nrows; ++r)
            for (std::size_t i = 0; i < len; ++i)
                diff.comp[r * len + i] = (rows.comp[r * len + i] - xo.comp[r]) & 15;
    }

    // (3) exponent lookups, 8-bit outputs with the value in the low nibble
    auto exp_tables = supply.take(kExpMeta, nrows * len);
    auto e = eval_single_batch(s, exp_tables, diff);

    // (4)+(5) denominator sums and numerator slices, both local
    Share2Vec denom, numer;
    denom.width = 8;
    numer.width = 4;
    if (holder) {
        denom.comp.assign(nrows, 0);
        numer.comp.resize(nrows * len);
        for (std::size_t r = 0; r < nrows; ++r) {
            u64 sum = 0;
            for (std::size_t i = 0; i < len; ++i) {
                sum += e.comp[r * len + i];
                numer.comp[r * len + i] = e.comp[r * len + i] & 15;
            }
            denom.comp[r] = sum & 0xFF;
        }
    }

    // (6) division tables keyed on (numerator, full 8-bit denominator); the
    // kappa slice happens inside the table and the denominator is opened once
    // per row through the shared group offset.
    auto groups = supply.take_groups(kDivMeta, nrows, len);
    std::vector<Share2Vec> a_inputs(nrows);
    if (holder)
        for (std::size_t r = 0; r < nrows; ++r) {
            a_inputs[r].width = 4;
            a_inputs[r].comp.assign(numer.comp.begin() + r * len,
                                    numer.comp.begin() + (r + 1) * len);
        }
    auto outs = eval_groups(s, groups, a_inputs, denom);

    Share2Vec out;
    out.width = 4;
    if (holder) {
        out.comp.reserve(nrows * len);
        for (auto& o : outs) out.comp.insert(out.comp.end(), o.comp.begin(), o.comp.end());
    }
    return out;
}

RssVec secure_relu(Session& s, TableSupply& supply, const Share2Vec& xs, std::size_t count) {
    if (s.party() != 0 && xs.size() != count) throw StructuralError("relu count mismatch");
    auto tables = supply.take(kReluMeta, count);
    return convert_to_rss(s, tables, xs);
}

Share2Vec secure_layernorm(Session& s, TableSupply& supply, const Share2Vec& rows,
                           std::size_t nrows, std::size_t len, const LayerNormParams& p) {
    if (len == 0 || nrows == 0) throw DomainError("layernorm over an empty input");
    bool holder = s.party() != 0;
    constexpr u64 m16 = 0xFFFF;

    // (1) lift each element to 16 bits (signed extension tables)
    auto lift_tables = supply.take(TableMeta{TableKind::ConvertSignExt, 4, 0, 16}, nrows * len);
    auto x16 = convert_up(s, lift_tables, rows);

    // (2) mean: floor(2^12/n) * sum, top nibble is mu
    Share2Vec mu4;
    mu4.width = 4;
    if (holder) {
        mu4.comp.resize(nrows);
        for (std::size_t r = 0; r < nrows; ++r) {
            u64 sum = 0;
            for (std::size_t i = 0; i < len; ++i) sum = (sum + x16.comp[r * len + i]) & m16;
            mu4.comp[r] = ((sum * p.fold_mu) & m16) >> 12;
        }
    }

    // (3) RSS forms: x via reshare of the lifted values, mu via convert
    auto x_rss = reshare_to_rss(s, x16, nrows * len);
    auto mu_tables = supply.take(TableMeta{TableKind::ConvertSignExt, 4, 0, 16}, nrows);
    auto mu_rss = convert_to_rss(s, mu_tables, mu4);

    // (4) centered values over RSS
    RssVec c;
    c.width = kLinearRing;
    c.next.resize(nrows * len);
    c.prev.resize(nrows * len);
    for (std::size_t r = 0; r < nrows; ++r)
        for (std::size_t i = 0; i < len; ++i) {
            std::size_t ix = r * len + i;
            c.next[ix] = (x_rss.next[ix] - mu_rss.next[r]) & m16;
            c.prev[ix] = (x_rss.prev[ix] - mu_rss.prev[r]) & m16;
        }

    // (5) u_i: halve the 5-bit centered value into 4 bits via the 2^11 fold
    auto c2 = rss_to_share2(s, c);
    Share2Vec u;
    u.width = 4;
    if (holder) {
        u.comp.resize(nrows * len);
        for (std::size_t i = 0; i < nrows * len; ++i)
            u.comp[i] = ((c2.comp[i] << 11) & m16) >> 12;
    }

    // (6) variance: row-wise self product, folded and truncated to 4 bits
    auto v = quantized_dot_rows(s, c, c, nrows, len, p.fold_var);

    // (7) per-channel output tables grouped on the shared variance slot
    auto groups = supply.take_groups(kLnMeta, nrows, len);
    std::vector<Share2Vec> a_inputs(nrows);
    if (holder)
        for (std::size_t r = 0; r < nrows; ++r) {
            a_inputs[r].width = 4;
            a_inputs[r].comp.assign(u.comp.begin() + r * len, u.comp.begin() + (r + 1) * len);
        }
    auto outs = eval_groups(s, groups, a_inputs, v);

    Share2Vec out;
    out.width = 4;
    if (holder) {
        out.comp.reserve(nrows * len);
        for (auto& o : outs) out.comp.insert(out.comp.end(), o.comp.begin(), o.comp.end());
    }
    return out;
}

}  // namespace qmpc
