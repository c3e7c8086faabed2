#include "qmpc/model/oracle.hpp"

#include "qmpc/kernels/kernels.hpp"
#include "qmpc/lut/table.hpp"

namespace qmpc::oracle {

namespace {
constexpr u64 m16 = 0xFFFF;

u64 trc16to4(u64 v) { return (v & m16) >> 12; }

// exact (non-modular) variant for the clip-on study
std::vector<u64> matmul_clip(std::span<const i64> a, std::span<const i64> b, std::size_t m,
                             std::size_t k, std::size_t n, i64 fold) {
    std::vector<u64> out(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            i64 acc = 0;
            for (std::size_t t = 0; t < k; ++t) acc += a[i * k + t] * b[t * n + j];
            i64 q = (acc * fold) >> 12;  // arithmetic shift = floor for 2^12
            out[i * n + j] = static_cast<u64>(clip_i64(q, -8, 7)) & 15;
        }
    return out;
}


}  // namespace

std::vector<u64> lift4(std::span<const u64> v, bool is_signed) {
    std::vector<u64> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = is_signed ? encode_signed_raw(decode_signed(v[i], 4), 16)
                           : (v[i] & 15);
    return out;
}

std::vector<u64> fc(std::span<const u64> x4, bool x_signed, std::span<const signed char> w,
                    std::size_t out_f, std::size_t in_f, std::size_t positions, u64 fold,
                    bool clip) {
    auto x16 = lift4(x4, x_signed);
    return fc_from16(x16, w, out_f, in_f, positions, fold, clip);
}

std::vector<u64> fc_from16(std::span<const u64> x16, std::span<const signed char> w,
                           std::size_t out_f, std::size_t in_f, std::size_t positions, u64 fold,
                           bool clip) {
    if (x16.size() != positions * in_f || w.size() != out_f * in_f)
        throw StructuralError("oracle fc shape mismatch");
    if (!clip) {
        // folded transposed weights over the 16-bit ring
        std::vector<u64> wt(in_f * out_f);
        for (std::size_t o = 0; o < out_f; ++o)
            for (std::size_t i = 0; i < in_f; ++i)
                wt[i * out_f + o] = (w[o * in_f + i] > 0 ? fold : (0 - fold)) & m16;
        std::vector<u64> y(positions * out_f);
        kernels::ring_matmul(x16.data(), wt.data(), y.data(), positions, in_f, out_f, m16);
        for (auto& v : y) v = trc16to4(v);
        return y;
    }
    std::vector<i64> xs(x16.size());
    for (std::size_t i = 0; i < x16.size(); ++i) xs[i] = decode_signed(x16[i], 16);
    std::vector<i64> wt(in_f * out_f);
    for (std::size_t o = 0; o < out_f; ++o)
        for (std::size_t i = 0; i < in_f; ++i) wt[i * out_f + o] = w[o * in_f + i];
    return matmul_clip(xs, wt, positions, in_f, out_f, static_cast<i64>(fold));
}

std::vector<u64> scores(std::span<const u64> q4, std::span<const u64> k4, unsigned seq,
                        unsigned hidden, unsigned heads, u64 fold, bool clip) {
    unsigned d = hidden / heads;
    std::vector<u64> out(std::size_t(heads) * seq * seq);
    auto q16 = lift4(q4, true);
    auto k16 = lift4(k4, true);
    for (unsigned h = 0; h < heads; ++h) {
        if (!clip) {
            std::vector<u64> a(std::size_t(seq) * d), b(std::size_t(d) * seq);
            for (unsigned s = 0; s < seq; ++s)
                for (unsigned t = 0; t < d; ++t) {
                    a[s * d + t] = q16[s * hidden + h * d + t];
                    b[t * seq + s] = k16[s * hidden + h * d + t];
                }
            std::vector<u64> z(std::size_t(seq) * seq);
            kernels::ring_matmul(a.data(), b.data(), z.data(), seq, d, seq, m16);
            for (std::size_t i = 0; i < z.size(); ++i)
                out[std::size_t(h) * seq * seq + i] = trc16to4((z[i] * fold) & m16);
        } else {
            std::vector<i64> a(std::size_t(seq) * d), b(std::size_t(d) * seq);
            for (unsigned s = 0; s < seq; ++s)
                for (unsigned t = 0; t < d; ++t) {
                    a[s * d + t] = decode_signed(q16[s * hidden + h * d + t], 16);
                    b[t * seq + s] = decode_signed(k16[s * hidden + h * d + t], 16);
                }
            auto z = matmul_clip(a, b, seq, d, seq, static_cast<i64>(fold));
            std::copy(z.begin(), z.end(), out.begin() + std::size_t(h) * seq * seq);
        }
    }
    return out;
}

std::vector<u64> softmax(std::span<const u64> rows4, std::size_t nrows, std::size_t len,
                         double s_x, unsigned kappa) {
    PlainTable et = exp_table(s_x);
    PlainTable dt = softmax_div_table(kappa);
    std::vector<u64> out(rows4.size());
    for (std::size_t r = 0; r < nrows; ++r) {
        u64 xo = 0;
        for (std::size_t i = 0; i < len; ++i) xo = std::max(xo, rows4[r * len + i] & 15);
        u64 dsum = 0;
        std::vector<u64> e(len);
        for (std::size_t i = 0; i < len; ++i) {
            e[i] = et.apply((rows4[r * len + i] - xo) & 15);
            dsum = (dsum + e[i]) & 255;
        }
        for (std::size_t i = 0; i < len; ++i) out[r * len + i] = dt.apply2(e[i] & 15, dsum);
    }
    return out;
}

std::vector<u64> av_mix(std::span<const u64> sm4, std::span<const u64> v4, unsigned seq,
                        unsigned hidden, unsigned heads, u64 fold, bool clip) {
    unsigned d = hidden / heads;
    std::vector<u64> out(std::size_t(seq) * hidden);
    auto v16 = lift4(v4, true);
    for (unsigned h = 0; h < heads; ++h) {
        if (!clip) {
            std::vector<u64> a(std::size_t(seq) * seq), b(std::size_t(seq) * d);
            for (unsigned i = 0; i < seq; ++i)
                for (unsigned j = 0; j < seq; ++j)
                    a[i * seq + j] = sm4[std::size_t(h) * seq * seq + i * seq + j] & 15;
            for (unsigned j = 0; j < seq; ++j)
                for (unsigned t = 0; t < d; ++t) b[j * d + t] = v16[j * hidden + h * d + t];
            std::vector<u64> z(std::size_t(seq) * d);
            kernels::ring_matmul(a.data(), b.data(), z.data(), seq, seq, d, m16);
            for (unsigned s = 0; s < seq; ++s)
                for (unsigned t = 0; t < d; ++t)
                    out[s * hidden + h * d + t] = trc16to4((z[s * d + t] * fold) & m16);
        } else {
            std::vector<i64> a(std::size_t(seq) * seq), b(std::size_t(seq) * d);
            for (unsigned i = 0; i < seq; ++i)
                for (unsigned j = 0; j < seq; ++j)
                    a[i * seq + j] = static_cast<i64>(sm4[std::size_t(h) * seq * seq + i * seq + j] & 15);
            for (unsigned j = 0; j < seq; ++j)
                for (unsigned t = 0; t < d; ++t)
                    b[j * d + t] = decode_signed(v16[j * hidden + h * d + t], 16);
            auto z = matmul_clip(a, b, seq, seq, d, static_cast<i64>(fold));
            for (unsigned s = 0; s < seq; ++s)
                for (unsigned t = 0; t < d; ++t) out[s * hidden + h * d + t] = z[s * d + t];
        }
    }
    return out;
}

std::vector<u64> residual(std::span<const u64> a4, std::span<const u64> x4, u64 fold_a,
                          u64 fold_x, bool clip) {
    auto a16 = lift4(a4, true);
    auto x16 = lift4(x4, true);
    std::vector<u64> out(a4.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!clip) {
            out[i] = trc16to4((fold_a * a16[i] + fold_x * x16[i]) & m16);
        } else {
            i64 y = static_cast<i64>(fold_a) * decode_signed(a16[i], 16) +
                    static_cast<i64>(fold_x) * decode_signed(x16[i], 16);
            out[i] = static_cast<u64>(clip_i64(y >> 12, -8, 7)) & 15;
        }
    }
    return out;
}

std::vector<u64> relu16(std::span<const u64> x4) {
    PlainTable rt = relu_table(4, 16);
    std::vector<u64> out(x4.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rt.apply(x4[i] & 15);
    return out;
}

std::vector<u64> layernorm(std::span<const u64> x4, std::size_t nrows, std::size_t len,
                           const LnSite& ln, double eps, double s_in, u64 fold_mu, u64 fold_var) {
    std::vector<u64> out(x4.size());
    std::vector<PlainTable> tables;
    tables.reserve(len);
    for (std::size_t ch = 0; ch < len; ++ch)
        tables.push_back(
            layernorm_table(ln.gamma[ch], ln.beta[ch], eps, s_in, ln.s_var, ln.s_out));
    for (std::size_t r = 0; r < nrows; ++r) {
        u64 sum = 0;
        std::vector<u64> x16(len);
        for (std::size_t i = 0; i < len; ++i) {
            x16[i] = encode_signed_raw(decode_signed(x4[r * len + i], 4), 16);
            sum = (sum + x16[i]) & m16;
        }
        u64 mu4 = ((sum * fold_mu) & m16) >> 12;
        u64 mu16 = encode_signed_raw(decode_signed(mu4, 4), 16);
        u64 var = 0;
        std::vector<u64> u(len);
        for (std::size_t i = 0; i < len; ++i) {
            u64 c = (x16[i] - mu16) & m16;
            u[i] = ((c << 11) & m16) >> 12;
            var = (var + c * c) & m16;
        }
        u64 v4 = ((var * fold_var) & m16) >> 12;
        for (std::size_t i = 0; i < len; ++i) out[r * len + i] = tables[i].apply2(u[i], v4);
    }
    return out;
}

LayerCuts run_layer(const Model& m, unsigned l, std::span<const u64> x4, unsigned seq,
                    bool clip) {
    const LayerParams& p = m.layer[l];
    const unsigned H = m.cfg.hidden, F = m.cfg.ffn;
    LayerFolds f = layer_folds(m, l);
    LayerCuts c;

    // concatenated q,k,v projections: S x 3H
    c.qkv.resize(std::size_t(seq) * 3 * H);
    auto q = fc(x4, true, p.wq, H, H, seq, f.q, clip);
    auto k = fc(x4, true, p.wk, H, H, seq, f.k, clip);
    auto v = fc(x4, true, p.wv, H, H, seq, f.v, clip);
    for (unsigned s = 0; s < seq; ++s)
        for (unsigned i = 0; i < H; ++i) {
            c.qkv[s * 3 * H + i] = q[s * H + i];
            c.qkv[s * 3 * H + H + i] = k[s * H + i];
            c.qkv[s * 3 * H + 2 * H + i] = v[s * H + i];
        }

    c.scores = scores(q, k, seq, H, m.cfg.heads, f.scores, clip);
    c.softmax = softmax(c.scores, std::size_t(m.cfg.heads) * seq, seq, f.softmax_sx, m.cfg.kappa);
    c.av = av_mix(c.softmax, v, seq, H, m.cfg.heads, f.av, clip);
    c.o = fc(c.av, true, p.wo, H, H, seq, f.o, clip);
    c.res1 = residual(c.o, x4, f.res1_a, f.res1_x, clip);
    c.ln1 = layernorm(c.res1, seq, H, p.ln1, m.cfg.eps, p.sy_res1, f.ln1_mu, f.ln1_var);
    c.ffn1 = fc(c.ln1, true, p.w1, F, H, seq, f.fc1, clip);
    c.relu = relu16(c.ffn1);
    c.ffn2 = fc_from16(c.relu, p.w2, H, F, seq, f.fc2, clip);
    c.res2 = residual(c.ffn2, c.ln1, f.res2_a, f.res2_x, clip);
    c.ln2 = layernorm(c.res2, seq, H, p.ln2, m.cfg.eps, p.sy_res2, f.ln2_mu, f.ln2_var);
    return c;
}

Trace forward(const Model& m, std::span<const u64> emb4, unsigned seq, bool clip) {
    if (emb4.size() != std::size_t(seq) * m.cfg.hidden)
        throw StructuralError("embedding shape disagrees with model");
    Trace tr;
    std::vector<u64> x(emb4.begin(), emb4.end());
    for (unsigned l = 0; l < m.cfg.layers; ++l) {
        tr.layers.push_back(run_layer(m, l, x, seq, clip));
        x = tr.layers.back().ln2;
    }
    tr.logits = fc(x, true, m.w_final, m.cfg.hidden, m.cfg.hidden, seq, final_fold(m), clip);
    return tr;
}

}  // namespace qmpc::oracle
