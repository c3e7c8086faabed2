#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qmpc/core/ring.hpp"
#include "qmpc/errors.hpp"

namespace qmpc {

// Quantized transformer description. Weights are 1-bit (+-1); every activation
// edge carries a positive dequantization scale. Scales are model data: the
// integer folds derived from them are public run constants, while anything
// entering a dealer table (softmax input scale, LayerNorm gamma/beta/eps)
// stays private to P0.

struct ModelConfig {
    unsigned layers = 1;
    unsigned hidden = 8;
    unsigned heads = 1;
    unsigned ffn = 16;
    unsigned seq_cap = 16;
    unsigned kappa = 2;        // softmax denominator slice offset
    unsigned softmax_cap = 16; // max softmax length before the 8-bit ring overflows
    double eps = 1.0;          // LayerNorm epsilon, dequantized units
    double s_embed = 0.25;

    unsigned head_dim() const { return hidden / heads; }

    void validate() const {
        if (hidden == 0 || layers == 0 || heads == 0 || ffn == 0 || seq_cap == 0)
            throw ConfigError("model dimensions must be positive");
        if (hidden % heads != 0) throw ConfigError("hidden size must be divisible by head count");
        if (hidden > 4096 || ffn > 4096)
            throw ConfigError("inner dimensions above 4096 overflow the 4+12-bit ring");
        if (seq_cap > softmax_cap)
            throw ConfigError("sequence cap exceeds the softmax denominator cap");
        if (kappa > 4) throw ConfigError("kappa must be in [0,4]");
        if (s_embed <= 0) throw ConfigError("scales must be positive");
    }
};

struct LnSite {
    std::vector<double> gamma, beta;  // per channel
    double s_var = 1.0;               // variance quantization scale
    double s_out = 0.25;              // output activation scale
};

// Per-layer parameters. Weight matrices are stored out_features x in_features,
// entries in {-1,+1}. s_y values are the output scales of each producing site;
// input scales follow from wiring (previous site's output scale).
struct LayerParams {
    std::vector<signed char> wq, wk, wv, wo;  // hidden x hidden
    std::vector<signed char> w1;              // ffn x hidden
    std::vector<signed char> w2;              // hidden x ffn
    double sw_q = 1, sw_k = 1, sw_v = 1, sw_o = 1, sw_1 = 1, sw_2 = 1;
    double sy_q = 1, sy_k = 1, sy_v = 1;
    double sy_scores = 0.5;  // softmax input scale
    double sy_av = 1, sy_o = 1;
    double sy_res1 = 1, sy_ffn1 = 1, sy_ffn2 = 1, sy_res2 = 1;
    LnSite ln1, ln2;
};

struct Model {
    ModelConfig cfg;
    std::vector<LayerParams> layer;
    std::vector<signed char> w_final;  // hidden x hidden
    double sw_final = 1, sy_final = 0.25;
};

// Integer tensor with quantization metadata; the model-level data carrier.
struct QuantTensor {
    std::vector<i64> data;
    std::size_t rows = 0, cols = 0;
    unsigned bits = 4;
    bool is_signed = true;
    double scale = 1.0;

    void validate() const {
        if (scale <= 0) throw DomainError("quant tensor scale must be positive");
        i64 lo = is_signed ? -(i64(1) << (bits - 1)) : 0;
        i64 hi = is_signed ? (i64(1) << (bits - 1)) - 1 : (i64(1) << bits) - 1;
        for (i64 v : data)
            if (v < lo || v > hi) throw DomainError("quant tensor entry out of declared range");
    }

    // ring representatives at the declared bit width
    std::vector<u64> ring() const {
        std::vector<u64> out(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            out[i] = static_cast<u64>(data[i]) & ring_mask(bits);
        return out;
    }
};

// --- fold arithmetic ---------------------------------------------------------
// All rescaling happens through floor(2^12 * s) integer folds; one quantization
// step in must stay one step out, so every fold must fit 15 bits.

inline u64 fold_scale(double s) {
    double f = std::floor(4096.0 * s);
    if (!(f >= 1.0) || f >= 32768.0)
        throw ConfigError("folded scale " + std::to_string(f) + " outside [1, 2^15)");
    return static_cast<u64>(f);
}

// input activation scale entering layer L
inline double layer_input_scale(const Model& m, unsigned l) {
    return l == 0 ? m.cfg.s_embed : m.layer[l - 1].ln2.s_out;
}

struct LayerFolds {
    u64 q, k, v, o, fc1, fc2;        // folded into the shared weights
    u64 scores, av;                  // public post-folds for the two matmuls
    u64 res1_a, res1_x, res2_a, res2_x;
    u64 ln1_mu, ln1_var, ln2_mu, ln2_var;
    double softmax_sx;               // dealer-side: exp-table input scale
};

inline LayerFolds layer_folds(const Model& m, unsigned l) {
    const LayerParams& p = m.layer[l];
    double sx = layer_input_scale(m, l);
    double d = static_cast<double>(m.cfg.head_dim());
    LayerFolds f{};
    f.q = fold_scale(p.sw_q * sx / p.sy_q);
    f.k = fold_scale(p.sw_k * sx / p.sy_k);
    f.v = fold_scale(p.sw_v * sx / p.sy_v);
    f.scores = fold_scale(p.sy_q * p.sy_k / (std::sqrt(d) * p.sy_scores));
    f.av = fold_scale((1.0 / 16.0) * p.sy_v / p.sy_av);
    f.o = fold_scale(p.sw_o * p.sy_av / p.sy_o);
    f.res1_a = fold_scale(p.sy_o / p.sy_res1);
    f.res1_x = fold_scale(sx / p.sy_res1);
    f.fc1 = fold_scale(p.sw_1 * p.ln1.s_out / p.sy_ffn1);
    f.fc2 = fold_scale(p.sw_2 * p.sy_ffn1 / p.sy_ffn2);
    f.res2_a = fold_scale(p.sy_ffn2 / p.sy_res2);
    f.res2_x = fold_scale(p.ln1.s_out / p.sy_res2);
    f.ln1_mu = 4096 / m.cfg.hidden;
    f.ln1_var = fold_scale(p.sy_res1 * p.sy_res1 / (p.ln1.s_var * m.cfg.hidden));
    f.ln2_mu = 4096 / m.cfg.hidden;
    f.ln2_var = fold_scale(p.sy_res2 * p.sy_res2 / (p.ln2.s_var * m.cfg.hidden));
    f.softmax_sx = p.sy_scores;
    return f;
}

inline u64 final_fold(const Model& m) {
    return fold_scale(m.sw_final * m.layer.back().ln2.s_out / m.sy_final);
}

}  // namespace qmpc
