#pragma once

#include <span>

#include "qmpc/model/config.hpp"

namespace qmpc {

// Bit-faithful plaintext reference: the exact integer pipeline of the secure
// engine, with exact truncations (no share carries). Every cut the secure path
// produces has a counterpart here, so the verifier can re-run any single step
// on revealed intermediates. All tensors are ring values (4-bit unless noted).
namespace oracle {

std::vector<u64> lift4(std::span<const u64> v, bool is_signed);

// FC over 1-bit weights folded by `fold`: w is out_f x in_f in {-1,+1}.
std::vector<u64> fc(std::span<const u64> x4, bool x_signed, std::span<const signed char> w,
                    std::size_t out_f, std::size_t in_f, std::size_t positions, u64 fold,
                    bool clip);

// attention scores: per head, q k^T with the folded 1/sqrt(d) scale
std::vector<u64> scores(std::span<const u64> q4, std::span<const u64> k4, unsigned seq,
                        unsigned hidden, unsigned heads, u64 fold, bool clip);

// quantized softmax pipeline over rows (exponent and division tables)
std::vector<u64> softmax(std::span<const u64> rows4, std::size_t nrows, std::size_t len,
                         double s_x, unsigned kappa);

// attention-weighted value mix: sm (h x S x S, unsigned) times v (S x H, signed)
std::vector<u64> av_mix(std::span<const u64> sm4, std::span<const u64> v4, unsigned seq,
                        unsigned hidden, unsigned heads, u64 fold, bool clip);

std::vector<u64> residual(std::span<const u64> a4, std::span<const u64> x4, u64 fold_a,
                          u64 fold_x, bool clip);

// 16-bit ring values (ReLU output feeds the next FC directly)
std::vector<u64> relu16(std::span<const u64> x4);

// FC variant taking pre-lifted 16-bit inputs (the ReLU path)
std::vector<u64> fc_from16(std::span<const u64> x16, std::span<const signed char> w,
                           std::size_t out_f, std::size_t in_f, std::size_t positions, u64 fold,
                           bool clip);

std::vector<u64> layernorm(std::span<const u64> x4, std::size_t nrows, std::size_t len,
                           const LnSite& ln, double eps, double s_in, u64 fold_mu, u64 fold_var);

struct LayerCuts {
    std::vector<u64> qkv;      // S x 3H
    std::vector<u64> scores;   // h x S x S
    std::vector<u64> softmax;  // h x S x S
    std::vector<u64> av;       // S x H
    std::vector<u64> o;        // S x H
    std::vector<u64> res1;     // S x H
    std::vector<u64> ln1;      // S x H
    std::vector<u64> ffn1;     // S x F
    std::vector<u64> relu;     // S x F, 16-bit ring
    std::vector<u64> ffn2;     // S x H
    std::vector<u64> res2;     // S x H
    std::vector<u64> ln2;      // S x H
};

struct Trace {
    std::vector<LayerCuts> layers;
    std::vector<u64> logits;  // S x H
};

LayerCuts run_layer(const Model& m, unsigned l, std::span<const u64> x4, unsigned seq, bool clip);
Trace forward(const Model& m, std::span<const u64> emb4, unsigned seq, bool clip);

}  // namespace oracle

}  // namespace qmpc
