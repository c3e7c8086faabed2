#pragma once

#include <span>

#include "qmpc/core/batch.hpp"
#include "qmpc/transport/session.hpp"

namespace qmpc {

// Linear-layer protocols over 16-bit RSS with 4-bit quantized outputs.
// Inner products run locally per party (constant communication); the
// rescale-by-s_w*s_x/s_y step is a public 2^12-folded integer multiply
// followed by top-4-bit truncation of the masked 2PC split, so the revealed
// result is trc(sum mod 2^16, 4) with a possible -1 carry in the low bit.

constexpr unsigned kLinearRing = 16;  // the 4+12-bit ring
constexpr unsigned kActBits = 4;
constexpr unsigned kFoldShift = 12;   // folded scales are floor(2^12 * s)
constexpr std::size_t kMaxInnerDim = 1u << kFoldShift;

// Full replicated inner product: local bilinear terms re-randomized with a
// zero sharing, then each party passes its component to the next party to
// restore RSS form (3 messages of one element per product, one round).
RssVec rss_inner_product_rows(Session& s, const RssVec& lhs_rows, const RssVec& rhs_rows,
                              std::size_t rows, std::size_t len);

// Raw local bilinear terms (no re-randomization), for callers that assemble
// several blocks before one truncation round.
std::vector<u64> bilinear_matmul_local(const RssVec& lhs, const RssVec& rhs, std::size_t m,
                                       std::size_t k, std::size_t n);

// Algorithm-3 tail on a batch of local sums: re-randomize with a zero sharing,
// P0 hands its masked component to P1 (one round, one 16-bit element per sum),
// then P1/P2 fold by the public constant and keep the top 4 bits.
Share2Vec truncate_after_fold(Session& s, std::vector<u64> local_sums, u64 post_fold);

// Residual connection: fold both 16-bit RSS inputs by public constants, add
// locally, and requantize the 2PC split to 4 bits (zero communication).
Share2Vec residual_requant(Session& s, const RssVec& a, const RssVec& x, u64 fold_a, u64 fold_x);

// Algorithm-3 style quantized matmul: local bilinear terms, zero-sharing
// re-randomization, P0 sends its masked component to P1, both remaining
// parties fold by `post_fold` and truncate to 4 bits. Output is a 2PC share.
// For FC layers the fold lives inside the weights and post_fold is 1.
Share2Vec quantized_matmul(Session& s, const RssVec& lhs, const RssVec& rhs, std::size_t m,
                           std::size_t k, std::size_t n, u64 post_fold);

// Row-wise variant (lhs row i times rhs row i), used for LayerNorm variances.
Share2Vec quantized_dot_rows(Session& s, const RssVec& lhs_rows, const RssVec& rhs_rows,
                             std::size_t rows, std::size_t len, u64 post_fold);

// Weights folded as W'_i = floor(2^12 * s_w*s_x/s_y) * W_i, W_i in {-1,+1},
// RSS-shared over Z_2^16 by the dealer during the offline phase. Stored
// transposed (in_features x out_features) so activations multiply from the left.
struct FoldedWeights {
    RssVec w;  // in_features x out_features, row-major
    std::size_t in_features = 0;
    std::size_t out_features = 0;
};

// FC layer: one inner product per output neuron per position.
// x: positions x in_features row-major; output positions x out_features.
Share2Vec fc_quantized(Session& s, const FoldedWeights& w, const RssVec& x,
                       std::size_t positions);

}  // namespace qmpc
