#pragma once

#include <array>
#include <optional>

#include "qmpc/layers/nonlinear.hpp"
#include "qmpc/model/census.hpp"
#include "qmpc/model/oracle.hpp"

namespace qmpc {

// One party's offline material for a single forward pass at a fixed sequence
// length: RSS-shared folded weights plus all shifted tables in consumption
// order. Strictly single-use.
struct OfflineBundle {
    unsigned seq = 0;
    u64 manifest = 0;
    PreparedSupply supply;
    struct LayerW {
        RssVec qkv;  // hidden x 3*hidden (transposed: in x out)
        RssVec o;    // hidden x hidden
        RssVec fc1;  // hidden x ffn
        RssVec fc2;  // ffn x hidden
    };
    std::vector<LayerW> w;
    RssVec w_final;  // hidden x hidden
    bool consumed = false;
};

u64 model_manifest(const Model& m, unsigned seq);

// Dealer-side generation and distribution of a full bundle (offline phase).
OfflineBundle offline_prepare(Session& s, const Model& m, unsigned seq);

// Persisted bundle: per-party file reusing the shifted-table record format,
// ordering manifest implicit in record order.
void save_bundle(const std::string& path, const OfflineBundle& b, int party);
OfflineBundle load_bundle(const std::string& path, int party, const Model& m, unsigned seq);

struct ForwardOutput {
    Share2Vec logits;  // seq x hidden, 4-bit
    std::vector<std::pair<std::string, Share2Vec>> audit;  // per-cut shares (audit mode)
};

// The secure forward pass (online phase). input_if_p1 is consulted only at the
// data owner. audit collects every intermediate cut for harness-side checks;
// it adds no communication.
ForwardOutput secure_forward(Session& s, const Model& m, OfflineBundle& bundle,
                             const QuantTensor* input_if_p1, unsigned seq, bool audit);

// Open the logits between P1 and P2 (one round).
std::vector<u64> reveal_logits(Session& s, const Share2Vec& logits);

// Oracle-rebased verification: each secure cut is compared against the oracle
// step applied to the secure path's own inputs, with the per-cut tolerance
// (exact for lookups, -1 carry for truncation-bearing cuts, +-1 for layernorm).
struct CutCheck {
    std::string name;
    i64 max_dev = 0;  // signed magnitude of the worst deviation
    i64 tolerance = 0;
    bool pass = false;
};

std::vector<CutCheck> verify_cuts(const Model& m, unsigned seq, std::span<const u64> emb4,
                                  const std::array<ForwardOutput, 3>& results);

}  // namespace qmpc
