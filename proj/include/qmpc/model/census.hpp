#pragma once

#include <vector>

#include "qmpc/lut/protocol.hpp"
#include "qmpc/model/config.hpp"
#include "qmpc/transport/stats.hpp"

namespace qmpc {

// The offline plan: one entry per dealer distribution step, in generation and
// consumption order. offline_prepare generates from it, the census prices it,
// and the bundle's metadata checks catch any drift between plan and engine.

enum class SiteId : u16 {
    ConvX, ConvQkvOut, Max, Exp, DivSm, ConvAttn, ConvAvOut, ConvOOut,
    Ln1Lift, Ln1Mu, Ln1Div, ConvFfnIn, Relu, ConvFfnOut,
    Ln2Lift, Ln2Mu, Ln2Div, ConvFinal,
};

struct PlanStep {
    unsigned layer = 0;  // == cfg.layers for the final projection
    SiteId site = SiteId::ConvX;
    TableMeta meta;
    std::size_t count = 0;    // tables, or number of groups when grouped
    std::size_t members = 0;  // group members
    bool grouped = false;
};

std::vector<PlanStep> offline_plan(const ModelConfig& cfg, unsigned seq);

// sizes of the tournament levels for one row of length n (pairs per level)
std::vector<std::size_t> max_level_sizes(std::size_t n);

// Closed-form communication census for one forward pass.
struct Census {
    u64 weight_elems = 0;
    u64 tables_single = 0;
    u64 groups = 0;
    u64 grouped_tables = 0;
    u64 inner_products = 0;

    u64 offline_bytes[3][3] = {};
    u64 online_bytes[3][3] = {};
    u64 rounds_offline = 0;
    u64 rounds_online = 0;
    u64 opened_online = 0;

    u64 offline_total() const {
        u64 t = 0;
        for (int f = 0; f < 3; ++f)
            for (int to = 0; to < 3; ++to) t += offline_bytes[f][to];
        return t;
    }
    u64 online_total() const {
        u64 t = 0;
        for (int f = 0; f < 3; ++f)
            for (int to = 0; to < 3; ++to) t += online_bytes[f][to];
        return t;
    }

    bool matches(const StatsSnapshot& s) const;
    std::string report() const;
};

Census compute_census(const ModelConfig& cfg, unsigned seq, bool reveal_output);

}  // namespace qmpc
