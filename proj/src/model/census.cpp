#include "qmpc/model/census.hpp"

#include <sstream>

namespace qmpc {

std::vector<std::size_t> max_level_sizes(std::size_t n) {
    std::vector<std::size_t> out;
    std::size_t width = n;
    while (width > 1) {
        std::size_t pairs = width / 2;
        out.push_back(pairs);
        width = pairs + width % 2;
    }
    return out;
}

std::vector<PlanStep> offline_plan(const ModelConfig& cfg, unsigned seq) {
    cfg.validate();
    if (seq == 0 || seq > cfg.seq_cap) throw ConfigError("sequence length outside [1, seq_cap]");
    const std::size_t S = seq, H = cfg.hidden, F = cfg.ffn, h = cfg.heads;
    const TableMeta sext{TableKind::ConvertSignExt, 4, 0, 16};
    const TableMeta zext{TableKind::ConvertZeroExt, 4, 0, 16};
    const TableMeta maxm{TableKind::Max, 4, 4, 4};
    const TableMeta expm{TableKind::Exp, 4, 0, 8};
    const TableMeta divm{TableKind::DivSoftmax, 4, 8, 4};
    const TableMeta relum{TableKind::Relu, 4, 0, 16};
    const TableMeta lnm{TableKind::DivLayerNorm, 4, 4, 4};

    std::vector<PlanStep> plan;
    auto add = [&](unsigned layer, SiteId site, TableMeta meta, std::size_t count,
                   std::size_t members = 0, bool grouped = false) {
        plan.push_back({layer, site, meta, count, members, grouped});
    };
    for (unsigned l = 0; l < cfg.layers; ++l) {
        add(l, SiteId::ConvX, sext, S * H);
        add(l, SiteId::ConvQkvOut, sext, 3 * S * H);
        for (std::size_t pairs : max_level_sizes(S)) add(l, SiteId::Max, maxm, pairs * h * S);
        add(l, SiteId::Exp, expm, h * S * S);
        add(l, SiteId::DivSm, divm, h * S, S, true);
        add(l, SiteId::ConvAttn, zext, h * S * S);
        add(l, SiteId::ConvAvOut, sext, S * H);
        add(l, SiteId::ConvOOut, sext, S * H);
        add(l, SiteId::Ln1Lift, sext, S * H);
        add(l, SiteId::Ln1Mu, sext, S);
        add(l, SiteId::Ln1Div, lnm, S, H, true);
        add(l, SiteId::ConvFfnIn, sext, S * H);
        add(l, SiteId::Relu, relum, S * F);
        add(l, SiteId::ConvFfnOut, sext, S * H);
        add(l, SiteId::Ln2Lift, sext, S * H);
        add(l, SiteId::Ln2Mu, sext, S);
        add(l, SiteId::Ln2Div, lnm, S, H, true);
    }
    add(cfg.layers, SiteId::ConvFinal, sext, S * H);
    return plan;
}

Census compute_census(const ModelConfig& cfg, unsigned seq, bool reveal_output) {
    Census c{};
    const std::size_t S = seq, H = cfg.hidden, F = cfg.ffn, h = cfg.heads;

    // --- offline: one weight round plus one distribution round per plan step
    c.weight_elems = cfg.layers * (4ull * H * H + 2ull * H * F) + 1ull * H * H;
    c.offline_bytes[0][1] += 2 * c.weight_elems;
    c.offline_bytes[0][2] += 2 * c.weight_elems;
    c.rounds_offline = 1;
    for (const PlanStep& st : offline_plan(cfg, seq)) {
        c.rounds_offline += 1;
        if (!st.grouped) {
            c.tables_single += st.count;
            c.offline_bytes[0][2] += st.count * table_offline_bytes(st.meta, false);
        } else {
            c.groups += st.count;
            c.grouped_tables += st.count * st.members;
            c.offline_bytes[0][2] +=
                st.count * (st.members * table_offline_bytes(st.meta, true) + (st.meta.wb + 7) / 8);
        }
    }

    // --- online: mirrors the engine's collective sequence
    auto open_round = [&](std::initializer_list<std::pair<std::size_t, unsigned>> streams) {
        c.rounds_online += 1;
        for (auto [count, width] : streams) {
            u64 b = packed_size(count, width);
            c.online_bytes[1][2] += b;
            c.online_bytes[2][1] += b;
            c.opened_online += count;
        }
    };
    auto reshare = [&](std::size_t count) { open_round({{count, 16}}); };
    auto convert = [&](std::size_t count) {
        open_round({{count, 4}});
        reshare(count);
    };
    auto y0 = [&](std::size_t count) {
        c.rounds_online += 1;
        c.online_bytes[0][1] += 2 * count;
        c.inner_products += count;
    };
    auto softmax_cost = [&](std::size_t rows, std::size_t len) {
        for (std::size_t pairs : max_level_sizes(len))
            open_round({{pairs * rows, 4}, {pairs * rows, 4}});
        open_round({{rows * len, 4}});            // exponent lookups
        open_round({{rows * len, 4}, {rows, 8}}); // grouped division
    };
    auto layernorm_cost = [&](std::size_t rows, std::size_t len) {
        open_round({{rows * len, 4}});  // lift
        reshare(rows * len);            // x to RSS
        open_round({{rows, 4}});        // mu lift
        reshare(rows);                  // mu to RSS
        y0(rows);                       // variance inner products
        open_round({{rows * len, 4}, {rows, 4}});  // grouped division
    };

    for (unsigned l = 0; l < cfg.layers; ++l) {
        convert(S * H);        // x -> RSS
        y0(3 * S * H);         // qkv projections
        convert(3 * S * H);    // q,k,v -> RSS
        y0(h * S * S);         // scores
        softmax_cost(h * S, S);
        convert(h * S * S);    // attention weights -> RSS
        y0(S * H);             // attention-value mix
        convert(S * H);        // av -> RSS
        y0(S * H);             // output projection
        convert(S * H);        // o -> RSS (residual operand)
        layernorm_cost(S, H);  // ln1 (residual itself is local)
        convert(S * H);        // ln1 -> RSS
        y0(S * F);             // fc1
        open_round({{S * F, 4}});  // relu lookups
        reshare(S * F);            // relu outputs to RSS
        y0(S * H);             // fc2
        convert(S * H);        // ffn out -> RSS
        layernorm_cost(S, H);  // ln2
    }
    convert(S * H);  // final projection input
    y0(S * H);       // final fc
    if (reveal_output) open_round({{S * H, 4}});
    return c;
}

bool Census::matches(const StatsSnapshot& s) const {
    for (int f = 0; f < 3; ++f)
        for (int t = 0; t < 3; ++t) {
            if (s.bytes[int(Phase::Offline)][f][t] != offline_bytes[f][t]) return false;
            if (s.bytes[int(Phase::Online)][f][t] != online_bytes[f][t]) return false;
        }
    return s.rounds[int(Phase::Offline)] == rounds_offline &&
           s.rounds[int(Phase::Online)] == rounds_online &&
           s.opened[int(Phase::Online)] == opened_online;
}

std::string Census::report() const {
    std::ostringstream os;
    for (int f = 0; f < 3; ++f)
        for (int t = 0; t < 3; ++t) {
            if (f == t) continue;
            os << "predicted_bytes_offline_" << f << "_" << t << "=" << offline_bytes[f][t]
               << "\n";
        }
    for (int f = 0; f < 3; ++f)
        for (int t = 0; t < 3; ++t) {
            if (f == t) continue;
            os << "predicted_bytes_online_" << f << "_" << t << "=" << online_bytes[f][t] << "\n";
        }
    os << "predicted_rounds_offline=" << rounds_offline << "\n";
    os << "predicted_rounds_online=" << rounds_online << "\n";
    os << "predicted_opened_online=" << opened_online << "\n";
    os << "tables_single=" << tables_single << "\n";
    os << "table_groups=" << groups << "\n";
    os << "grouped_tables=" << grouped_tables << "\n";
    os << "inner_products=" << inner_products << "\n";
    os << "weight_elems=" << weight_elems << "\n";
    return os.str();
}

}  // namespace qmpc
