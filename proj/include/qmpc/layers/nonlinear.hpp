#pragma once

#include <deque>
#include <functional>
#include <span>

#include "qmpc/layers/linear.hpp"
#include "qmpc/lut/protocol.hpp"

namespace qmpc {

// Source of offline material in consumption order. The engine's bundle hands
// out pregenerated tables; unit tests may generate on demand instead.
class TableSupply {
  public:
    virtual ~TableSupply() = default;
    virtual std::vector<ShiftedTable> take(const TableMeta& meta, std::size_t n) = 0;
    virtual std::vector<TableGroup> take_groups(const TableMeta& meta, std::size_t groups,
                                                std::size_t members) = 0;
};

// Pregenerated material consumed strictly in preload order. Metadata mismatch
// means the bundle was built for a different plan; running dry is a state error.
class PreparedSupply : public TableSupply {
  public:
    void preload(std::vector<ShiftedTable> tables) {
        for (auto& t : tables) tables_.push_back(std::move(t));
    }
    void preload_groups(std::vector<TableGroup> groups) {
        for (auto& g : groups) groups_.push_back(std::move(g));
    }

    std::vector<ShiftedTable> take(const TableMeta& meta, std::size_t n) override {
        std::vector<ShiftedTable> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (tables_.empty()) throw StateError("offline bundle exhausted");
            if (!(tables_.front().meta == meta))
                throw StructuralError("bundle/plan mismatch: unexpected table metadata");
            out.push_back(std::move(tables_.front()));
            tables_.pop_front();
        }
        return out;
    }

    std::vector<TableGroup> take_groups(const TableMeta& meta, std::size_t groups,
                                        std::size_t members) override {
        std::vector<TableGroup> out;
        out.reserve(groups);
        for (std::size_t i = 0; i < groups; ++i) {
            if (groups_.empty()) throw StateError("offline bundle exhausted");
            TableGroup& g = groups_.front();
            if (g.tables.size() != members || !(g.tables[0].meta == meta))
                throw StructuralError("bundle/plan mismatch: unexpected group shape");
            out.push_back(std::move(g));
            groups_.pop_front();
        }
        return out;
    }

    bool drained() const { return tables_.empty() && groups_.empty(); }
    std::size_t tables_left() const { return tables_.size(); }
    std::size_t groups_left() const { return groups_.size(); }
    const std::deque<ShiftedTable>& pending_tables() const { return tables_; }
    const std::deque<TableGroup>& pending_groups() const { return groups_; }

  private:
    std::deque<ShiftedTable> tables_;
    std::deque<TableGroup> groups_;
};

// Tournament maximum over unsigned 4-bit values: n-1 two-input max tables per
// row, all rows' same-level lookups batched into one round, ceil(log2 n) rounds.
Share2Vec secure_max_rows(Session& s, TableSupply& supply, const Share2Vec& rows,
                          std::size_t nrows, std::size_t len);

// Local middle-4-bit extraction from an 8-bit sharing: each party keeps
// floor(comp / 2^kappa) mod 16. The revealed value is floor(d/2^kappa) mod 16
// with a possible -1 share carry (exact for kappa = 0).
Share2Vec mid_extract(Session& s, const Share2Vec& d, unsigned kappa);

struct SoftmaxParams {
    unsigned kappa = 2;
    std::size_t cap = 16;  // denominator-ring overflow guard
};

// Quantized softmax rows: max tournament, local differences, exponent lookup
// (4-bit in, 8-bit out), local 8-bit denominator sum, numerator slice, then
// one division lookup per element grouped on the shared denominator.
Share2Vec secure_softmax_rows(Session& s, TableSupply& supply, const Share2Vec& rows,
                              std::size_t nrows, std::size_t len, const SoftmaxParams& p);

// ReLU: 4-bit signed in, 16-bit additive out via one table, reshared to RSS.
RssVec secure_relu(Session& s, TableSupply& supply, const Share2Vec& xs, std::size_t count);

struct LayerNormParams {
    u64 fold_mu = 0;   // floor(2^12 / n)
    u64 fold_var = 0;  // floor(2^12 * s_x^2 / (s_var * n))
};

// LayerNorm over rows of length n (one row per position): lift to 16 bits,
// mean via the public 2^12/n fold, center over RSS, variance via a row-wise
// inner product (Algorithm-3 pattern), then per-channel two-input tables
// grouped on the shared variance slot.
Share2Vec secure_layernorm(Session& s, TableSupply& supply, const Share2Vec& rows,
                           std::size_t nrows, std::size_t len, const LayerNormParams& p);

}  // namespace qmpc
