#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qmpc/core/batch.hpp"
#include "qmpc/lut/table.hpp"
#include "qmpc/transport/session.hpp"

namespace qmpc {

// Offline material for one oblivious lookup: the dealer-rotated table shared
// between P1/P2 plus shared rotation offsets. Strictly single-use: evaluating
// the same table twice would reveal the difference of the two inputs.
struct TableMeta {
    TableKind kind = TableKind::Generic;
    unsigned wa = 0;
    unsigned wb = 0;  // 0 for single-input
    unsigned out_width = 0;

    bool operator==(const TableMeta&) const = default;
};

struct ShiftedTable {
    TableMeta meta;
    u64 stream_index = 0;
    std::vector<u64> entries;  // P1/P2 share components; empty at P0
    u64 off_a = 0;             // share of the first-slot offset (P0: the offset itself)
    u64 off_b = 0;             // second slot, if present and not group-shared
    bool group_shared_b = false;
    bool consumed = false;
};

// Tables forced to share the second-slot offset, so the blinded value for that
// slot is opened once for the whole group.
struct TableGroup {
    std::vector<ShiftedTable> tables;
    u64 shared_off_b = 0;
    unsigned wb = 0;
    u64 stream_index = 0;
};

struct GenSpec {
    TableMeta meta;
    const PlainTable* plain = nullptr;  // dealer side only
    std::optional<u64> force_da;        // test hooks: pin the rotation offsets
    std::optional<u64> force_db;
};

struct GroupSpec {
    std::vector<GenSpec> members;       // all members must share wb and out width
    std::optional<u64> force_db;
};

// Dealer-side generation and distribution (one round, one frame P0->P2 per
// call; the P1 components come from the P0-P1 seed and cost zero bytes).
std::vector<ShiftedTable> gen_tables(Session& s, std::span<const GenSpec> specs);
std::vector<TableGroup> gen_table_groups(Session& s, std::span<const GroupSpec> specs);

// Closed-form offline cost of one table (bytes sent by P0), as distributed by
// gen_tables: entries at ceil(out/8) bytes each plus each offset at ceil(w/8).
u64 table_offline_bytes(const TableMeta& m, bool group_shared_b = false);

// Online evaluation; consumes the tables. All opens of a call share one round.
Share2Vec eval_single_batch(Session& s, std::span<ShiftedTable> tables, const Share2Vec& xs);
Share2Vec eval_two_batch(Session& s, std::span<ShiftedTable> tables, const Share2Vec& a,
                         const Share2Vec& b);

// Group evaluation: per-table first inputs, one shared second input.
// shared_b holds exactly one element.
Share2Vec eval_group(Session& s, TableGroup& g, const Share2Vec& a_inputs,
                     const Share2Vec& shared_b);

// Batched group evaluation in a single round (one group per shared_b element).
std::vector<Share2Vec> eval_groups(Session& s, std::span<TableGroup> groups,
                                   std::span<const Share2Vec> a_inputs,
                                   const Share2Vec& shared_bs);

// Assemble a group from independently generated tables; the dealer checks the
// second-slot offsets actually agree (mixed offsets are a structural error).
TableGroup assemble_group(Session& s, std::vector<ShiftedTable> tables);

// Ring-size extension via an identity (or sign-extension) table.
Share2Vec convert_up(Session& s, std::span<ShiftedTable> tables, const Share2Vec& xs);

// Reshare a 2PC sharing into RSS: components <x>_2 / <x>_1 come from the
// P0-P1 / P0-P2 seeds (zero bytes); P1 and P2 open delta1, delta2 and both
// set <x>_0 = delta1 + delta2. count must match on all parties (P0 carries
// no share data but mints its components).
RssVec reshare_to_rss(Session& s, const Share2Vec& xs, std::size_t count);

// convert_up then reshare: lifts a small-ring 2PC share to a large-ring RSS share.
RssVec convert_to_rss(Session& s, std::span<ShiftedTable> tables, const Share2Vec& xs);

// Local 2PC extraction from an RSS sharing (P1: next+prev, P2: prev).
Share2Vec rss_to_share2(Session& s, const RssVec& x);

// --- table file format -------------------------------------------------------
// Little-endian stream: per record a fixed header (kind u16, wa u8, wb u8,
// out u8, flags u8, stream_index u64) followed by offsets and, for P1/P2,
// bit-packed share entries.
void write_table(std::ostream& os, const ShiftedTable& t, int party);
ShiftedTable read_table(std::istream& is, int party);

}  // namespace qmpc
