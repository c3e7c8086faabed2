#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qmpc/core/batch.hpp"
#include "qmpc/core/prg.hpp"
#include "qmpc/transport/net.hpp"
#include "qmpc/transport/stats.hpp"

namespace qmpc {

// One party's handle on a three-party protocol session. All protocol code is
// SPMD: every party executes the same call sequence and branches on role
// inside, which keeps stream-index allocation and round counting identical
// across parties by construction.
//
// Rounds and opened-element counts are recorded by P1 only (see stats.hpp).

struct OpenStream {
    std::span<const u64> share;
    unsigned width = 0;
};

class Session {
  public:
    Session(int party, u64 master_seed, Net& net, CommStats& stats);

    int party() const { return party_; }
    Phase phase() const { return phase_; }
    void set_phase(Phase p);

    CommStats& stats() { return stats_; }
    Net& net() { return net_; }

    // Verifies pairwise seed agreement; must be the first collective.
    void handshake();

    // --- seeded randomness ---------------------------------------------------
    // next = seed shared with party+1, prev = with party-1 (mod 3).
    Prg next_stream(Purpose p, u64 index) const { return Prg(next_seed_, p, index); }
    Prg prev_stream(Purpose p, u64 index) const { return Prg(prev_seed_, p, index); }
    Prg dealer_stream(Purpose p, u64 index) const;  // P0 only

    // Deterministic stream-index allocators; advance identically on all parties.
    u64 alloc_table(u64 n = 1) { return bump(table_idx_, n); }
    u64 alloc_zero() { return bump(zero_idx_, 1); }
    u64 alloc_reshare() { return bump(reshare_idx_, 1); }
    u64 alloc_weight() { return bump(weight_idx_, 1); }
    u64 alloc_input() { return bump(input_idx_, 1); }

    // Fresh 3-party zero sharing: per-party alpha with alpha_0+alpha_1+alpha_2 = 0.
    std::vector<u64> zero_share(std::size_t count, unsigned width);

    // --- collectives (call on all three parties) -----------------------------

    // P1<->P2 batched opening of one or more streams in a single round.
    // Returns the revealed vectors (empty for P0).
    std::vector<std::vector<u64>> open2_multi(std::span<const OpenStream> streams, u16 t);
    std::vector<u64> open2(std::span<const u64> share, unsigned width, u16 t);

    // P0 -> P1 transfer of masked inner-product components (one round).
    // P0 passes its values; P1 receives them; P2 passes through.
    std::vector<u64> p0_to_p1(std::span<const u64> vals_if_p0, std::size_t count, unsigned width);

    // Dealer distribution: P0 -> P2 (table shares) or P0 -> {P1,P2} (weights).
    void p0_send_elems(int to, u16 t, std::span<const u64> vals, unsigned pack_width);
    std::vector<u64> p0_recv_elems(u16 t, std::size_t count, unsigned pack_width);
    void mark_distribution_round();

    // 2PC sharing of P1's input values via the P1-P2 seed (zero bytes).
    Share2Vec input_share2(std::span<const u64> vals_if_p1, std::size_t count, unsigned width);

    // raw counted send/recv
    void send_elems(int to, u16 t, std::span<const u64> vals, unsigned pack_width);
    std::vector<u64> recv_elems(int from, u16 t, std::size_t count, unsigned pack_width);
    void send_bytes(int to, u16 t, std::vector<u8> payload);
    std::vector<u8> recv_bytes(int from, u16 t);

  private:
    u64 bump(u64& ctr, u64 n) {
        u64 base = ctr;
        ctr += n;
        return base;
    }
    void mark_round();
    void send_payload(int to, u16 t, std::vector<u8> payload, bool count_as_setup = false);
    std::vector<u8> recv_payload(int from, u16 t, bool count_as_setup = false);

    int party_;
    Net& net_;
    CommStats& stats_;
    Phase phase_ = Phase::Offline;
    bool online_seen_ = false;

    Seed next_seed_{};
    Seed prev_seed_{};
    Seed dealer_seed_{};

    u64 table_idx_ = 0;
    u64 zero_idx_ = 0;
    u64 reshare_idx_ = 0;
    u64 weight_idx_ = 0;
    u64 input_idx_ = 0;
};

}  // namespace qmpc
