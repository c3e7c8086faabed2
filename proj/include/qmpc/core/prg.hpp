#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qmpc/core/ring.hpp"

namespace qmpc {

// Seeded randomness: ChaCha20 in counter mode. A Seed plus a (purpose, index)
// pair names an independent stream, so two holders of the same seed can expand
// identical randomness in any order, and parallel generators never collide as
// long as they use distinct (purpose, index) pairs.

using Seed = std::array<u8, 32>;

// Stream purposes. Offline and online material draw from disjoint streams.
enum class Purpose : u16 {
    SeedDerive = 1,
    TableEntry = 2,   // P0-P1 shared: pseudorandom table-entry components
    TableOffset = 3,  // P0-P1 shared: pseudorandom offset components
    DealerOffset = 4, // P0 private: the rotation offsets themselves
    ZeroShare = 5,    // pairwise: 3-party zero sharings
    Reshare = 6,      // pairwise: RSS components minted during resharing
    Weight = 7,       // pairwise: RSS components of dealer-shared weights
    Input = 8,        // P1-P2 shared: 2PC sharing of the data owner's input
    Model = 9,        // toy-model generation
    Test = 100,
};

Seed derive_root_seed(u64 master);
Seed derive_subseed(const Seed& parent, const std::string& label);
u64 seed_fingerprint(const Seed& s);

class Prg {
  public:
    Prg(const Seed& seed, Purpose purpose, u64 index);

    void fill_bytes(std::span<u8> out);

    // Draw one element uniform over Z_{2^width} (consumes ceil(width/8) bytes).
    u64 next(unsigned width);

    void fill(std::span<u64> out, unsigned width);

    std::vector<u64> draw(std::size_t count, unsigned width);

  private:
    void refill();

    Seed key_;
    std::array<u8, 8> nonce_;
    u64 chunk_ = 0;
    std::array<u8, 4096> buf_;
    std::size_t pos_ = sizeof(buf_);
};

}  // namespace qmpc
