#pragma once

#include <array>
#include <vector>

#include "qmpc/core/ring.hpp"
#include "qmpc/errors.hpp"

namespace qmpc {

// Per-party batch views of shared vectors. Protocols operate on these; the
// scalar types in core/shares.hpp define the algebra they must satisfy.

// 2PC additive sharing held by P1/P2; P0 carries an empty component vector.
struct Share2Vec {
    unsigned width = 0;
    std::vector<u64> comp;

    std::size_t size() const { return comp.size(); }
};

// Replicated sharing: party i holds components (<x>_{i+1}, <x>_{i-1}).
struct RssVec {
    unsigned width = 0;
    std::vector<u64> next;
    std::vector<u64> prev;

    std::size_t size() const { return next.size(); }
};

// Test-side reconstruction from all three party views.
inline std::vector<u64> reconstruct2(const std::array<Share2Vec, 3>& v) {
    if (v[1].width != v[2].width || v[1].comp.size() != v[2].comp.size())
        throw StructuralError("reconstruct2: mismatched party views");
    u64 m = ring_mask(v[1].width);
    std::vector<u64> out(v[1].comp.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (v[1].comp[i] + v[2].comp[i]) & m;
    return out;
}

inline std::vector<u64> reconstruct3(const std::array<RssVec, 3>& v) {
    u64 m = ring_mask(v[0].width);
    std::size_t n = v[0].next.size();
    for (const auto& pv : v)
        if (pv.next.size() != n || pv.prev.size() != n)
            throw StructuralError("reconstruct3: mismatched party views");
    std::vector<u64> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        // <x>_1 = P0.next = P2.prev, <x>_2 = P0.prev = P1.next, <x>_0 = P1.prev = P2.next
        if (v[0].next[i] != v[2].prev[i] || v[0].prev[i] != v[1].next[i] ||
            v[1].prev[i] != v[2].next[i])
            throw IntegrityError("reconstruct3: replicated components disagree");
        out[i] = (v[0].next[i] + v[0].prev[i] + v[1].prev[i]) & m;
    }
    return out;
}

}  // namespace qmpc
