#pragma once

#include <array>
#include <utility>

#include "qmpc/core/prg.hpp"
#include "qmpc/core/ring.hpp"
#include "qmpc/errors.hpp"

namespace qmpc {

// Dealer-side (math-level) secret sharing. Network distribution of shares is
// the transport/session layer's job; these functions only define the algebra
// and are what unit tests and the dealer use directly.

// One party's component of a 2-of-2 additive sharing. owner is 1 or 2.
struct AdditiveShare {
    RingElement component;
    int owner = 0;
};

// One party's pair of components of a 3-party replicated sharing.
// Party i holds (comp_{i+1}, comp_{i-1}), indices mod 3.
struct RssShare {
    RingElement next_comp;  // <x>_{i+1}
    RingElement prev_comp;  // <x>_{i-1}
    int owner = 0;
};

// share2 with an explicit P1 component; the general form draws it from a Prg.
inline std::pair<AdditiveShare, AdditiveShare> share2_with(const RingElement& x, u64 r1) {
    RingElement c1{r1, x.width};
    RingElement c2 = ring_sub(x, c1);
    return {AdditiveShare{c1, 1}, AdditiveShare{c2, 2}};
}

inline std::pair<AdditiveShare, AdditiveShare> share2(const RingElement& x, Prg& prg) {
    return share2_with(x, prg.next(x.width));
}

inline RingElement reveal2(const AdditiveShare& a, const AdditiveShare& b) {
    if (a.owner == b.owner) throw StructuralError("reveal2: duplicate share owner");
    return ring_add(a.component, b.component);
}

inline std::array<RssShare, 3> share3(const RingElement& x, Prg& prg) {
    RingElement c1{prg.next(x.width), x.width};
    RingElement c2{prg.next(x.width), x.width};
    RingElement c0 = ring_sub(ring_sub(x, c1), c2);
    // components (c0, c1, c2); party i holds (c_{i+1}, c_{i-1})
    return {RssShare{c1, c2, 0}, RssShare{c2, c0, 1}, RssShare{c0, c1, 2}};
}

// Reveals x and checks replication consistency: each component is held by two
// parties and the copies must agree. A mismatch signals a protocol bug.
inline RingElement reveal3(const std::array<RssShare, 3>& s) {
    for (int i = 0; i < 3; ++i)
        if (s[i].owner != i) throw StructuralError("reveal3: shares out of party order");
    // <x>_1 = P0.next = P2.prev, <x>_2 = P0.prev = P1.next, <x>_0 = P1.prev = P2.next
    if (s[0].next_comp != s[2].prev_comp || s[0].prev_comp != s[1].next_comp ||
        s[1].prev_comp != s[2].next_comp)
        throw IntegrityError("reveal3: replicated components disagree");
    return ring_add(ring_add(s[1].prev_comp, s[0].next_comp), s[0].prev_comp);
}

// Local linear algebra on shares (zero communication).
inline AdditiveShare share_add(const AdditiveShare& a, const AdditiveShare& b) {
    if (a.owner != b.owner) throw StructuralError("share_add: owner mismatch");
    return {ring_add(a.component, b.component), a.owner};
}

inline AdditiveShare share_sub(const AdditiveShare& a, const AdditiveShare& b) {
    if (a.owner != b.owner) throw StructuralError("share_sub: owner mismatch");
    return {ring_sub(a.component, b.component), a.owner};
}

inline AdditiveShare share_scale(u64 c, const AdditiveShare& a) {
    return {ring_const_mul(c, a.component), a.owner};
}

inline RssShare rss_add(const RssShare& a, const RssShare& b) {
    if (a.owner != b.owner) throw StructuralError("rss_add: owner mismatch");
    return {ring_add(a.next_comp, b.next_comp), ring_add(a.prev_comp, b.prev_comp), a.owner};
}

inline RssShare rss_sub(const RssShare& a, const RssShare& b) {
    if (a.owner != b.owner) throw StructuralError("rss_sub: owner mismatch");
    return {ring_sub(a.next_comp, b.next_comp), ring_sub(a.prev_comp, b.prev_comp), a.owner};
}

inline RssShare rss_scale(u64 c, const RssShare& a) {
    return {ring_const_mul(c, a.next_comp), ring_const_mul(c, a.prev_comp), a.owner};
}

}  // namespace qmpc
