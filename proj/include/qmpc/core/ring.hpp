#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qmpc/errors.hpp"

namespace qmpc {

using u8 = std::uint8_t;
using u16 = std::uint16_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

// All arithmetic lives in Z_{2^w}, 1 <= w <= 64, reduced by masking.
constexpr u64 ring_mask(unsigned width) {
    return width >= 64 ? ~0ull : ((1ull << width) - 1ull);
}

inline void check_width(unsigned width) {
    if (width < 1 || width > 64) throw DomainError("ring width must be in [1,64]");
}

// A ring element that carries its own width. Arithmetic between elements of
// different widths is a structural error; protocols that mix widths must
// convert explicitly.
struct RingElement {
    u64 value = 0;
    unsigned width = 64;

    RingElement() = default;
    RingElement(u64 v, unsigned w) : value(v & ring_mask(w)), width(w) { check_width(w); }

    bool operator==(const RingElement&) const = default;
};

inline void require_same_width(const RingElement& a, const RingElement& b) {
    if (a.width != b.width)
        throw StructuralError("ring width mismatch: " + std::to_string(a.width) + " vs " +
                              std::to_string(b.width));
}

inline RingElement ring_add(const RingElement& a, const RingElement& b) {
    require_same_width(a, b);
    return {a.value + b.value, a.width};
}

inline RingElement ring_sub(const RingElement& a, const RingElement& b) {
    require_same_width(a, b);
    return {a.value - b.value, a.width};
}

inline RingElement ring_mul(const RingElement& a, const RingElement& b) {
    require_same_width(a, b);
    return {a.value * b.value, a.width};
}

inline RingElement ring_const_mul(u64 c, const RingElement& a) {
    return {c * a.value, a.width};
}

inline RingElement ring_neg(const RingElement& a) { return {0 - a.value, a.width}; }

// Signed encoding: x in [-2^{w-1}, 2^{w-1}) maps to x mod 2^w.
inline RingElement encode_signed(i64 v, unsigned width) {
    check_width(width);
    i64 lo = width == 64 ? INT64_MIN : -(i64(1) << (width - 1));
    i64 hi = width == 64 ? INT64_MAX : (i64(1) << (width - 1)) - 1;
    if (v < lo || v > hi)
        throw DomainError("value " + std::to_string(v) + " out of signed range for width " +
                          std::to_string(width));
    return {static_cast<u64>(v), width};
}

inline i64 decode_signed(const RingElement& e) {
    if (e.width == 64) return static_cast<i64>(e.value);
    u64 sign_bit = 1ull << (e.width - 1);
    if (e.value & sign_bit) return static_cast<i64>(e.value | ~ring_mask(e.width));
    return static_cast<i64>(e.value);
}

inline i64 decode_signed(u64 v, unsigned width) { return decode_signed(RingElement{v, width}); }

inline u64 encode_signed_raw(i64 v, unsigned width) { return encode_signed(v, width).value; }

// trc(x, k): keep the top k bits, i.e. floor(x / 2^{w-k}) as a k-bit element.
inline RingElement trc(const RingElement& x, unsigned k) {
    if (k > x.width) throw DomainError("trc: k exceeds element width");
    if (k == 0) throw DomainError("trc: k must be positive");
    return {x.value >> (x.width - k), k};
}

inline u64 trc_raw(u64 v, unsigned width, unsigned k) { return trc(RingElement{v, width}, k).value; }

// --- bit packing -----------------------------------------------------------
//
// Vectors of w-bit elements pack into a little-endian bitstream: element i
// occupies bits [i*w, (i+1)*w), bit b of the stream is byte b>>3, bit b&7.
// This is the wire layout for opened values (4-bit values pack two per byte).

inline std::size_t packed_size(std::size_t count, unsigned width) {
    return (count * width + 7) / 8;
}

inline std::vector<u8> pack_bits(std::span<const u64> vals, unsigned width) {
    check_width(width);
    std::vector<u8> out(packed_size(vals.size(), width), 0);
    std::size_t bit = 0;
    for (u64 v : vals) {
        v &= ring_mask(width);
        unsigned done = 0;
        while (done < width) {
            std::size_t byte = bit >> 3;
            unsigned off = bit & 7;
            unsigned take = std::min<unsigned>(8 - off, width - done);
            out[byte] |= static_cast<u8>(((v >> done) & ring_mask(take)) << off);
            done += take;
            bit += take;
        }
    }
    return out;
}

inline std::vector<u64> unpack_bits(std::span<const u8> bytes, unsigned width, std::size_t count) {
    check_width(width);
    if (bytes.size() < packed_size(count, width))
        throw StructuralError("unpack_bits: buffer too short for declared element count");
    std::vector<u64> out(count, 0);
    std::size_t bit = 0;
    for (std::size_t i = 0; i < count; ++i) {
        u64 v = 0;
        unsigned done = 0;
        while (done < width) {
            std::size_t byte = bit >> 3;
            unsigned off = bit & 7;
            unsigned take = std::min<unsigned>(8 - off, width - done);
            v |= ((static_cast<u64>(bytes[byte]) >> off) & ring_mask(take)) << done;
            done += take;
            bit += take;
        }
        out[i] = v;
    }
    return out;
}

}  // namespace qmpc
