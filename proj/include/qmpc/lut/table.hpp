#pragma once

#include <cmath>
#include <vector>

#include "qmpc/core/ring.hpp"
#include "qmpc/errors.hpp"

namespace qmpc {

// Table kinds, used to detect bundle/config mismatches at consumption time.
enum class TableKind : u16 {
    Generic = 0,
    ConvertZeroExt = 1,
    ConvertSignExt = 2,
    Relu = 3,
    Max = 4,
    Exp = 5,
    DivSoftmax = 6,
    DivLayerNorm = 7,
};

// A plaintext lookup table: out = entries[a * 2^wb + b] for a two-slot table,
// or entries[a] when wb == 0. Slots are at most 8 bits each.
struct PlainTable {
    TableKind kind = TableKind::Generic;
    unsigned wa = 0;
    unsigned wb = 0;
    unsigned out_width = 0;
    std::vector<u64> entries;

    std::size_t size() const { return std::size_t(1) << (wa + wb); }

    u64 apply(u64 a) const { return entries[a & ring_mask(wa)]; }
    u64 apply2(u64 a, u64 b) const {
        return entries[((a & ring_mask(wa)) << wb) | (b & ring_mask(wb))];
    }
};

inline PlainTable make_table(TableKind kind, unsigned wa, unsigned wb, unsigned out_width) {
    if (wa < 1 || wa > 8 || wb > 8) throw DomainError("table slot width must be in [1,8]");
    PlainTable t;
    t.kind = kind;
    t.wa = wa;
    t.wb = wb;
    t.out_width = out_width;
    t.entries.assign(std::size_t(1) << (wa + wb), 0);
    return t;
}

inline i64 clip_i64(i64 v, i64 lo, i64 hi) { return v < lo ? lo : (v > hi ? hi : v); }

// --- builders ---------------------------------------------------------------
// These are the single source of truth for table contents: the dealer shares
// them and the plaintext oracle applies them directly.

// T(i) = i, zero-extended into the wider ring.
inline PlainTable zero_extend_table(unsigned w_in, unsigned w_out) {
    PlainTable t = make_table(TableKind::ConvertZeroExt, w_in, 0, w_out);
    for (u64 i = 0; i < t.size(); ++i) t.entries[i] = i;
    return t;
}

// T(i) = sign-extension of the w_in-bit two's-complement value i.
inline PlainTable sign_extend_table(unsigned w_in, unsigned w_out) {
    PlainTable t = make_table(TableKind::ConvertSignExt, w_in, 0, w_out);
    for (u64 i = 0; i < t.size(); ++i)
        t.entries[i] = encode_signed_raw(decode_signed(i, w_in), w_out);
    return t;
}

// T(i) = max(signed(i), 0) embedded in the output ring.
inline PlainTable relu_table(unsigned w_in, unsigned w_out) {
    PlainTable t = make_table(TableKind::Relu, w_in, 0, w_out);
    for (u64 i = 0; i < t.size(); ++i) {
        i64 v = decode_signed(i, w_in);
        t.entries[i] = static_cast<u64>(v > 0 ? v : 0);
    }
    return t;
}

// T(a||b) = max(a, b) over the unsigned w-bit domain.
inline PlainTable max_table(unsigned w) {
    PlainTable t = make_table(TableKind::Max, w, w, w);
    for (u64 a = 0; a < (1ull << w); ++a)
        for (u64 b = 0; b < (1ull << w); ++b)
            t.entries[(a << w) | b] = a > b ? a : b;
    return t;
}

// Softmax exponent table, 4-bit in / 8-bit out. The input is the ring
// representative of x_i - x_o in Z_16: 0 means "equal to the maximum"
// (e^0 scaled to 15 to stay in 4 bits), d >= 1 means x_i - x_o = d - 16.
// The valid value sits in the low 4 bits of the 8-bit output.
inline PlainTable exp_table(double s_x) {
    PlainTable t = make_table(TableKind::Exp, 4, 0, 8);
    t.entries[0] = 15;
    for (u64 d = 1; d < 16; ++d) {
        double e = std::exp(s_x * (static_cast<double>(d) - 16.0));
        t.entries[d] = static_cast<u64>(clip_i64(static_cast<i64>(std::floor(16.0 * e)), 0, 15));
    }
    return t;
}

// Softmax division table. First slot: 4-bit numerator u. Second slot: the full
// 8-bit denominator sum D; the kappa-offset middle-4-bit slice happens inside
// the table, so the protocol value matches the plaintext slice exactly.
// v = floor(D / 2^kappa) mod 16; v = 0 saturates to 15 (the table must be total).
inline PlainTable softmax_div_table(unsigned kappa) {
    if (kappa > 4) throw DomainError("kappa must be in [0,4]");
    PlainTable t = make_table(TableKind::DivSoftmax, 4, 8, 4);
    for (u64 u = 0; u < 16; ++u)
        for (u64 d = 0; d < 256; ++d) {
            u64 v = (d >> kappa) & 15;
            u64 q = v == 0 ? 15
                           : static_cast<u64>(clip_i64(
                                 static_cast<i64>((16 * u) / ((1ull << kappa) * v)), 0, 15));
            t.entries[(u << 8) | d] = q;
        }
    return t;
}

// The 4x4 division table as a standalone primitive (numerator u, pre-sliced
// denominator v): T(u||v) = clip(floor(2^4*u / (2^kappa*v)), 0, 15), v=0 -> 15.
inline PlainTable div_table_4x4(unsigned kappa) {
    if (kappa > 4) throw DomainError("kappa must be in [0,4]");
    PlainTable t = make_table(TableKind::Generic, 4, 4, 4);
    for (u64 u = 0; u < 16; ++u)
        for (u64 v = 0; v < 16; ++v)
            t.entries[(u << 4) | v] =
                v == 0 ? 15
                       : static_cast<u64>(clip_i64(
                             static_cast<i64>((16 * u) / ((1ull << kappa) * v)), 0, 15));
    return t;
}

// Per-channel LayerNorm output table. First slot u: signed 4-bit half of the
// centered value (the real centered value is 2*u*s_in; the halving keeps the
// 5-bit difference in 4 bits). Second slot v: unsigned 4-bit variance.
inline PlainTable layernorm_table(double gamma, double beta, double eps, double s_in,
                                  double s_var, double s_out) {
    PlainTable t = make_table(TableKind::DivLayerNorm, 4, 4, 4);
    for (u64 u = 0; u < 16; ++u)
        for (u64 v = 0; v < 16; ++v) {
            double centered = 2.0 * static_cast<double>(decode_signed(u, 4)) * s_in;
            double denom = std::sqrt(static_cast<double>(v) * s_var + eps);
            double ln = gamma * centered / denom + beta;
            i64 q = clip_i64(static_cast<i64>(std::floor(ln / s_out)), -8, 7);
            t.entries[(u << 4) | v] = encode_signed_raw(q, 4);
        }
    return t;
}

}  // namespace qmpc
