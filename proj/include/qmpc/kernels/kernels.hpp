#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qmpc/core/ring.hpp"

namespace qmpc::kernels {

// Data-parallel inner loops, each in two builds: a plain serial reference and
// an OpenMP version. The dispatching entry points pick the OpenMP build when
// enabled; tests pin the two against each other and bench/ compares timings.

bool parallel_enabled();
void set_parallel(bool on);

// Local bilinear term of the RSS inner product, batched as a matmul:
//   z[i*n+j] = sum_t lp[i*k+t]*rn[t*n+j] + ln[i*k+t]*rp[t*n+j] + ln[i*k+t]*rn[t*n+j]
// where (ln, lp) are this party's (next, prev) components of the left operand.
void bilinear_matmul_serial(const u64* ln, const u64* lp, const u64* rn, const u64* rp,
                            u64* z, std::size_t m, std::size_t k, std::size_t n, u64 mask);
void bilinear_matmul_omp(const u64* ln, const u64* lp, const u64* rn, const u64* rp,
                         u64* z, std::size_t m, std::size_t k, std::size_t n, u64 mask);
void bilinear_matmul(const u64* ln, const u64* lp, const u64* rn, const u64* rp,
                     u64* z, std::size_t m, std::size_t k, std::size_t n, u64 mask);

// Row-wise variant: out[r] = bilinear dot of lhs row r against rhs row r.
void bilinear_dot_rows_serial(const u64* ln, const u64* lp, const u64* rn, const u64* rp,
                              u64* out, std::size_t rows, std::size_t len, u64 mask);
void bilinear_dot_rows_omp(const u64* ln, const u64* lp, const u64* rn, const u64* rp,
                           u64* out, std::size_t rows, std::size_t len, u64 mask);
void bilinear_dot_rows(const u64* ln, const u64* lp, const u64* rn, const u64* rp,
                       u64* out, std::size_t rows, std::size_t len, u64 mask);

// Plain integer matmul over Z_{2^w} for the oracle: c[i*n+j] = sum_t a[i*k+t]*b[t*n+j].
void ring_matmul_serial(const u64* a, const u64* b, u64* c, std::size_t m, std::size_t k,
                        std::size_t n, u64 mask);
void ring_matmul_omp(const u64* a, const u64* b, u64* c, std::size_t m, std::size_t k,
                     std::size_t n, u64 mask);
void ring_matmul(const u64* a, const u64* b, u64* c, std::size_t m, std::size_t k,
                 std::size_t n, u64 mask);

// Dealer-side table preparation. For each job, writes the rotated table minus
// the pseudorandom component: c[e] = plain[perm(e)] - r[e], where perm applies
// the block rotation da on the high slot and db on the low slot (wb = 0 means
// a single-input table rotated by da).
struct ShiftShareJob {
    const u64* plain = nullptr;
    const u64* r = nullptr;
    u64* c = nullptr;
    unsigned wa = 0;
    unsigned wb = 0;
    unsigned out_width = 0;
    u64 da = 0;
    u64 db = 0;
};

void shift_share_tables_serial(std::span<const ShiftShareJob> jobs);
void shift_share_tables_omp(std::span<const ShiftShareJob> jobs);
void shift_share_tables(std::span<const ShiftShareJob> jobs);

}  // namespace qmpc::kernels
