#include <atomic>
#include <cstdint>

#include "qmpc/kernels/kernels.hpp"
#include "shift_detail.hpp"

namespace qmpc::kernels {

namespace {
#ifdef _OPENMP
std::atomic<bool> g_parallel{true};
#else
std::atomic<bool> g_parallel{false};
#endif
}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void set_parallel(bool on) {
#ifndef _OPENMP
    on = false;
#endif
    g_parallel.store(on, std::memory_order_relaxed);
}

void bilinear_matmul_omp(const u64* ln, const u64* lp, const u64* rn, const u64* rp,
                         u64* z, std::size_t m, std::size_t k, std::size_t n, u64 mask) {
    std::int64_t total = static_cast<std::int64_t>(m * n);
#pragma omp parallel for schedule(static)
    for (std::int64_t cell = 0; cell < total; ++cell) {
        std::size_t i = static_cast<std::size_t>(cell) / n;
        std::size_t j = static_cast<std::size_t>(cell) % n;
        u64 acc = 0;
        for (std::size_t t = 0; t < k; ++t) {
            u64 a_n = ln[i * k + t], a_p = lp[i * k + t];
            u64 b_n = rn[t * n + j], b_p = rp[t * n + j];
            acc += a_p * b_n + a_n * b_p + a_n * b_n;
        }
        z[cell] = acc & mask;
    }
}

void bilinear_dot_rows_omp(const u64* ln, const u64* lp, const u64* rn, const u64* rp,
                           u64* out, std::size_t rows, std::size_t len, u64 mask) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
        u64 acc = 0;
        const u64* an = ln + r * len;
        const u64* ap = lp + r * len;
        const u64* bn = rn + r * len;
        const u64* bp = rp + r * len;
        for (std::size_t t = 0; t < len; ++t)
            acc += ap[t] * bn[t] + an[t] * bp[t] + an[t] * bn[t];
        out[r] = acc & mask;
    }
}

void ring_matmul_omp(const u64* a, const u64* b, u64* c, std::size_t m, std::size_t k,
                     std::size_t n, u64 mask) {
    std::int64_t total = static_cast<std::int64_t>(m * n);
#pragma omp parallel for schedule(static)
    for (std::int64_t cell = 0; cell < total; ++cell) {
        std::size_t i = static_cast<std::size_t>(cell) / n;
        std::size_t j = static_cast<std::size_t>(cell) % n;
        u64 acc = 0;
        for (std::size_t t = 0; t < k; ++t) acc += a[i * k + t] * b[t * n + j];
        c[cell] = acc & mask;
    }
}

void shift_share_tables_omp(std::span<const ShiftShareJob> jobs) {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(jobs.size()); ++i)
        detail::shift_share_one(jobs[i]);
}

void bilinear_matmul(const u64* ln, const u64* lp, const u64* rn, const u64* rp, u64* z,
                     std::size_t m, std::size_t k, std::size_t n, u64 mask) {
    if (parallel_enabled())
        bilinear_matmul_omp(ln, lp, rn, rp, z, m, k, n, mask);
    else
        bilinear_matmul_serial(ln, lp, rn, rp, z, m, k, n, mask);
}

void bilinear_dot_rows(const u64* ln, const u64* lp, const u64* rn, const u64* rp, u64* out,
                       std::size_t rows, std::size_t len, u64 mask) {
    if (parallel_enabled())
        bilinear_dot_rows_omp(ln, lp, rn, rp, out, rows, len, mask);
    else
        bilinear_dot_rows_serial(ln, lp, rn, rp, out, rows, len, mask);
}

void ring_matmul(const u64* a, const u64* b, u64* c, std::size_t m, std::size_t k, std::size_t n,
                 u64 mask) {
    if (parallel_enabled())
        ring_matmul_omp(a, b, c, m, k, n, mask);
    else
        ring_matmul_serial(a, b, c, m, k, n, mask);
}

void shift_share_tables(std::span<const ShiftShareJob> jobs) {
    if (parallel_enabled())
        shift_share_tables_omp(jobs);
    else
        shift_share_tables_serial(jobs);
}

}  // namespace qmpc::kernels
