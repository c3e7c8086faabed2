#pragma once

#include "qmpc/kernels/kernels.hpp"

namespace qmpc::kernels::detail {

inline void shift_share_one(const ShiftShareJob& j) {
    u64 out_mask = ring_mask(j.out_width);
    if (j.wb == 0) {
        u64 idx_mask = ring_mask(j.wa);
        std::size_t size = std::size_t(1) << j.wa;
        for (std::size_t e = 0; e < size; ++e)
            j.c[e] = (j.plain[(e + j.da) & idx_mask] - j.r[e]) & out_mask;
    } else {
        u64 a_mask = ring_mask(j.wa), b_mask = ring_mask(j.wb);
        std::size_t blk = std::size_t(1) << j.wb;
        std::size_t blocks = std::size_t(1) << j.wa;
        for (std::size_t bi = 0; bi < blocks; ++bi) {
            std::size_t src_blk = ((bi + j.da) & a_mask) << j.wb;
            std::size_t dst_blk = bi << j.wb;
            for (std::size_t e = 0; e < blk; ++e) {
                std::size_t idx = dst_blk + e;
                j.c[idx] = (j.plain[src_blk + ((e + j.db) & b_mask)] - j.r[idx]) & out_mask;
            }
        }
    }
}

}  // namespace qmpc::kernels::detail
