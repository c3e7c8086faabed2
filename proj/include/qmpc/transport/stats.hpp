#pragma once

#include <array>
#include <atomic>
#include <map>
#include <string>

#include "qmpc/core/ring.hpp"

namespace qmpc {

enum class Phase : int { Offline = 0, Online = 1 };

inline const char* phase_name(Phase p) { return p == Phase::Offline ? "offline" : "online"; }

// Communication accounting. Byte counters measure protocol payload only;
// frame headers are tracked separately and excluded from cost assertions.
// Rounds and opened-element counts are recorded once per collective step,
// by party 1 (every online collective includes P1), so that per-party
// snapshots from a multi-process run merge by plain summation.
struct StatsSnapshot {
    std::array<std::array<std::array<u64, 3>, 3>, 2> bytes{};  // [phase][from][to]
    std::array<std::array<std::array<u64, 3>, 3>, 2> msgs{};
    std::array<u64, 2> header_bytes{};
    std::array<u64, 2> rounds{};
    std::array<u64, 2> opened{};

    u64 total_bytes(Phase p) const {
        u64 t = 0;
        for (int f = 0; f < 3; ++f)
            for (int to = 0; to < 3; ++to) t += bytes[int(p)][f][to];
        return t;
    }

    u64 from_party_bytes(Phase p, int from) const {
        u64 t = 0;
        for (int to = 0; to < 3; ++to) t += bytes[int(p)][from][to];
        return t;
    }

    StatsSnapshot& merge(const StatsSnapshot& o) {
        for (int p = 0; p < 2; ++p) {
            for (int f = 0; f < 3; ++f)
                for (int t = 0; t < 3; ++t) {
                    bytes[p][f][t] += o.bytes[p][f][t];
                    msgs[p][f][t] += o.msgs[p][f][t];
                }
            header_bytes[p] += o.header_bytes[p];
            rounds[p] += o.rounds[p];
            opened[p] += o.opened[p];
        }
        return *this;
    }

    bool operator==(const StatsSnapshot&) const = default;

    // key=value lines, stable ordering, parseable by the bench/test harness.
    std::string report() const;
    static StatsSnapshot parse_report(const std::string& text);
};

class CommStats {
  public:
    void add_message(Phase p, int from, int to, u64 payload_bytes, u64 header) {
        bytes_[int(p)][from][to].fetch_add(payload_bytes, std::memory_order_relaxed);
        msgs_[int(p)][from][to].fetch_add(1, std::memory_order_relaxed);
        header_[int(p)].fetch_add(header, std::memory_order_relaxed);
    }
    void add_round(Phase p) { rounds_[int(p)].fetch_add(1, std::memory_order_relaxed); }
    void add_opened(Phase p, u64 n) { opened_[int(p)].fetch_add(n, std::memory_order_relaxed); }

    StatsSnapshot snapshot() const {
        StatsSnapshot s;
        for (int p = 0; p < 2; ++p) {
            for (int f = 0; f < 3; ++f)
                for (int t = 0; t < 3; ++t) {
                    s.bytes[p][f][t] = bytes_[p][f][t].load();
                    s.msgs[p][f][t] = msgs_[p][f][t].load();
                }
            s.header_bytes[p] = header_[p].load();
            s.rounds[p] = rounds_[p].load();
            s.opened[p] = opened_[p].load();
        }
        return s;
    }

  private:
    std::atomic<u64> bytes_[2][3][3] = {};
    std::atomic<u64> msgs_[2][3][3] = {};
    std::atomic<u64> header_[2] = {};
    std::atomic<u64> rounds_[2] = {};
    std::atomic<u64> opened_[2] = {};
};

}  // namespace qmpc
