#pragma once

#include <array>
#include <exception>
#include <functional>
#include <memory>
#include <thread>

#include "qmpc/layers/nonlinear.hpp"
#include "qmpc/transport/memory_net.hpp"
#include "qmpc/transport/session.hpp"

namespace qmpc::test {

// Runs the same SPMD program on three in-memory parties. Exceptions poison the
// hub (unblocking peers) and the first party's error is rethrown unless the
// caller asks for per-party errors.
template <class T>
struct Run3Result {
    std::array<T, 3> value;
    std::array<std::exception_ptr, 3> error;
    StatsSnapshot stats;
    std::shared_ptr<MemoryHub> hub;

    void rethrow() const {
        for (const auto& e : error)
            if (e) std::rethrow_exception(e);
    }
};

template <class F>
auto run3(F fn, u64 master_seed = 7,
          std::function<void(int, int, const Frame&)> observer = nullptr) {
    using T = decltype(fn(std::declval<Session&>()));
    auto hub = std::make_shared<MemoryHub>();
    if (observer) hub->set_observer(observer);
    auto stats = std::make_shared<CommStats>();
    Run3Result<T> res;
    res.hub = hub;
    std::array<std::thread, 3> threads;
    for (int p = 0; p < 3; ++p) {
        threads[p] = std::thread([&, p] {
            try {
                MemoryNet net(hub, p);
                Session s(p, master_seed, net, *stats);
                res.value[p] = fn(s);
            } catch (...) {
                res.error[p] = std::current_exception();
                hub->poison();
            }
        });
    }
    for (auto& t : threads) t.join();
    res.stats = stats->snapshot();
    return res;
}

// Generates tables on demand through the live session; the builder maps
// (meta, ordinal within this supply) to the dealer's plaintext table.
class LiveSupply : public TableSupply {
  public:
    using Builder = std::function<PlainTable(const TableMeta&, std::size_t ordinal)>;

    LiveSupply(Session& s, Builder b) : s_(s), builder_(std::move(b)) {}

    std::vector<ShiftedTable> take(const TableMeta& meta, std::size_t n) override {
        std::vector<PlainTable> plains;
        std::vector<GenSpec> specs(n);
        if (s_.party() == 0) {
            plains.reserve(n);
            for (std::size_t i = 0; i < n; ++i) plains.push_back(builder_(meta, ordinal_ + i));
        }
        for (std::size_t i = 0; i < n; ++i) {
            specs[i].meta = meta;
            if (s_.party() == 0) specs[i].plain = &plains[i];
        }
        ordinal_ += n;
        return gen_tables(s_, specs);
    }

    std::vector<TableGroup> take_groups(const TableMeta& meta, std::size_t groups,
                                        std::size_t members) override {
        std::vector<PlainTable> plains;
        std::vector<GroupSpec> specs(groups);
        if (s_.party() == 0) {
            plains.reserve(groups * members);
            for (std::size_t i = 0; i < groups * members; ++i)
                plains.push_back(builder_(meta, ordinal_ + i));
        }
        for (std::size_t g = 0; g < groups; ++g) {
            specs[g].members.resize(members);
            for (std::size_t i = 0; i < members; ++i) {
                specs[g].members[i].meta = meta;
                if (s_.party() == 0) specs[g].members[i].plain = &plains[g * members + i];
            }
        }
        ordinal_ += groups * members;
        return gen_table_groups(s_, specs);
    }

  private:
    Session& s_;
    Builder builder_;
    std::size_t ordinal_ = 0;
};

// Test-side RSS sharing of public test vectors: every party derives its view
// from the master seed without communication. Uses a dedicated index space so
// it never collides with session streams.
inline RssVec make_rss(int party, u64 master_seed, u64 counter, std::span<const u64> vals,
                       unsigned width) {
    Seed root = derive_root_seed(master_seed);
    Prg p1(root, Purpose::Test, 500000 + counter * 2);
    Prg p2(root, Purpose::Test, 500000 + counter * 2 + 1);
    u64 m = ring_mask(width);
    std::size_t n = vals.size();
    std::vector<u64> c1 = p1.draw(n, width), c2 = p2.draw(n, width), c0(n);
    for (std::size_t i = 0; i < n; ++i) c0[i] = (vals[i] - c1[i] - c2[i]) & m;
    RssVec out;
    out.width = width;
    // party i holds (<x>_{i+1}, <x>_{i-1})
    if (party == 0) {
        out.next = c1;
        out.prev = c2;
    } else if (party == 1) {
        out.next = c2;
        out.prev = c0;
    } else {
        out.next = c0;
        out.prev = c1;
    }
    return out;
}

}  // namespace qmpc::test
