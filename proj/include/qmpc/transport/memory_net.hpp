#pragma once

#include <array>
#include <condition_variable>
#include <memory>
#include <mutex>

#include "qmpc/transport/net.hpp"

namespace qmpc {

// In-process transport: three endpoints over mutex-protected queues.
// An observer hook sees every frame (used by the reveal-allowlist audit).
class MemoryHub {
  public:
    using Observer = std::function<void(int from, int to, const Frame&)>;

    void set_observer(Observer obs) { observer_ = std::move(obs); }

    void deliver(int from, int to, Frame f) {
        {
            std::lock_guard<std::mutex> lk(mu_);
            if (poisoned_) throw TransportError("transport shut down");
            if (observer_) observer_(from, to, f);
            inbox_[from][to].push(std::move(f));
        }
        cv_.notify_all();
    }

    Frame fetch(int from, int to, u16 tag) {
        std::unique_lock<std::mutex> lk(mu_);
        Frame out;
        for (;;) {
            if (inbox_[from][to].try_pop(tag, out)) return out;
            if (poisoned_) throw TransportError("transport shut down while waiting for message");
            cv_.wait(lk);
        }
    }

    void poison() noexcept {
        {
            std::lock_guard<std::mutex> lk(mu_);
            poisoned_ = true;
        }
        cv_.notify_all();
    }

  private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::array<std::array<LinkInbox, 3>, 3> inbox_;  // [from][to]
    Observer observer_;
    bool poisoned_ = false;
};

class MemoryNet : public Net {
  public:
    MemoryNet(std::shared_ptr<MemoryHub> hub, int party) : hub_(std::move(hub)), party_(party) {}

    int party() const override { return party_; }

    void send(int to, u16 tag, std::vector<u8> payload) override {
        Frame f;
        f.session = 1;
        f.tag = tag;
        f.seq = seq_[to]++;
        f.payload = std::move(payload);
        hub_->deliver(party_, to, std::move(f));
    }

    Frame recv(int from, u16 tag) override { return hub_->fetch(from, party_, tag); }

    void shutdown() noexcept override { hub_->poison(); }

  private:
    std::shared_ptr<MemoryHub> hub_;
    int party_;
    std::array<u32, 3> seq_{};
};

}  // namespace qmpc
