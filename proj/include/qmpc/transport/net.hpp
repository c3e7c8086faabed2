#pragma once

#include <cstring>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "qmpc/core/ring.hpp"
#include "qmpc/errors.hpp"

namespace qmpc {

// Protocol-op tags. The transport delivers FIFO per (link, tag); the blinding
// audit in tests whitelists which tags may ever appear online.
namespace tag {
constexpr u16 Hello = 0x0001;
constexpr u16 TableData = 0x0010;    // offline: dealer-distributed table shares
constexpr u16 WeightData = 0x0011;   // offline: dealer-shared model weights
constexpr u16 OpenDelta = 0x0020;    // online: blinded LUT indices
constexpr u16 ReshareDelta = 0x0021; // online: RSS reshare deltas
constexpr u16 Y0 = 0x0022;           // online: Algorithm-3 masked inner-product component
constexpr u16 OutputReveal = 0x0023; // online: final output opening (explicit reveal)
}  // namespace tag

// Wire format: little-endian length prefix (u32, counts header+payload) then
// an 8-byte header: session (2B) | tag (2B) | sequence (4B), then payload.
constexpr std::size_t kFrameHeaderBytes = 8;

struct Frame {
    u16 session = 0;
    u16 tag = 0;
    u32 seq = 0;
    std::vector<u8> payload;
};

inline std::vector<u8> encode_frame(const Frame& f) {
    std::vector<u8> out(4 + kFrameHeaderBytes + f.payload.size());
    u32 len = static_cast<u32>(kFrameHeaderBytes + f.payload.size());
    std::memcpy(out.data(), &len, 4);
    std::memcpy(out.data() + 4, &f.session, 2);
    std::memcpy(out.data() + 6, &f.tag, 2);
    std::memcpy(out.data() + 8, &f.seq, 4);
    std::memcpy(out.data() + 12, f.payload.data(), f.payload.size());
    return out;
}

// Per-link receive queue with a bounded tag-reordering window.
class LinkInbox {
  public:
    static constexpr std::size_t kWindow = 64;

    void push(Frame f) { q_.push_back(std::move(f)); }

    bool try_pop(u16 tag, Frame& out) {
        std::size_t scanned = 0;
        for (auto it = q_.begin(); it != q_.end(); ++it, ++scanned) {
            if (scanned >= kWindow)
                throw DesyncError("tag " + std::to_string(tag) +
                                  " not found within reordering window");
            if (it->tag == tag) {
                out = std::move(*it);
                q_.erase(it);
                return true;
            }
        }
        return false;
    }

    std::size_t size() const { return q_.size(); }

  private:
    std::deque<Frame> q_;
};

// Transport endpoint for one party. Implementations guarantee per-link FIFO.
class Net {
  public:
    virtual ~Net() = default;
    virtual int party() const = 0;
    virtual void send(int to, u16 tag, std::vector<u8> payload) = 0;
    virtual Frame recv(int from, u16 tag) = 0;
    virtual void shutdown() noexcept = 0;
};

}  // namespace qmpc
