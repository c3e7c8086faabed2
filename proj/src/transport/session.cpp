#include "qmpc/transport/session.hpp"

#include <cstring>

namespace qmpc {

namespace {
const char* pair_label(int a, int b) {
    // unordered pair -> label
    int lo = std::min(a, b), hi = std::max(a, b);
    if (lo == 0 && hi == 1) return "pair01";
    if (lo == 1 && hi == 2) return "pair12";
    return "pair02";
}
}  // namespace

Session::Session(int party, u64 master_seed, Net& net, CommStats& stats)
    : party_(party), net_(net), stats_(stats) {
    if (party < 0 || party > 2) throw ConfigError("party id must be 0, 1 or 2");
    Seed root = derive_root_seed(master_seed);
    int next = (party + 1) % 3;
    int prev = (party + 2) % 3;
    next_seed_ = derive_subseed(root, pair_label(party, next));
    prev_seed_ = derive_subseed(root, pair_label(party, prev));
    if (party == 0) dealer_seed_ = derive_subseed(root, "dealer0");
}

Prg Session::dealer_stream(Purpose p, u64 index) const {
    if (party_ != 0) throw StateError("dealer stream requested by non-dealer party");
    return Prg(dealer_seed_, p, index);
}

void Session::set_phase(Phase p) {
    if (p == Phase::Offline && online_seen_)
        throw StateError("cannot return to offline phase after online traffic began");
    if (p == Phase::Online) online_seen_ = true;
    phase_ = p;
}

void Session::mark_round() {
    if (party_ == 1) stats_.add_round(phase_);
}

void Session::mark_distribution_round() { mark_round(); }

void Session::send_payload(int to, u16 t, std::vector<u8> payload, bool count_as_setup) {
    if (count_as_setup) {
        stats_.add_message(phase_, party_, to, 0, 4 + kFrameHeaderBytes + payload.size());
        // setup frames (handshake) count as framing overhead, not protocol cost
    } else {
        stats_.add_message(phase_, party_, to, payload.size(), 4 + kFrameHeaderBytes);
    }
    net_.send(to, t, std::move(payload));
}

std::vector<u8> Session::recv_payload(int from, u16 t, bool) {
    Frame f = net_.recv(from, t);
    return std::move(f.payload);
}

void Session::handshake() {
    int next = (party_ + 1) % 3;
    int prev = (party_ + 2) % 3;
    u64 fp = seed_fingerprint(next_seed_);
    std::vector<u8> payload(8);
    std::memcpy(payload.data(), &fp, 8);
    send_payload(next, tag::Hello, std::move(payload), /*count_as_setup=*/true);
    auto got = recv_payload(prev, tag::Hello, true);
    if (got.size() != 8) throw TransportError("malformed hello frame");
    u64 theirs = 0;
    std::memcpy(&theirs, got.data(), 8);
    if (theirs != seed_fingerprint(prev_seed_))
        throw IntegrityError("pairwise seed fingerprints disagree between parties " +
                             std::to_string(prev) + " and " + std::to_string(party_));
}

std::vector<u64> Session::zero_share(std::size_t count, unsigned width) {
    u64 idx = alloc_zero();
    Prg a = next_stream(Purpose::ZeroShare, idx);
    Prg b = prev_stream(Purpose::ZeroShare, idx);
    u64 m = ring_mask(width);
    std::vector<u64> out(count);
    for (auto& v : out) v = (a.next(width) - b.next(width)) & m;
    return out;
}

void Session::send_elems(int to, u16 t, std::span<const u64> vals, unsigned pack_width) {
    send_payload(to, t, pack_bits(vals, pack_width));
}

std::vector<u64> Session::recv_elems(int from, u16 t, std::size_t count, unsigned pack_width) {
    auto payload = recv_payload(from, t);
    if (payload.size() != packed_size(count, pack_width))
        throw DesyncError("payload size " + std::to_string(payload.size()) +
                          " does not match declared element count");
    return unpack_bits(payload, pack_width, count);
}

void Session::send_bytes(int to, u16 t, std::vector<u8> payload) {
    send_payload(to, t, std::move(payload));
}

std::vector<u8> Session::recv_bytes(int from, u16 t) { return recv_payload(from, t); }

std::vector<std::vector<u64>> Session::open2_multi(std::span<const OpenStream> streams, u16 t) {
    mark_round();
    std::vector<std::vector<u64>> revealed;
    if (party_ == 0) return revealed;

    // One frame each direction: concatenated per-stream packed segments.
    std::vector<u8> payload;
    std::size_t total = 0;
    for (const auto& s : streams) {
        auto seg = pack_bits(s.share, s.width);
        payload.insert(payload.end(), seg.begin(), seg.end());
        total += s.share.size();
    }
    int peer = party_ == 1 ? 2 : 1;
    std::vector<u8> theirs;
    if (party_ == 1) {
        stats_.add_opened(phase_, total);
        send_payload(peer, t, std::move(payload));
        theirs = recv_payload(peer, t);
    } else {
        theirs = recv_payload(peer, t);
        send_payload(peer, t, std::move(payload));
    }

    std::size_t off = 0;
    for (const auto& s : streams) {
        std::size_t nbytes = packed_size(s.share.size(), s.width);
        if (off + nbytes > theirs.size()) throw DesyncError("opened payload shorter than expected");
        auto other = unpack_bits(std::span<const u8>(theirs.data() + off, nbytes), s.width,
                                 s.share.size());
        off += nbytes;
        u64 m = ring_mask(s.width);
        std::vector<u64> rev(s.share.size());
        for (std::size_t i = 0; i < rev.size(); ++i) rev[i] = (s.share[i] + other[i]) & m;
        revealed.push_back(std::move(rev));
    }
    if (off != theirs.size()) throw DesyncError("opened payload longer than expected");
    return revealed;
}

std::vector<u64> Session::open2(std::span<const u64> share, unsigned width, u16 t) {
    OpenStream s{share, width};
    auto r = open2_multi(std::span<const OpenStream>(&s, 1), t);
    return r.empty() ? std::vector<u64>{} : std::move(r[0]);
}

std::vector<u64> Session::p0_to_p1(std::span<const u64> vals_if_p0, std::size_t count,
                                   unsigned width) {
    mark_round();
    if (party_ == 0) {
        send_elems(1, tag::Y0, vals_if_p0, width);
        return {};
    }
    if (party_ == 1) return recv_elems(0, tag::Y0, count, width);
    return {};
}

void Session::p0_send_elems(int to, u16 t, std::span<const u64> vals, unsigned pack_width) {
    if (party_ != 0) throw StateError("p0_send_elems called by non-dealer");
    send_elems(to, t, vals, pack_width);
}

std::vector<u64> Session::p0_recv_elems(u16 t, std::size_t count, unsigned pack_width) {
    return recv_elems(0, t, count, pack_width);
}

Share2Vec Session::input_share2(std::span<const u64> vals_if_p1, std::size_t count,
                                unsigned width) {
    u64 idx = alloc_input();
    Share2Vec out;
    out.width = width;
    if (party_ == 0) return out;
    u64 m = ring_mask(width);
    // P1's next seed and P2's prev seed are both the P1-P2 pair seed.
    Prg prg = party_ == 1 ? next_stream(Purpose::Input, idx) : prev_stream(Purpose::Input, idx);
    out.comp.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        u64 r = prg.next(width);
        out.comp[i] = party_ == 1 ? (vals_if_p1[i] - r) & m : r;
    }
    return out;
}

}  // namespace qmpc
