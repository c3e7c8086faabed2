#include "qmpc/core/prg.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>

#include "qmpc/errors.hpp"

namespace qmpc {

namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw StateError("libsodium initialization failed");
    });
}

}  // namespace

Seed derive_root_seed(u64 master) {
    ensure_sodium();
    u8 in[16] = {'q', 'm', 'p', 'c', '-', 'r', 'o', 'o', 't'};
    for (int i = 0; i < 8; ++i) in[8 + i] = static_cast<u8>(master >> (8 * i));
    Seed out{};
    crypto_generichash(out.data(), out.size(), in, sizeof(in), nullptr, 0);
    return out;
}

Seed derive_subseed(const Seed& parent, const std::string& label) {
    ensure_sodium();
    Seed out{};
    crypto_generichash(out.data(), out.size(),
                       reinterpret_cast<const u8*>(label.data()), label.size(),
                       parent.data(), parent.size());
    return out;
}

u64 seed_fingerprint(const Seed& s) {
    ensure_sodium();
    u8 h[16];
    static const u8 tag[] = {'f', 'p'};
    crypto_generichash(h, sizeof(h), tag, sizeof(tag), s.data(), s.size());
    u64 v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<u64>(h[i]) << (8 * i);
    return v;
}

Prg::Prg(const Seed& seed, Purpose purpose, u64 index) : key_(seed) {
    ensure_sodium();
    if (index >= (1ull << 48)) throw DomainError("prg stream index exceeds 48 bits");
    u16 p = static_cast<u16>(purpose);
    nonce_[0] = static_cast<u8>(p);
    nonce_[1] = static_cast<u8>(p >> 8);
    for (int i = 0; i < 6; ++i) nonce_[2 + i] = static_cast<u8>(index >> (8 * i));
}

void Prg::refill() {
    std::memset(buf_.data(), 0, buf_.size());
    // 64-byte ChaCha blocks; chunk_ counts whole buffers.
    crypto_stream_chacha20_xor_ic(buf_.data(), buf_.data(), buf_.size(), nonce_.data(),
                                  chunk_ * (buf_.size() / 64), key_.data());
    ++chunk_;
    pos_ = 0;
}

void Prg::fill_bytes(std::span<u8> out) {
    std::size_t done = 0;
    while (done < out.size()) {
        if (pos_ == buf_.size()) refill();
        std::size_t take = std::min(out.size() - done, buf_.size() - pos_);
        std::memcpy(out.data() + done, buf_.data() + pos_, take);
        pos_ += take;
        done += take;
    }
}

u64 Prg::next(unsigned width) {
    check_width(width);
    unsigned nbytes = (width + 7) / 8;
    u8 raw[8] = {0};
    fill_bytes(std::span<u8>(raw, nbytes));
    u64 v = 0;
    for (unsigned i = 0; i < nbytes; ++i) v |= static_cast<u64>(raw[i]) << (8 * i);
    return v & ring_mask(width);
}

void Prg::fill(std::span<u64> out, unsigned width) {
    for (auto& v : out) v = next(width);
}

std::vector<u64> Prg::draw(std::size_t count, unsigned width) {
    std::vector<u64> out(count);
    fill(out, width);
    return out;
}

}  // namespace qmpc
