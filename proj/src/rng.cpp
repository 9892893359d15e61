#include "auditshare/rng.hpp"

#include <sodium.h>

#include <cstring>

#include "auditshare/crypto.hpp"

namespace auditshare {

uint64_t Rng::u64() {
    uint64_t v;
    fill(&v, sizeof v);
    return v;
}

uint64_t Rng::below(uint64_t bound) {
    // rejection sampling over the top multiple of bound
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v;
    do {
        v = u64();
    } while (v >= limit);
    return v % bound;
}

bool Rng::bit() {
    if (bits_left_ == 0) {
        fill(&bit_buf_, 1);
        bits_left_ = 8;
    }
    bool b = bit_buf_ & 1;
    bit_buf_ >>= 1;
    --bits_left_;
    return b;
}

DetRng::DetRng(uint64_t seed, std::string_view label) {
    crypto_init();
    Sha256 h;
    uint8_t le[8];
    for (int i = 0; i < 8; ++i) le[i] = uint8_t(seed >> (8 * i));
    h.update(to_bytes("auditshare-rng-v1"));
    h.update(BytesView(le, 8));
    h.update(to_bytes(label));
    key_ = h.finish().v;
}

DetRng::DetRng(const std::array<uint8_t, 32>& key) : key_(key) {
    crypto_init();
}

void DetRng::fill(void* p, size_t n) {
    uint8_t* out = static_cast<uint8_t*>(p);
    while (n > 0) {
        if (avail_ == 0) {
            uint8_t nonce[8];
            for (int i = 0; i < 8; ++i) nonce[i] = uint8_t(block_ >> (8 * i));
            crypto_stream_chacha20(buf_.data(), buf_.size(), nonce, key_.data());
            ++block_;
            avail_ = buf_.size();
        }
        size_t take = n < avail_ ? n : avail_;
        std::memcpy(out, buf_.data() + (buf_.size() - avail_), take);
        avail_ -= take;
        out += take;
        n -= take;
    }
}

DetRng DetRng::fork(std::string_view label) const {
    Sha256 h;
    h.update(BytesView(key_.data(), key_.size()));
    h.update(to_bytes("/"));
    h.update(to_bytes(label));
    return DetRng(h.finish().v);
}

DetRng DetRng::fork(uint64_t index) const {
    Sha256 h;
    uint8_t le[8];
    for (int i = 0; i < 8; ++i) le[i] = uint8_t(index >> (8 * i));
    h.update(BytesView(key_.data(), key_.size()));
    h.update(to_bytes("#"));
    h.update(BytesView(le, 8));
    return DetRng(h.finish().v);
}

void SysRng::fill(void* p, size_t n) {
    crypto_init();
    randombytes_buf(p, n);
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace auditshare
