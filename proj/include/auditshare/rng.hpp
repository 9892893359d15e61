#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "auditshare/bytes.hpp"

namespace auditshare {

// Random source used by every component. Two implementations: a ChaCha20
// stream keyed from a 64-bit seed (reproducible runs) and the OS CSPRNG
// (live mode). Protocol code takes Rng& so tests can inject seeds.
class Rng {
  public:
    virtual ~Rng() = default;
    virtual void fill(void* p, size_t n) = 0;

    uint64_t u64();
    // uniform in [0, bound), bound > 0, via rejection sampling
    uint64_t below(uint64_t bound);
    bool bit();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = size_t(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    uint8_t bit_buf_ = 0;
    int bits_left_ = 0;
};

class DetRng final : public Rng {
  public:
    explicit DetRng(uint64_t seed, std::string_view label = "");
    explicit DetRng(const std::array<uint8_t, 32>& key);

    void fill(void* p, size_t n) override;

    // independent child stream; deterministic in (parent key, label/index)
    DetRng fork(std::string_view label) const;
    DetRng fork(uint64_t index) const;

  private:
    std::array<uint8_t, 32> key_;
    uint64_t block_ = 0;
    std::array<uint8_t, 512> buf_;
    size_t avail_ = 0;
};

class SysRng final : public Rng {
  public:
    void fill(void* p, size_t n) override;
};

// splitmix-style mixing for deriving integer sub-seeds
uint64_t mix_seed(uint64_t seed, uint64_t salt);

}  // namespace auditshare
