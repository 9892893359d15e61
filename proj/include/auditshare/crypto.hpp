#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "auditshare/bytes.hpp"
#include "auditshare/rng.hpp"

// Thin wrappers over libsodium: SHA-256, ChaCha20-Poly1305 AEAD, Ed25519
// signatures and the ristretto255 prime-order group.

namespace auditshare {

void crypto_init();

struct Hash32 {
    std::array<uint8_t, 32> v{};

    bool operator==(const Hash32&) const = default;
    auto operator<=>(const Hash32&) const = default;

    BytesView view() const { return BytesView(v.data(), v.size()); }
    std::string hex_str() const { return hex(view()); }
};

Hash32 sha256(BytesView data);

class Sha256 {
  public:
    Sha256();
    Sha256& update(BytesView data);
    Sha256& update(const Hash32& h) { return update(h.view()); }
    Hash32 finish();

  private:
    std::array<uint8_t, 104> state_;  // crypto_hash_sha256_state storage
};

// --- AEAD (ChaCha20-Poly1305-IETF) ---------------------------------------

struct AeadKey {
    std::array<uint8_t, 32> v{};
    static AeadKey random(Rng& rng);
};

constexpr size_t kAeadOverhead = 16;

// nonce_counter fills the 12-byte IETF nonce (big-endian, zero padded);
// keys are never reused across counters by construction at call sites.
Bytes aead_seal(const AeadKey& key, uint64_t nonce_counter, BytesView ad, BytesView plaintext);
std::optional<Bytes> aead_open(const AeadKey& key, uint64_t nonce_counter, BytesView ad,
                               BytesView ciphertext);

// --- Ed25519 ---------------------------------------------------------------

struct SigningKey {
    std::array<uint8_t, 64> secret{};
    std::array<uint8_t, 32> public_key{};

    static SigningKey from_seed(const std::array<uint8_t, 32>& seed);
    static SigningKey random(Rng& rng);
};

std::array<uint8_t, 64> sign_detached(const SigningKey& key, BytesView msg);
bool verify_detached(const std::array<uint8_t, 32>& public_key, BytesView msg,
                     const std::array<uint8_t, 64>& sig);

// --- ristretto255 group ------------------------------------------------------

struct Scalar {
    std::array<uint8_t, 32> v{};
    static Scalar random(Rng& rng);
};

struct GroupElem {
    std::array<uint8_t, 32> v{};

    bool operator==(const GroupElem&) const = default;
    bool valid() const;
};

GroupElem base_mul(const Scalar& s);                       // s*G
GroupElem mul(const Scalar& s, const GroupElem& p);        // s*P, throws DecryptFailure on bad P
GroupElem add(const GroupElem& a, const GroupElem& b);
GroupElem sub(const GroupElem& a, const GroupElem& b);

}  // namespace auditshare
