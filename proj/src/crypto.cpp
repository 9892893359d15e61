#include "auditshare/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

#include "auditshare/errors.hpp"

namespace auditshare {

static_assert(sizeof(crypto_hash_sha256_state) <= 104);

void crypto_init() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("libsodium init failed");
}

Hash32 sha256(BytesView data) {
    crypto_init();
    Hash32 out;
    crypto_hash_sha256(out.v.data(), data.data(), data.size());
    return out;
}

Sha256::Sha256() {
    crypto_init();
    crypto_hash_sha256_init(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()));
}

Sha256& Sha256::update(BytesView data) {
    crypto_hash_sha256_update(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
                              data.data(), data.size());
    return *this;
}

Hash32 Sha256::finish() {
    Hash32 out;
    crypto_hash_sha256_final(reinterpret_cast<crypto_hash_sha256_state*>(state_.data()),
                             out.v.data());
    return out;
}

AeadKey AeadKey::random(Rng& rng) {
    AeadKey k;
    rng.fill(k.v.data(), k.v.size());
    return k;
}

static void make_nonce(uint64_t counter, uint8_t out[12]) {
    std::memset(out, 0, 12);
    for (int i = 0; i < 8; ++i) out[11 - i] = uint8_t(counter >> (8 * i));
}

Bytes aead_seal(const AeadKey& key, uint64_t nonce_counter, BytesView ad, BytesView plaintext) {
    crypto_init();
    uint8_t nonce[12];
    make_nonce(nonce_counter, nonce);
    Bytes out(plaintext.size() + kAeadOverhead);
    unsigned long long clen = 0;
    crypto_aead_chacha20poly1305_ietf_encrypt(out.data(), &clen, plaintext.data(),
                                              plaintext.size(), ad.data(), ad.size(), nullptr,
                                              nonce, key.v.data());
    out.resize(clen);
    return out;
}

std::optional<Bytes> aead_open(const AeadKey& key, uint64_t nonce_counter, BytesView ad,
                               BytesView ciphertext) {
    crypto_init();
    if (ciphertext.size() < kAeadOverhead) return std::nullopt;
    uint8_t nonce[12];
    make_nonce(nonce_counter, nonce);
    Bytes out(ciphertext.size() - kAeadOverhead);
    unsigned long long mlen = 0;
    if (crypto_aead_chacha20poly1305_ietf_decrypt(out.data(), &mlen, nullptr, ciphertext.data(),
                                                  ciphertext.size(), ad.data(), ad.size(), nonce,
                                                  key.v.data()) != 0) {
        return std::nullopt;
    }
    out.resize(mlen);
    return out;
}

SigningKey SigningKey::from_seed(const std::array<uint8_t, 32>& seed) {
    crypto_init();
    SigningKey k;
    crypto_sign_seed_keypair(k.public_key.data(), k.secret.data(), seed.data());
    return k;
}

SigningKey SigningKey::random(Rng& rng) {
    std::array<uint8_t, 32> seed;
    rng.fill(seed.data(), seed.size());
    return from_seed(seed);
}

std::array<uint8_t, 64> sign_detached(const SigningKey& key, BytesView msg) {
    std::array<uint8_t, 64> sig;
    crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), key.secret.data());
    return sig;
}

bool verify_detached(const std::array<uint8_t, 32>& public_key, BytesView msg,
                     const std::array<uint8_t, 64>& sig) {
    crypto_init();
    return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), public_key.data()) == 0;
}

Scalar Scalar::random(Rng& rng) {
    crypto_init();
    uint8_t wide[64];
    rng.fill(wide, sizeof wide);
    Scalar s;
    crypto_core_ristretto255_scalar_reduce(s.v.data(), wide);
    return s;
}

bool GroupElem::valid() const {
    crypto_init();
    return crypto_core_ristretto255_is_valid_point(v.data()) == 1;
}

GroupElem base_mul(const Scalar& s) {
    crypto_init();
    GroupElem p;
    if (crypto_scalarmult_ristretto255_base(p.v.data(), s.v.data()) != 0)
        fail(Err::DecryptFailure, "scalar multiplication failed");
    return p;
}

GroupElem mul(const Scalar& s, const GroupElem& p) {
    crypto_init();
    GroupElem out;
    if (crypto_scalarmult_ristretto255(out.v.data(), s.v.data(), p.v.data()) != 0)
        fail(Err::DecryptFailure, "invalid group element");
    return out;
}

GroupElem add(const GroupElem& a, const GroupElem& b) {
    crypto_init();
    GroupElem out;
    if (crypto_core_ristretto255_add(out.v.data(), a.v.data(), b.v.data()) != 0)
        fail(Err::DecryptFailure, "invalid group element");
    return out;
}

GroupElem sub(const GroupElem& a, const GroupElem& b) {
    crypto_init();
    GroupElem out;
    if (crypto_core_ristretto255_sub(out.v.data(), a.v.data(), b.v.data()) != 0)
        fail(Err::DecryptFailure, "invalid group element");
    return out;
}

}  // namespace auditshare
