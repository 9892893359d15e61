#pragma once

#include <optional>

#include "auditshare/crypto.hpp"
#include "auditshare/ids.hpp"
#include "auditshare/wire.hpp"

// 1-out-of-2 oblivious transfer, batched. Two-flow discrete-log construction
// over ristretto255: the sender publishes A = a*G; for pair i the receiver
// sends B_i = x_i*G (choice 0) or A + x_i*G (choice 1); the sender encrypts
// m0 under KDF(a*B_i) and m1 under KDF(a*(B_i - A)); the receiver can derive
// exactly the key for its chosen side as KDF(x_i*A).

namespace auditshare::ot {

struct OTSessionConfig {
    uint8_t group_id = 1;  // ristretto255
    uint8_t kdf_id = 1;    // SHA-256
    uint8_t aead_id = 1;   // ChaCha20-Poly1305-IETF

    bool operator==(const OTSessionConfig&) const = default;
};

struct ChoiceVector {
    std::vector<uint8_t> bits;  // one 0/1 per pair, ordered by pair_index

    size_t size() const { return bits.size(); }
    Bytes packed() const;
    static ChoiceVector from_packed(BytesView packed, size_t n_bits);
};

// Unbiased independent bits from a seeded ChaCha20 stream (simulation mode)
// or OS entropy (live mode, seed absent).
ChoiceVector sample_choices(size_t n_pairs, std::optional<uint64_t> seed);
ChoiceVector sample_choices(size_t n_pairs, Rng& rng);

struct MsgPair {
    BytesView m0;
    BytesView m1;
};

// Public flows only: what an observer of the wire sees from the sender side.
struct SenderTranscript {
    GroupElem sender_point;
    std::vector<GroupElem> receiver_points;
    size_t message_length = 0;
};

// Runs the sender side over an established channel. All messages must share
// one byte length. Blocks until the DONE frame is written.
SenderTranscript ot_send_batch(const std::vector<MsgPair>& pairs, ByteChannel& channel,
                               const SessionId& session, const OTSessionConfig& config,
                               Rng& rng);

// Receiver side, split so the caller can learn the pair count from the
// handshake before committing choices elsewhere (the notary sees the choice
// list before the transfer runs).
class OtReceiver {
  public:
    // reads the sender HELLO; does not reply yet
    OtReceiver(ByteChannel& channel, const SessionId& session, const OTSessionConfig& config);

    size_t pair_count() const { return n_pairs_; }
    size_t message_length() const { return msg_len_; }

    // echoes the handshake and runs the remaining flows; returns exactly one
    // plaintext per pair. Any authentication failure aborts with
    // DecryptFailure and yields no partial output.
    std::vector<Bytes> run(const ChoiceVector& choices, Rng& rng);

  private:
    ByteChannel& channel_;
    SessionId session_;
    OTSessionConfig config_;
    size_t n_pairs_;
    size_t msg_len_;
};

// One-call receiver for callers that already know the pair count.
std::vector<Bytes> ot_receive_batch(const ChoiceVector& choices, ByteChannel& channel,
                                    const SessionId& session, const OTSessionConfig& config,
                                    Rng& rng);

// Key derivation for one pair side; exposed for tests probing that the
// unchosen ciphertext fails authentication.
AeadKey derive_pair_key(const GroupElem& shared, const SessionId& session, uint32_t pair_index,
                        uint8_t side);
std::optional<Bytes> open_pair_ciphertext(const AeadKey& key, const SessionId& session,
                                          uint32_t pair_index, uint8_t side, BytesView ct);

}  // namespace auditshare::ot
