#pragma once

#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <variant>

#include "auditshare/merkle.hpp"

// The notary witnesses a sharing session without ever seeing message bytes:
// it receives leaf hashes (step 1) and the receiver's choices (step 2),
// derives the expected receiving root, compares it with the root the
// receiver submits (steps 3-4), and on a match issues a signed certificate
// whose sending root and choice list are sealed under a per-certificate key.

namespace auditshare {

struct SharingCertificate {
    uint8_t version = 1;
    SessionId session_id{};
    std::string receiver_id;
    Bytes encrypted_sending_root;  // AEAD, nonce counter 0
    Bytes encrypted_choices;       // AEAD, nonce counter 1
    uint64_t issued_at = 0;        // unix seconds
    std::array<uint8_t, 64> notary_signature{};

    Bytes signed_bytes() const;
    Bytes serialize() const;  // "ASC1" record
    static SharingCertificate deserialize(BytesView data);
};

bool verify_certificate(const SharingCertificate& cert,
                        const std::array<uint8_t, 32>& notary_public_key);

// Field decryption with a disclosed per-certificate key. Throws
// CertificateInvalid when the seal does not open or the contents are
// malformed.
Hash32 decrypt_certified_root(const SharingCertificate& cert, const AeadKey& key);
ot::ChoiceVector decrypt_certified_choices(const SharingCertificate& cert, const AeadKey& key);

struct VerificationFailure {
    SessionId session_id{};
    std::string receiver_id;
    std::string reason;
};

using CertifyResult = std::variant<SharingCertificate, VerificationFailure>;

inline bool certified(const CertifyResult& r) {
    return std::holds_alternative<SharingCertificate>(r);
}

struct NotaryConfig {
    std::string store_path;  // append-only record store; empty = in-memory only
    std::string keys_path;   // notary private state; empty = in-memory only
};

class Notary {
  public:
    // Loads existing private state from keys_path or creates fresh keys.
    Notary(NotaryConfig config, Rng& rng);

    const std::array<uint8_t, 32>& public_key() const { return signing_key_.public_key; }

    // Plaintext arbitrator credential, available once on fresh creation so
    // the deployment can hand it to the arbitrator out of band.
    const std::optional<Bytes>& initial_credential() const { return initial_credential_; }

    // protocol steps, in order
    void on_tree_nodes(const SessionId& session, const std::string& receiver_id,
                       std::vector<std::array<Hash32, 2>> leaves);
    void on_choices(const SessionId& session, const std::string& receiver_id,
                    ot::ChoiceVector choices);
    CertifyResult certify(const SessionId& session, const std::string& receiver_id,
                          const ReceivingTreeRoot& receiver_root);

    // Receiver-side abort report; records a failure and unblocks the sender.
    void report_failure(const SessionId& session, const std::string& reason);

    // Blocks until the session reaches an outcome (certificate or failure).
    CertifyResult wait_outcome(const SessionId& session);

    // Blocks until step 1 registered the session; lets the receiver-facing
    // connection tolerate thread interleaving without weakening the ordering
    // checks in on_choices itself.
    bool wait_session(const SessionId& session, std::chrono::milliseconds timeout);

    // Arbitration: returns the per-certificate key after checking the
    // credential. Logs the disclosure in the store.
    AeadKey disclose_keys(const SessionId& session, BytesView arbitrator_credential);

    // Session bookkeeping snapshot for audits: every byte the notary holds.
    Bytes state_snapshot() const;

    std::vector<SharingCertificate> stored_certificates() const;

  private:
    struct SessionState {
        enum class Phase { AwaitChoices, AwaitRoot, Done };
        Phase phase = Phase::AwaitChoices;
        std::string receiver_id;
        SendingTree tree;
        ot::ChoiceVector choices;
        std::optional<CertifyResult> outcome;
    };

    void persist_record(uint8_t record_type, BytesView body);
    void persist_key(const SessionId& session, const AeadKey& key);
    SessionState& session_or_fail(const SessionId& session);

    NotaryConfig config_;
    SigningKey signing_key_;
    Hash32 credential_hash_;
    std::optional<Bytes> initial_credential_;
    DetRng key_rng_;

    mutable std::mutex mu_;
    std::condition_variable outcome_cv_;
    std::map<SessionId, SessionState> sessions_;
    std::map<SessionId, AeadKey> cert_keys_;
    std::vector<SharingCertificate> certificates_;
    std::vector<VerificationFailure> failures_;
    std::vector<std::string> disclosure_log_;
};

// Channel-facing service loops. Each handles one connection; `expected`
// lets the embedded runner fail the right session if the peer dies before
// identifying itself.
void serve_notary_sender_conn(Notary& notary, ByteChannel& channel,
                              std::optional<SessionId> expected);
void serve_notary_receiver_conn(Notary& notary, ByteChannel& channel,
                                std::optional<SessionId> expected);

// Notary-side frame payload builders/parsers (shared with the session roles).
Bytes encode_tree_nodes(const SessionId& session, const std::string& receiver_id,
                        const std::vector<std::array<Hash32, 2>>& leaves);
Bytes encode_choices_commit(const SessionId& session, const std::string& receiver_id,
                            const ot::ChoiceVector& choices);
Bytes encode_recv_root(const SessionId& session, const std::string& receiver_id,
                       const ReceivingTreeRoot& root);
Bytes encode_failure(const SessionId& session, const std::string& reason);
std::pair<SessionId, std::string> decode_failure(BytesView payload);

}  // namespace auditshare
