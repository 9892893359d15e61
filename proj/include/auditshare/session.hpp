#pragma once

#include <filesystem>
#include <set>

#include "auditshare/data_model.hpp"
#include "auditshare/notary.hpp"
#include "auditshare/preprocess.hpp"

// Orchestrates one sender -> receiver sharing: pair construction, the OT
// batch, the tree exchange with the notary and certification, and each
// party's persistent record.

namespace auditshare {

struct SessionRecordSender {
    SessionId session_id{};
    std::string receiver_id;
    uint32_t message_length = 0;  // common padded length; message bytes rebuild from it
    std::vector<ObjectPair> pairs;
    Hash32 sending_root;
    SharingCertificate certificate;

    Bytes serialize() const;
    static SessionRecordSender deserialize(BytesView data);
};

struct SessionRecordReceiver {
    SessionId session_id{};
    std::string receiver_id;
    ot::ChoiceVector choices;
    std::vector<std::vector<DataObject>> received;  // deserialized objects per pair
    Hash32 receiving_root;

    Bytes serialize() const;
    static SessionRecordReceiver deserialize(BytesView data);
};

struct AllocationRecord {
    std::string receiver_id;
    std::set<std::string> recv_set;  // fake object ids received
    std::set<std::string> drop_set;  // fake object ids dropped in the OT
};

// recv = chosen fake side of every pair, drop = complement.
AllocationRecord extract_allocation(const SessionRecordSender& sender,
                                    const ot::ChoiceVector& choices);

struct FailureReport {
    SessionId session_id{};
    std::string receiver_id;
    Err code = Err::ProtocolAborted;
    std::string message;
};

struct SessionOutcome {
    std::optional<SessionRecordSender> sender;
    std::optional<SessionRecordReceiver> receiver;
    std::optional<SharingCertificate> certificate;
    std::optional<FailureReport> failure;

    bool ok() const { return !failure.has_value(); }
};

enum class Transport { InProcess, Tcp };

// Fault injection point for the tamper suites: flips one byte of the Nth
// frame sent on one leg of the protocol.
enum class SessionLeg {
    SenderToReceiver,
    ReceiverToSender,
    SenderToNotary,
    ReceiverToNotary,
    NotaryToReceiver,
};

struct FaultSpec {
    SessionLeg leg = SessionLeg::SenderToReceiver;
    size_t frame_index = 0;
    size_t byte_offset = 0;
};

struct SessionParams {
    std::string receiver_id = "R1";
    uint32_t receiver_index = 0;  // salts the per-receiver sub-seeds
    std::optional<uint64_t> master_seed;
    Transport transport = Transport::InProcess;
    size_t max_object_bytes = kDefaultMaxObjectBytes;
    std::optional<FaultSpec> fault;
};

// Runs all three roles of one session in-process (loopback queues or local
// TCP sockets). On any failure the receiver's partial data is discarded and
// the outcome carries a FailureReport.
SessionOutcome run_session(const std::vector<DataObject>& reals,
                           const std::vector<DataObject>& fakes, Notary& notary,
                           const SessionParams& params);

// --- role drivers (used by run_session; exposed for transport tests) -----------

SessionRecordSender run_sender_role(std::vector<ObjectPair> pairs, size_t message_length,
                                    const SessionId& session, const std::string& receiver_id,
                                    ByteChannel& to_receiver, ByteChannel& to_notary, Rng& rng,
                                    const std::array<uint8_t, 32>& notary_public_key);

SessionRecordReceiver run_receiver_role(const SessionId& session, const std::string& receiver_id,
                                        ByteChannel& to_sender, ByteChannel& to_notary,
                                        Rng& choice_rng, Rng& blind_rng,
                                        const std::array<uint8_t, 32>& notary_public_key);

// --- persistence ---------------------------------------------------------------

// Writes <session>.sender/.receiver/.cert next to a newline-delimited
// manifest ("<session_hex> <receiver_id> <status>").
void save_session_files(const std::filesystem::path& dir, const SessionOutcome& outcome);

struct StoredSession {
    SessionRecordSender sender;
    SessionRecordReceiver receiver;
    SharingCertificate certificate;
};

std::vector<StoredSession> load_session_files(const std::filesystem::path& dir);

}  // namespace auditshare
