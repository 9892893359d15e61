#include "auditshare/notary.hpp"

#include <sodium.h>

#include <chrono>
#include <ctime>
#include <filesystem>

#include "auditshare/errors.hpp"
#include "auditshare/fsio.hpp"

namespace auditshare {

namespace {

constexpr uint32_t kCertMagic = 0x41534331;  // "ASC1"
constexpr uint32_t kKeysMagic = 0x41534e4b;  // "ASNK"
constexpr uint8_t kStoreRecCert = 1;
constexpr uint8_t kStoreRecFailure = 2;
constexpr uint8_t kStoreRecDisclosure = 3;

Bytes seal_ad(const char* label, const SessionId& session) {
    Writer w;
    w.raw(to_bytes(label));
    w.raw(session.data(), session.size());
    return w.take();
}

std::array<uint8_t, 32> draw32(Rng& rng) {
    std::array<uint8_t, 32> out;
    rng.fill(out.data(), out.size());
    return out;
}

}  // namespace

Bytes SharingCertificate::signed_bytes() const {
    Writer w;
    w.u8(version);
    w.raw(session_id.data(), session_id.size());
    w.str(receiver_id);
    w.blob(encrypted_sending_root);
    w.blob(encrypted_choices);
    w.u64(issued_at);
    return w.take();
}

Bytes SharingCertificate::serialize() const {
    Writer w;
    w.u32(kCertMagic);
    w.u8(version);
    w.raw(session_id.data(), session_id.size());
    w.str(receiver_id);
    w.blob(encrypted_sending_root);
    w.blob(encrypted_choices);
    w.u64(issued_at);
    w.raw(notary_signature.data(), notary_signature.size());
    return w.take();
}

SharingCertificate SharingCertificate::deserialize(BytesView data) {
    Reader r(data);
    if (r.u32() != kCertMagic) fail(Err::CertificateInvalid, "bad certificate magic");
    SharingCertificate cert;
    cert.version = r.u8();
    if (cert.version != 1) fail(Err::CertificateInvalid, "unsupported certificate version");
    cert.session_id = r.fixed<16>();
    cert.receiver_id = r.str();
    cert.encrypted_sending_root = r.blob();
    cert.encrypted_choices = r.blob();
    cert.issued_at = r.u64();
    cert.notary_signature = r.fixed<64>();
    r.expect_done();
    return cert;
}

bool verify_certificate(const SharingCertificate& cert,
                        const std::array<uint8_t, 32>& notary_public_key) {
    return verify_detached(notary_public_key, cert.signed_bytes(), cert.notary_signature);
}

Hash32 decrypt_certified_root(const SharingCertificate& cert, const AeadKey& key) {
    auto pt = aead_open(key, 0, seal_ad("ASCERT-root", cert.session_id),
                        cert.encrypted_sending_root);
    if (!pt || pt->size() != 32) fail(Err::CertificateInvalid, "sending root seal did not open");
    Hash32 root;
    std::copy(pt->begin(), pt->end(), root.v.begin());
    return root;
}

ot::ChoiceVector decrypt_certified_choices(const SharingCertificate& cert, const AeadKey& key) {
    auto pt = aead_open(key, 1, seal_ad("ASCERT-choices", cert.session_id),
                        cert.encrypted_choices);
    if (!pt) fail(Err::CertificateInvalid, "choice seal did not open");
    try {
        Reader r(*pt);
        uint32_t n = r.u32();
        Bytes packed = r.raw((n + 7) / 8);
        r.expect_done();
        return ot::ChoiceVector::from_packed(packed, n);
    } catch (const AuditError&) {
        fail(Err::CertificateInvalid, "malformed choice list");
    }
}

Notary::Notary(NotaryConfig config, Rng& rng)
    : config_(std::move(config)), key_rng_(draw32(rng)) {
    bool load = !config_.keys_path.empty() && std::filesystem::exists(config_.keys_path);
    if (load) {
        Reader r(read_file(config_.keys_path));
        if (r.u32() != kKeysMagic || r.u8() != 1) fail(Err::IoError, "bad notary key file");
        signing_key_ = SigningKey::from_seed(r.fixed<32>());
        credential_hash_.v = r.fixed<32>();
        while (r.remaining() > 0) {
            SessionId sid = r.fixed<16>();
            AeadKey key;
            key.v = r.fixed<32>();
            cert_keys_[sid] = key;
        }
    } else {
        std::array<uint8_t, 32> seed = draw32(rng);
        signing_key_ = SigningKey::from_seed(seed);
        Bytes credential(32);
        rng.fill(credential.data(), credential.size());
        credential_hash_ = sha256(credential);
        initial_credential_ = credential;
        if (!config_.keys_path.empty()) {
            Writer w;
            w.u32(kKeysMagic);
            w.u8(1);
            w.raw(seed.data(), seed.size());
            w.raw(credential_hash_.v.data(), credential_hash_.v.size());
            write_file(config_.keys_path, w.bytes());
        }
    }
}

void Notary::persist_record(uint8_t record_type, BytesView body) {
    if (config_.store_path.empty()) return;
    Writer w;
    w.u8(record_type);
    w.u32(uint32_t(body.size()));
    w.raw(body);
    append_file(config_.store_path, w.bytes());
}

void Notary::persist_key(const SessionId& session, const AeadKey& key) {
    if (config_.keys_path.empty()) return;
    Writer w;
    w.raw(session.data(), session.size());
    w.raw(key.v.data(), key.v.size());
    append_file(config_.keys_path, w.bytes());
}

Notary::SessionState& Notary::session_or_fail(const SessionId& session) {
    auto it = sessions_.find(session);
    if (it == sessions_.end()) fail(Err::OutOfOrderProtocol, "session has no sending tree yet");
    return it->second;
}

void Notary::on_tree_nodes(const SessionId& session, const std::string& receiver_id,
                           std::vector<std::array<Hash32, 2>> leaves) {
    std::lock_guard lk(mu_);
    if (sessions_.count(session))
        fail(Err::OutOfOrderProtocol, "sending tree already registered");
    SessionState st;
    st.phase = SessionState::Phase::AwaitChoices;
    st.receiver_id = receiver_id;
    st.tree = sending_tree_from_leaves(std::move(leaves));
    sessions_.emplace(session, std::move(st));
    outcome_cv_.notify_all();
}

void Notary::on_choices(const SessionId& session, const std::string& receiver_id,
                        ot::ChoiceVector choices) {
    std::lock_guard lk(mu_);
    SessionState& st = session_or_fail(session);
    if (st.phase != SessionState::Phase::AwaitChoices)
        fail(Err::OutOfOrderProtocol, "choices already committed");
    if (st.receiver_id != receiver_id)
        fail(Err::OutOfOrderProtocol, "choices from unexpected receiver");
    if (choices.size() != st.tree.pair_count())
        fail(Err::LengthMismatch, "choice count does not match pair count");
    st.choices = std::move(choices);
    st.phase = SessionState::Phase::AwaitRoot;
}

CertifyResult Notary::certify(const SessionId& session, const std::string& receiver_id,
                              const ReceivingTreeRoot& receiver_root) {
    std::lock_guard lk(mu_);
    SessionState& st = session_or_fail(session);
    if (st.phase != SessionState::Phase::AwaitRoot)
        fail(Err::OutOfOrderProtocol,
             st.phase == SessionState::Phase::Done ? "session already concluded"
                                                   : "choices not committed yet");
    if (st.receiver_id != receiver_id)
        fail(Err::OutOfOrderProtocol, "root from unexpected receiver");

    CertifyResult result;
    ReceivingTreeRoot expected = derive_receiving_root(st.tree, st.choices);
    if (expected == receiver_root) {
        AeadKey key = AeadKey::random(key_rng_);
        SharingCertificate cert;
        cert.session_id = session;
        cert.receiver_id = receiver_id;
        cert.encrypted_sending_root =
            aead_seal(key, 0, seal_ad("ASCERT-root", session), st.tree.root.view());
        Writer choice_pt;
        choice_pt.u32(uint32_t(st.choices.size()));
        choice_pt.raw(st.choices.packed());
        cert.encrypted_choices =
            aead_seal(key, 1, seal_ad("ASCERT-choices", session), choice_pt.bytes());
        cert.issued_at = uint64_t(std::time(nullptr));
        cert.notary_signature = sign_detached(signing_key_, cert.signed_bytes());
        cert_keys_[session] = key;
        persist_key(session, key);
        certificates_.push_back(cert);
        persist_record(kStoreRecCert, cert.serialize());
        result = cert;
    } else {
        VerificationFailure vf{session, receiver_id, "receiving root mismatch"};
        failures_.push_back(vf);
        persist_record(kStoreRecFailure, encode_failure(session, vf.reason));
        result = vf;
    }
    st.phase = SessionState::Phase::Done;
    st.outcome = result;
    outcome_cv_.notify_all();
    return result;
}

void Notary::report_failure(const SessionId& session, const std::string& reason) {
    std::lock_guard lk(mu_);
    auto it = sessions_.find(session);
    if (it != sessions_.end() && it->second.outcome) return;  // already concluded
    VerificationFailure vf{session, it != sessions_.end() ? it->second.receiver_id : "", reason};
    if (it == sessions_.end()) {
        SessionState st;
        st.phase = SessionState::Phase::Done;
        st.outcome = vf;
        sessions_.emplace(session, std::move(st));
    } else {
        it->second.phase = SessionState::Phase::Done;
        it->second.outcome = vf;
    }
    failures_.push_back(vf);
    persist_record(kStoreRecFailure, encode_failure(session, reason));
    outcome_cv_.notify_all();
}

CertifyResult Notary::wait_outcome(const SessionId& session) {
    std::unique_lock lk(mu_);
    bool ok = outcome_cv_.wait_for(lk, std::chrono::seconds(120), [&] {
        auto it = sessions_.find(session);
        return it != sessions_.end() && it->second.outcome.has_value();
    });
    if (!ok) fail(Err::ChannelClosed, "timed out waiting for session outcome");
    return *sessions_.at(session).outcome;
}

bool Notary::wait_session(const SessionId& session, std::chrono::milliseconds timeout) {
    std::unique_lock lk(mu_);
    return outcome_cv_.wait_for(lk, timeout, [&] { return sessions_.count(session) > 0; });
}

AeadKey Notary::disclose_keys(const SessionId& session, BytesView arbitrator_credential) {
    std::lock_guard lk(mu_);
    Hash32 h = sha256(arbitrator_credential);
    if (sodium_memcmp(h.v.data(), credential_hash_.v.data(), 32) != 0)
        fail(Err::Unauthorized, "arbitrator credential rejected");
    auto it = cert_keys_.find(session);
    if (it == cert_keys_.end()) fail(Err::UnknownSession, session_hex(session));
    disclosure_log_.push_back(session_hex(session));
    persist_record(kStoreRecDisclosure, to_bytes(session_hex(session)));
    return it->second;
}

Bytes Notary::state_snapshot() const {
    std::lock_guard lk(mu_);
    Writer w;
    for (const auto& [sid, st] : sessions_) {
        w.raw(sid.data(), sid.size());
        w.str(st.receiver_id);
        for (const auto& leaf : st.tree.leaf_hashes) {
            w.raw(leaf[0].v.data(), 32);
            w.raw(leaf[1].v.data(), 32);
        }
        w.raw(st.choices.packed());
    }
    for (const auto& cert : certificates_) w.raw(cert.serialize());
    for (const auto& vf : failures_) w.str(vf.reason);
    return w.take();
}

std::vector<SharingCertificate> Notary::stored_certificates() const {
    std::lock_guard lk(mu_);
    return certificates_;
}

// --- frame payloads -----------------------------------------------------------

Bytes encode_tree_nodes(const SessionId& session, const std::string& receiver_id,
                        const std::vector<std::array<Hash32, 2>>& leaves) {
    Writer w;
    w.raw(session.data(), session.size());
    w.str(receiver_id);
    w.u32(uint32_t(leaves.size()));
    for (const auto& leaf : leaves) {
        w.raw(leaf[0].v.data(), 32);
        w.raw(leaf[1].v.data(), 32);
    }
    return w.take();
}

static std::tuple<SessionId, std::string, std::vector<std::array<Hash32, 2>>> decode_tree_nodes(
    BytesView payload) {
    Reader r(payload);
    SessionId sid = r.fixed<16>();
    std::string rid = r.str();
    uint32_t n = r.u32();
    if (r.remaining() != uint64_t(n) * 64) fail(Err::ProtocolDesync, "bad tree node payload");
    std::vector<std::array<Hash32, 2>> leaves(n);
    for (uint32_t i = 0; i < n; ++i) {
        leaves[i][0].v = r.fixed<32>();
        leaves[i][1].v = r.fixed<32>();
    }
    return {sid, std::move(rid), std::move(leaves)};
}

Bytes encode_choices_commit(const SessionId& session, const std::string& receiver_id,
                            const ot::ChoiceVector& choices) {
    Writer w;
    w.raw(session.data(), session.size());
    w.str(receiver_id);
    w.u32(uint32_t(choices.size()));
    w.raw(choices.packed());
    return w.take();
}

static std::tuple<SessionId, std::string, ot::ChoiceVector> decode_choices_commit(
    BytesView payload) {
    Reader r(payload);
    SessionId sid = r.fixed<16>();
    std::string rid = r.str();
    uint32_t n = r.u32();
    Bytes packed = r.raw((n + 7) / 8);
    r.expect_done();
    return {sid, std::move(rid), ot::ChoiceVector::from_packed(packed, n)};
}

Bytes encode_recv_root(const SessionId& session, const std::string& receiver_id,
                       const ReceivingTreeRoot& root) {
    Writer w;
    w.raw(session.data(), session.size());
    w.str(receiver_id);
    w.raw(root.root.v.data(), 32);
    return w.take();
}

static std::tuple<SessionId, std::string, ReceivingTreeRoot> decode_recv_root(BytesView payload) {
    Reader r(payload);
    SessionId sid = r.fixed<16>();
    std::string rid = r.str();
    ReceivingTreeRoot root;
    root.root.v = r.fixed<32>();
    r.expect_done();
    return {sid, std::move(rid), root};
}

Bytes encode_failure(const SessionId& session, const std::string& reason) {
    Writer w;
    w.raw(session.data(), session.size());
    w.str(reason);
    return w.take();
}

std::pair<SessionId, std::string> decode_failure(BytesView payload) {
    Reader r(payload);
    SessionId sid = r.fixed<16>();
    std::string reason = r.str();
    r.expect_done();
    return {sid, reason};
}

// --- connection service loops ---------------------------------------------------

void serve_notary_sender_conn(Notary& notary, ByteChannel& channel,
                              std::optional<SessionId> expected) {
    std::optional<SessionId> sid = expected;
    try {
        Frame f = read_frame(channel);
        if (f.type != FrameType::TreeNodes)
            fail(Err::ProtocolDesync, "sender connection must open with TREE_NODES");
        auto [s, rid, leaves] = decode_tree_nodes(f.payload);
        sid = s;
        notary.on_tree_nodes(s, rid, std::move(leaves));
        CertifyResult out = notary.wait_outcome(s);
        if (certified(out)) {
            write_frame(channel, FrameType::Certificate,
                        std::get<SharingCertificate>(out).serialize());
        } else {
            const auto& vf = std::get<VerificationFailure>(out);
            write_frame(channel, FrameType::Failure, encode_failure(s, vf.reason));
        }
    } catch (const std::exception& e) {
        if (sid) notary.report_failure(*sid, std::string("sender connection: ") + e.what());
        channel.close();
        return;
    }
    channel.close();
}

void serve_notary_receiver_conn(Notary& notary, ByteChannel& channel,
                                std::optional<SessionId> expected) {
    std::optional<SessionId> sid = expected;
    try {
        Frame f1 = read_frame(channel);
        if (f1.type == FrameType::Failure) {
            auto [s, reason] = decode_failure(f1.payload);
            notary.report_failure(s, reason);
            channel.close();
            return;
        }
        if (f1.type != FrameType::ChoicesCommit)
            fail(Err::ProtocolDesync, "receiver connection must open with CHOICES_COMMIT");
        auto [s, rid, choices] = decode_choices_commit(f1.payload);
        sid = s;
        // tolerate the sender connection still in flight
        notary.wait_session(s, std::chrono::seconds(30));
        notary.on_choices(s, rid, std::move(choices));

        Frame f2 = read_frame(channel);
        if (f2.type == FrameType::Failure) {
            auto [fs, reason] = decode_failure(f2.payload);
            notary.report_failure(fs, reason);
            channel.close();
            return;
        }
        if (f2.type != FrameType::RecvRoot)
            fail(Err::ProtocolDesync, "expected RECV_ROOT");
        auto [rs, rrid, root] = decode_recv_root(f2.payload);
        if (rs != s) fail(Err::ProtocolDesync, "root for unexpected session");
        CertifyResult out = notary.certify(rs, rrid, root);
        if (certified(out)) {
            write_frame(channel, FrameType::Certificate,
                        std::get<SharingCertificate>(out).serialize());
        } else {
            const auto& vf = std::get<VerificationFailure>(out);
            write_frame(channel, FrameType::Failure, encode_failure(rs, vf.reason));
        }
    } catch (const std::exception& e) {
        if (sid) notary.report_failure(*sid, std::string("receiver connection: ") + e.what());
        channel.close();
        return;
    }
    channel.close();
}

}  // namespace auditshare
