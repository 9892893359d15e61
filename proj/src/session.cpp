#include "auditshare/session.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "auditshare/fsio.hpp"

namespace auditshare {

namespace {

constexpr uint32_t kSenderMagic = 0x41535331;    // "ASS1"
constexpr uint32_t kReceiverMagic = 0x41535231;  // "ASR1"

void write_object_list(Writer& w, const std::vector<DataObject>& objs) {
    w.u32(uint32_t(objs.size()));
    for (const auto& o : objs) serialize_object(w, o);
}

std::vector<DataObject> read_object_list(Reader& r) {
    uint32_t n = r.u32();
    std::vector<DataObject> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) out.push_back(deserialize_object(r));
    return out;
}

}  // namespace

Bytes SessionRecordSender::serialize() const {
    Writer w;
    w.u32(kSenderMagic);
    w.u8(1);
    w.raw(session_id.data(), session_id.size());
    w.str(receiver_id);
    w.u32(message_length);
    w.u32(uint32_t(pairs.size()));
    for (const auto& p : pairs) {
        write_object_list(w, p.real_part);
        write_object_list(w, p.fake0);
        write_object_list(w, p.fake1);
    }
    w.raw(sending_root.v.data(), 32);
    w.blob(certificate.serialize());
    return w.take();
}

SessionRecordSender SessionRecordSender::deserialize(BytesView data) {
    Reader r(data);
    if (r.u32() != kSenderMagic || r.u8() != 1) fail(Err::IoError, "bad sender record");
    SessionRecordSender rec;
    rec.session_id = r.fixed<16>();
    rec.receiver_id = r.str();
    rec.message_length = r.u32();
    uint32_t n = r.u32();
    rec.pairs.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
        rec.pairs[i].pair_index = i;
        rec.pairs[i].real_part = read_object_list(r);
        rec.pairs[i].fake0 = read_object_list(r);
        rec.pairs[i].fake1 = read_object_list(r);
    }
    rec.sending_root.v = r.fixed<32>();
    rec.certificate = SharingCertificate::deserialize(r.blob());
    r.expect_done();
    return rec;
}

Bytes SessionRecordReceiver::serialize() const {
    Writer w;
    w.u32(kReceiverMagic);
    w.u8(1);
    w.raw(session_id.data(), session_id.size());
    w.str(receiver_id);
    w.u32(uint32_t(choices.size()));
    w.raw(choices.packed());
    for (const auto& objs : received) write_object_list(w, objs);
    w.raw(receiving_root.v.data(), 32);
    return w.take();
}

SessionRecordReceiver SessionRecordReceiver::deserialize(BytesView data) {
    Reader r(data);
    if (r.u32() != kReceiverMagic || r.u8() != 1) fail(Err::IoError, "bad receiver record");
    SessionRecordReceiver rec;
    rec.session_id = r.fixed<16>();
    rec.receiver_id = r.str();
    uint32_t n = r.u32();
    rec.choices = ot::ChoiceVector::from_packed(r.raw((n + 7) / 8), n);
    rec.received.resize(n);
    for (uint32_t i = 0; i < n; ++i) rec.received[i] = read_object_list(r);
    rec.receiving_root.v = r.fixed<32>();
    r.expect_done();
    return rec;
}

AllocationRecord extract_allocation(const SessionRecordSender& sender,
                                    const ot::ChoiceVector& choices) {
    if (choices.size() != sender.pairs.size())
        fail(Err::LengthMismatch, "choice vector does not match pair table");
    AllocationRecord rec;
    rec.receiver_id = sender.receiver_id;
    for (size_t i = 0; i < sender.pairs.size(); ++i) {
        const auto& kept = choices.bits[i] ? sender.pairs[i].fake1 : sender.pairs[i].fake0;
        const auto& dropped = choices.bits[i] ? sender.pairs[i].fake0 : sender.pairs[i].fake1;
        for (const auto& o : kept) rec.recv_set.insert(o.object_id);
        for (const auto& o : dropped) rec.drop_set.insert(o.object_id);
    }
    return rec;
}

SessionRecordSender run_sender_role(std::vector<ObjectPair> pairs, size_t message_length,
                                    const SessionId& session, const std::string& receiver_id,
                                    ByteChannel& to_receiver, ByteChannel& to_notary, Rng& rng,
                                    const std::array<uint8_t, 32>& notary_public_key) {
    std::vector<ot::MsgPair> msgs;
    msgs.reserve(pairs.size());
    for (const auto& p : pairs) msgs.push_back({p.m0_bytes, p.m1_bytes});

    SendingTree tree = build_sending_tree(msgs);
    write_frame(to_notary, FrameType::TreeNodes,
                encode_tree_nodes(session, receiver_id, tree.leaf_hashes));

    ot::OTSessionConfig config;
    ot::ot_send_batch(msgs, to_receiver, session, config, rng);

    Frame outcome = read_frame(to_notary);
    if (outcome.type == FrameType::Failure) {
        auto [sid, reason] = decode_failure(outcome.payload);
        fail(Err::VerificationFailure, reason);
    }
    if (outcome.type != FrameType::Certificate)
        fail(Err::ProtocolDesync, "expected CERTIFICATE from notary");
    SharingCertificate cert = SharingCertificate::deserialize(outcome.payload);
    if (!verify_certificate(cert, notary_public_key) || cert.session_id != session)
        fail(Err::CertificateInvalid, "notary certificate rejected");

    SessionRecordSender rec;
    rec.session_id = session;
    rec.receiver_id = receiver_id;
    rec.message_length = uint32_t(message_length);
    rec.pairs = std::move(pairs);
    rec.sending_root = tree.root;
    rec.certificate = cert;
    return rec;
}

SessionRecordReceiver run_receiver_role(const SessionId& session, const std::string& receiver_id,
                                        ByteChannel& to_sender, ByteChannel& to_notary,
                                        Rng& choice_rng, Rng& blind_rng,
                                        const std::array<uint8_t, 32>& notary_public_key) {
    ot::OTSessionConfig config;
    ot::OtReceiver transfer(to_sender, session, config);

    ot::ChoiceVector choices = ot::sample_choices(transfer.pair_count(), choice_rng);
    write_frame(to_notary, FrameType::ChoicesCommit,
                encode_choices_commit(session, receiver_id, choices));

    std::vector<Bytes> received = transfer.run(choices, blind_rng);
    ReceivingTreeRoot root = build_receiving_root(received);
    write_frame(to_notary, FrameType::RecvRoot, encode_recv_root(session, receiver_id, root));

    Frame outcome = read_frame(to_notary);
    if (outcome.type == FrameType::Failure) {
        auto [sid, reason] = decode_failure(outcome.payload);
        fail(Err::VerificationFailure, reason);
    }
    if (outcome.type != FrameType::Certificate)
        fail(Err::ProtocolDesync, "expected CERTIFICATE from notary");
    SharingCertificate cert = SharingCertificate::deserialize(outcome.payload);
    if (!verify_certificate(cert, notary_public_key) || cert.session_id != session)
        fail(Err::CertificateInvalid, "notary certificate rejected");

    SessionRecordReceiver rec;
    rec.session_id = session;
    rec.receiver_id = receiver_id;
    rec.choices = std::move(choices);
    rec.received.reserve(received.size());
    for (const auto& m : received) rec.received.push_back(deserialize_message(m));
    rec.receiving_root = root.root;
    return rec;
}

namespace {

ChannelPtr maybe_inject(ChannelPtr ch, const std::optional<FaultSpec>& fault, SessionLeg leg) {
    if (fault && fault->leg == leg)
        return std::make_unique<FaultInjectingChannel>(std::move(ch), fault->frame_index,
                                                       fault->byte_offset);
    return ch;
}

struct ReceiverResult {
    std::optional<SessionRecordReceiver> record;
    Err code = Err::ProtocolAborted;
    std::string message;
};

}  // namespace

SessionOutcome run_session(const std::vector<DataObject>& reals,
                           const std::vector<DataObject>& fakes, Notary& notary,
                           const SessionParams& params) {
    // per-receiver sub-seeds; the pair-side shuffle must differ per receiver
    std::optional<uint64_t> base = params.master_seed;
    auto sub_seed = [&](uint64_t salt) {
        return mix_seed(*base, salt * 1000003ULL + params.receiver_index);
    };
    SysRng sys;
    std::unique_ptr<DetRng> det;
    SessionId session;
    uint64_t pair_seed = 0;
    if (base) {
        det = std::make_unique<DetRng>(sub_seed(1), "session");
        session = random_session_id(*det);
        pair_seed = sub_seed(2);
    } else {
        session = random_session_id(sys);
        pair_seed = sys.u64();
    }

    std::vector<ObjectPair> pairs = build_pairs(reals, fakes, pair_seed);
    size_t message_length = pad_serialize_session(pairs, params.max_object_bytes);

    // channel endpoints for the three party links
    ChannelPtr s2r, r2s, s2n, n2s, r2n, n2r;
    std::unique_ptr<TcpListener> recv_listener, notary_listener;
    if (params.transport == Transport::InProcess) {
        std::tie(s2r, r2s) = make_loopback_pair();
        std::tie(s2n, n2s) = make_loopback_pair();
        std::tie(r2n, n2r) = make_loopback_pair();
    } else {
        recv_listener = std::make_unique<TcpListener>(0);
        notary_listener = std::make_unique<TcpListener>(0);
        std::thread accept_recv([&] { r2s = recv_listener->accept(); });
        std::thread accept_notary([&] {
            n2s = notary_listener->accept();
            n2r = notary_listener->accept();
        });
        s2r = tcp_connect("127.0.0.1", recv_listener->port());
        s2n = tcp_connect("127.0.0.1", notary_listener->port());
        r2n = tcp_connect("127.0.0.1", notary_listener->port());
        accept_recv.join();
        accept_notary.join();
    }

    s2r = maybe_inject(std::move(s2r), params.fault, SessionLeg::SenderToReceiver);
    r2s = maybe_inject(std::move(r2s), params.fault, SessionLeg::ReceiverToSender);
    s2n = maybe_inject(std::move(s2n), params.fault, SessionLeg::SenderToNotary);
    r2n = maybe_inject(std::move(r2n), params.fault, SessionLeg::ReceiverToNotary);
    n2r = maybe_inject(std::move(n2r), params.fault, SessionLeg::NotaryToReceiver);

    std::thread notary_sender_thread(
        [&] { serve_notary_sender_conn(notary, *n2s, session); });
    std::thread notary_receiver_thread(
        [&] { serve_notary_receiver_conn(notary, *n2r, session); });

    ReceiverResult recv_result;
    std::thread receiver_thread([&] {
        try {
            std::unique_ptr<DetRng> choice_rng, blind_rng;
            if (base) {
                choice_rng = std::make_unique<DetRng>(sub_seed(3), "recv-choices");
                blind_rng = std::make_unique<DetRng>(sub_seed(4), "recv-blind");
            }
            SysRng fallback;
            Rng& c = base ? static_cast<Rng&>(*choice_rng) : fallback;
            Rng& b = base ? static_cast<Rng&>(*blind_rng) : fallback;
            recv_result.record = run_receiver_role(session, params.receiver_id, *r2s, *r2n, c, b,
                                                   notary.public_key());
        } catch (const AuditError& e) {
            recv_result.code = e.code();
            recv_result.message = e.what();
            // discard partial data, tell the notary, unblock the sender
            try {
                write_frame(*r2n, FrameType::Failure, encode_failure(session, e.what()));
            } catch (...) {}
            try {
                write_frame(*r2s, FrameType::Abort, to_bytes(e.what()));
            } catch (...) {}
        } catch (const std::exception& e) {
            recv_result.code = Err::ProtocolAborted;
            recv_result.message = e.what();
        }
        r2s->close();
        r2n->close();
    });

    SessionOutcome outcome;
    try {
        std::unique_ptr<DetRng> sender_rng;
        if (base) sender_rng = std::make_unique<DetRng>(sub_seed(5), "sender-blind");
        SysRng fallback;
        Rng& srng = base ? static_cast<Rng&>(*sender_rng) : fallback;
        outcome.sender = run_sender_role(std::move(pairs), message_length, session,
                                         params.receiver_id, *s2r, *s2n, srng,
                                         notary.public_key());
    } catch (const AuditError& e) {
        outcome.failure = FailureReport{session, params.receiver_id, e.code(), e.what()};
    } catch (const std::exception& e) {
        outcome.failure =
            FailureReport{session, params.receiver_id, Err::ProtocolAborted, e.what()};
    }
    s2r->close();
    s2n->close();

    receiver_thread.join();
    notary_sender_thread.join();
    notary_receiver_thread.join();

    if (recv_result.record) {
        outcome.receiver = std::move(recv_result.record);
    } else if (!outcome.failure) {
        outcome.failure =
            FailureReport{session, params.receiver_id, recv_result.code, recv_result.message};
    }
    if (outcome.ok() && outcome.sender) outcome.certificate = outcome.sender->certificate;
    if (!outcome.ok()) {
        // a failed session yields no party records
        outcome.sender.reset();
        outcome.receiver.reset();
        outcome.certificate.reset();
    }
    return outcome;
}

void save_session_files(const std::filesystem::path& dir, const SessionOutcome& outcome) {
    std::filesystem::create_directories(dir);
    std::string sid_hex;
    std::string status;
    std::string receiver_id;
    if (outcome.ok()) {
        sid_hex = session_hex(outcome.sender->session_id);
        receiver_id = outcome.sender->receiver_id;
        status = "certified";
        write_file(dir / (sid_hex + ".sender"), outcome.sender->serialize());
        write_file(dir / (sid_hex + ".receiver"), outcome.receiver->serialize());
        write_file(dir / (sid_hex + ".cert"), outcome.certificate->serialize());
    } else {
        sid_hex = session_hex(outcome.failure->session_id);
        receiver_id = outcome.failure->receiver_id;
        status = std::string("failed:") + err_name(outcome.failure->code);
    }
    std::ofstream manifest(dir / "manifest", std::ios::app);
    manifest << sid_hex << " " << receiver_id << " " << status << "\n";
}

std::vector<StoredSession> load_session_files(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest");
    if (!manifest) fail(Err::IoError, "no session manifest in " + dir.string());
    std::vector<StoredSession> out;
    std::string line;
    while (std::getline(manifest, line)) {
        std::istringstream ls(line);
        std::string sid_hex, receiver_id, status;
        ls >> sid_hex >> receiver_id >> status;
        if (status != "certified") continue;
        StoredSession s;
        s.sender = SessionRecordSender::deserialize(read_file(dir / (sid_hex + ".sender")));
        s.receiver = SessionRecordReceiver::deserialize(read_file(dir / (sid_hex + ".receiver")));
        s.certificate = SharingCertificate::deserialize(read_file(dir / (sid_hex + ".cert")));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace auditshare
