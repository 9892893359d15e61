#include "auditshare/otransfer.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>

#include "auditshare/errors.hpp"
#include "auditshare/parallel.hpp"

namespace auditshare::ot {

namespace {

constexpr uint32_t kHelloMagic = 0x41534f54;  // "ASOT"
constexpr uint8_t kWireVersion = 1;
constexpr size_t kCiphertextChunk = 4096;  // pairs per CIPHERTEXTS frame

struct Hello {
    SessionId session;
    uint32_t n_pairs;
    uint32_t msg_len;
    OTSessionConfig config;
};

Bytes encode_hello(const Hello& h) {
    Writer w;
    w.u32(kHelloMagic);
    w.u8(kWireVersion);
    w.raw(h.session.data(), h.session.size());
    w.u32(h.n_pairs);
    w.u32(h.msg_len);
    w.u8(h.config.group_id);
    w.u8(h.config.kdf_id);
    w.u8(h.config.aead_id);
    return w.take();
}

Hello decode_hello(BytesView payload) {
    Reader r(payload);
    if (r.u32() != kHelloMagic || r.u8() != kWireVersion)
        fail(Err::ProtocolDesync, "bad handshake magic");
    Hello h;
    h.session = r.fixed<16>();
    h.n_pairs = r.u32();
    h.msg_len = r.u32();
    h.config.group_id = r.u8();
    h.config.kdf_id = r.u8();
    h.config.aead_id = r.u8();
    r.expect_done();
    return h;
}

Bytes ciphertext_ad(const SessionId& session, uint32_t pair_index, uint8_t side) {
    Writer w;
    w.raw(to_bytes("ASOTv1-ct"));
    w.raw(session.data(), session.size());
    w.u32(pair_index);
    w.u8(side);
    return w.take();
}

}  // namespace

Bytes ChoiceVector::packed() const {
    Bytes out((bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) out[i / 8] |= uint8_t(1u << (i % 8));
    }
    return out;
}

ChoiceVector ChoiceVector::from_packed(BytesView packed, size_t n_bits) {
    if (packed.size() != (n_bits + 7) / 8)
        fail(Err::LengthMismatch, "packed choice vector has wrong size");
    ChoiceVector cv;
    cv.bits.resize(n_bits);
    for (size_t i = 0; i < n_bits; ++i) cv.bits[i] = (packed[i / 8] >> (i % 8)) & 1;
    return cv;
}

ChoiceVector sample_choices(size_t n_pairs, Rng& rng) {
    if (n_pairs < 1) fail(Err::DomainError, "need at least one pair");
    ChoiceVector cv;
    cv.bits.resize(n_pairs);
    for (auto& b : cv.bits) b = rng.bit();
    return cv;
}

ChoiceVector sample_choices(size_t n_pairs, std::optional<uint64_t> seed) {
    if (seed) {
        DetRng rng(*seed, "choices");
        return sample_choices(n_pairs, rng);
    }
    SysRng rng;
    return sample_choices(n_pairs, rng);
}

AeadKey derive_pair_key(const GroupElem& shared, const SessionId& session, uint32_t pair_index,
                        uint8_t side) {
    Writer w;
    w.raw(to_bytes("ASOTv1-key"));
    w.raw(shared.v.data(), shared.v.size());
    w.raw(session.data(), session.size());
    w.u32(pair_index);
    w.u8(side);
    AeadKey key;
    key.v = sha256(w.bytes()).v;
    return key;
}

std::optional<Bytes> open_pair_ciphertext(const AeadKey& key, const SessionId& session,
                                          uint32_t pair_index, uint8_t side, BytesView ct) {
    return aead_open(key, 0, ciphertext_ad(session, pair_index, side), ct);
}

SenderTranscript ot_send_batch(const std::vector<MsgPair>& pairs, ByteChannel& channel,
                               const SessionId& session, const OTSessionConfig& config,
                               Rng& rng) {
    if (pairs.empty()) fail(Err::EmptySession, "no pairs to send");
    size_t msg_len = pairs[0].m0.size();
    for (const auto& p : pairs) {
        if (p.m0.size() != msg_len || p.m1.size() != msg_len)
            fail(Err::LengthMismatch, "OT messages must share one byte length");
    }

    Hello hello{session, uint32_t(pairs.size()), uint32_t(msg_len), config};
    write_frame(channel, FrameType::Hello, encode_hello(hello));
    Hello echo = decode_hello(expect_frame(channel, FrameType::Hello));
    if (echo.session != session || echo.n_pairs != pairs.size() || echo.msg_len != msg_len ||
        !(echo.config == config))
        fail(Err::ProtocolDesync, "handshake parameters disagree");

    Scalar a = Scalar::random(rng);
    GroupElem big_a = base_mul(a);
    write_frame(channel, FrameType::SenderPoint, BytesView(big_a.v.data(), big_a.v.size()));

    Bytes points = expect_frame(channel, FrameType::ReceiverPoints);
    if (points.size() != pairs.size() * 32)
        fail(Err::ProtocolDesync, "receiver point list has wrong size");

    SenderTranscript transcript;
    transcript.sender_point = big_a;
    transcript.message_length = msg_len;
    transcript.receiver_points.resize(pairs.size());

    // per-pair ciphertexts, both sides; group math parallelized, frames
    // emitted in pair order afterwards
    size_t ct_len = msg_len + kAeadOverhead;
    Bytes cts(pairs.size() * 2 * ct_len);
    auto& recv_points = transcript.receiver_points;
    parallel_for(pairs.size(), [&](size_t i) {
        GroupElem b_point;
        std::memcpy(b_point.v.data(), points.data() + 32 * i, 32);
        recv_points[i] = b_point;
        GroupElem shared0 = mul(a, b_point);
        GroupElem shared1 = mul(a, sub(b_point, big_a));
        AeadKey k0 = derive_pair_key(shared0, session, uint32_t(i), 0);
        AeadKey k1 = derive_pair_key(shared1, session, uint32_t(i), 1);
        Bytes c0 = aead_seal(k0, 0, ciphertext_ad(session, uint32_t(i), 0), pairs[i].m0);
        Bytes c1 = aead_seal(k1, 0, ciphertext_ad(session, uint32_t(i), 1), pairs[i].m1);
        std::memcpy(cts.data() + (2 * i) * ct_len, c0.data(), ct_len);
        std::memcpy(cts.data() + (2 * i + 1) * ct_len, c1.data(), ct_len);
    });

    for (size_t start = 0; start < pairs.size(); start += kCiphertextChunk) {
        size_t count = std::min(kCiphertextChunk, pairs.size() - start);
        Writer w;
        w.u32(uint32_t(start));
        w.u32(uint32_t(count));
        w.raw(cts.data() + start * 2 * ct_len, count * 2 * ct_len);
        write_frame(channel, FrameType::Ciphertexts, w.bytes());
    }
    write_frame(channel, FrameType::Done, {});
    return transcript;
}

OtReceiver::OtReceiver(ByteChannel& channel, const SessionId& session,
                       const OTSessionConfig& config)
    : channel_(channel), session_(session), config_(config) {
    Hello hello = decode_hello(expect_frame(channel, FrameType::Hello));
    if (hello.session != session) fail(Err::ProtocolDesync, "unexpected session id");
    if (!(hello.config == config)) fail(Err::ProtocolDesync, "cipher suite disagreement");
    if (hello.n_pairs < 1) fail(Err::EmptySession, "sender announced zero pairs");
    n_pairs_ = hello.n_pairs;
    msg_len_ = hello.msg_len;
}

std::vector<Bytes> OtReceiver::run(const ChoiceVector& choices, Rng& rng) {
    ByteChannel& channel = channel_;
    const SessionId& session = session_;
    if (choices.size() != n_pairs_)
        fail(Err::LengthMismatch, "choice vector does not match session pair count");
    Hello hello{session_, uint32_t(n_pairs_), uint32_t(msg_len_), config_};
    write_frame(channel, FrameType::Hello, encode_hello(hello));

    Bytes point_payload = expect_frame(channel, FrameType::SenderPoint);
    if (point_payload.size() != 32) fail(Err::ProtocolDesync, "bad sender point size");
    GroupElem big_a;
    std::memcpy(big_a.v.data(), point_payload.data(), 32);
    if (!big_a.valid()) fail(Err::DecryptFailure, "sender point not a valid group element");

    size_t n = choices.size();
    std::vector<Scalar> secrets(n);
    Bytes points(n * 32);
    std::vector<AeadKey> keys(n);
    for (auto& s : secrets) s = Scalar::random(rng);  // sequential: rng is stateful
    parallel_for(n, [&](size_t i) {
        GroupElem b_point = base_mul(secrets[i]);
        if (choices.bits[i]) b_point = add(b_point, big_a);
        std::memcpy(points.data() + 32 * i, b_point.v.data(), 32);
        keys[i] = derive_pair_key(mul(secrets[i], big_a), session, uint32_t(i),
                                  choices.bits[i]);
    });
    write_frame(channel, FrameType::ReceiverPoints, points);

    size_t ct_len = msg_len_ + kAeadOverhead;
    Bytes cts(n * 2 * ct_len);
    std::vector<bool> seen(n, false);
    size_t seen_count = 0;
    while (seen_count < n) {
        Reader r(expect_frame(channel, FrameType::Ciphertexts));
        uint32_t start = r.u32();
        uint32_t count = r.u32();
        if (uint64_t(start) + count > n || r.remaining() != uint64_t(count) * 2 * ct_len)
            fail(Err::ProtocolDesync, "bad ciphertext chunk");
        Bytes chunk = r.raw(count * 2 * ct_len);
        std::memcpy(cts.data() + start * 2 * ct_len, chunk.data(), chunk.size());
        for (uint32_t i = start; i < start + count; ++i) {
            if (seen[i]) fail(Err::ProtocolDesync, "duplicate ciphertext chunk");
            seen[i] = true;
            ++seen_count;
        }
    }
    expect_frame(channel, FrameType::Done);

    // decrypt only after the full transcript arrived: a failed session must
    // yield no plaintexts
    std::vector<Bytes> out(n);
    std::atomic<bool> bad{false};
    parallel_for(n, [&](size_t i) {
        uint8_t side = choices.bits[i];
        const uint8_t* ct = cts.data() + (2 * i + side) * ct_len;
        auto pt = open_pair_ciphertext(keys[i], session, uint32_t(i), side,
                                       BytesView(ct, ct_len));
        if (!pt) {
            bad.store(true);
            return;
        }
        out[i] = std::move(*pt);
    });
    if (bad.load()) fail(Err::DecryptFailure, "ciphertext failed authentication");
    return out;
}

std::vector<Bytes> ot_receive_batch(const ChoiceVector& choices, ByteChannel& channel,
                                    const SessionId& session, const OTSessionConfig& config,
                                    Rng& rng) {
    OtReceiver receiver(channel, session, config);
    return receiver.run(choices, rng);
}

}  // namespace auditshare::ot
