#include "auditshare/wire.hpp"

#include "auditshare/errors.hpp"

namespace auditshare {

const char* frame_name(FrameType t) {
    switch (t) {
        case FrameType::Hello: return "HELLO";
        case FrameType::SenderPoint: return "SENDER_POINT";
        case FrameType::ReceiverPoints: return "RECEIVER_POINTS";
        case FrameType::Ciphertexts: return "CIPHERTEXTS";
        case FrameType::Done: return "DONE";
        case FrameType::Abort: return "ABORT";
        case FrameType::TreeNodes: return "TREE_NODES";
        case FrameType::ChoicesCommit: return "CHOICES_COMMIT";
        case FrameType::RecvRoot: return "RECV_ROOT";
        case FrameType::Certificate: return "CERTIFICATE";
        case FrameType::Failure: return "FAILURE";
    }
    return "UNKNOWN";
}

static bool known_frame_type(uint8_t t) {
    return (t >= 1 && t <= 6) || (t >= 16 && t <= 20);
}

void write_frame(ByteChannel& ch, FrameType type, BytesView payload) {
    Writer w;
    w.u32(uint32_t(payload.size() + 1));
    w.u8(uint8_t(type));
    w.raw(payload);
    ch.send(w.bytes());
}

Frame read_frame(ByteChannel& ch) {
    Bytes head = ch.recv_exact(4);
    uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len = (len << 8) | head[i];
    if (len < 1 || len > kMaxFrameBytes) fail(Err::ProtocolDesync, "bad frame length");
    Bytes body = ch.recv_exact(len);
    if (!known_frame_type(body[0])) fail(Err::ProtocolDesync, "unknown frame type");
    Frame f;
    f.type = FrameType(body[0]);
    f.payload.assign(body.begin() + 1, body.end());
    return f;
}

Bytes expect_frame(ByteChannel& ch, FrameType type) {
    Frame f = read_frame(ch);
    if (f.type == type) return std::move(f.payload);
    if (f.type == FrameType::Abort)
        fail(Err::ProtocolAborted, "peer aborted: " + to_string(f.payload));
    fail(Err::ProtocolDesync, std::string("expected ") + frame_name(type) + ", got " +
                                  frame_name(f.type));
}

}  // namespace auditshare
