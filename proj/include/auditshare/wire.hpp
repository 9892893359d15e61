#pragma once

#include "auditshare/channel.hpp"
#include "auditshare/serial.hpp"

namespace auditshare {

// Framed wire format shared by the OT and notary protocols:
// 4-byte big-endian length (covering type byte + payload), 1-byte type,
// payload.
enum class FrameType : uint8_t {
    Hello = 1,
    SenderPoint = 2,
    ReceiverPoints = 3,
    Ciphertexts = 4,
    Done = 5,
    Abort = 6,
    TreeNodes = 16,
    ChoicesCommit = 17,
    RecvRoot = 18,
    Certificate = 19,
    Failure = 20,
};

const char* frame_name(FrameType t);

constexpr size_t kMaxFrameBytes = 64u << 20;

struct Frame {
    FrameType type;
    Bytes payload;
};

void write_frame(ByteChannel& ch, FrameType type, BytesView payload);
Frame read_frame(ByteChannel& ch);

// Reads one frame and requires the given type; an Abort frame raises
// ProtocolAborted, anything else ProtocolDesync.
Bytes expect_frame(ByteChannel& ch, FrameType type);

}  // namespace auditshare
