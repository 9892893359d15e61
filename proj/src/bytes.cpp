#include "auditshare/bytes.hpp"

#include "auditshare/errors.hpp"

namespace auditshare {

static const char* kHexDigits = "0123456789abcdef";

std::string hex(BytesView b) {
    std::string out;
    out.reserve(b.size() * 2);
    for (uint8_t c : b) {
        out.push_back(kHexDigits[c >> 4]);
        out.push_back(kHexDigits[c & 0xf]);
    }
    return out;
}

static int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

Bytes from_hex(std::string_view s) {
    if (s.size() % 2 != 0) fail(Err::IoError, "odd hex length");
    Bytes out(s.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(s[2 * i]), lo = nibble(s[2 * i + 1]);
        if (hi < 0 || lo < 0) fail(Err::IoError, "bad hex digit");
        out[i] = uint8_t(hi << 4 | lo);
    }
    return out;
}

const char* err_name(Err e) {
    switch (e) {
        case Err::MissingPIIColumn: return "MissingPIIColumn";
        case Err::EmptyPIIValue: return "EmptyPIIValue";
        case Err::SchemaEmpty: return "SchemaEmpty";
        case Err::InsufficientFakes: return "InsufficientFakes";
        case Err::OversizeObject: return "OversizeObject";
        case Err::Unsatisfiable: return "Unsatisfiable";
        case Err::DomainError: return "DomainError";
        case Err::EmptyExpression: return "EmptyExpression";
        case Err::UnknownObject: return "UnknownObject";
        case Err::ConfigError: return "ConfigError";
        case Err::ChannelClosed: return "ChannelClosed";
        case Err::LengthMismatch: return "LengthMismatch";
        case Err::ProtocolDesync: return "ProtocolDesync";
        case Err::DecryptFailure: return "DecryptFailure";
        case Err::ProtocolAborted: return "ProtocolAborted";
        case Err::EmptySession: return "EmptySession";
        case Err::OutOfOrderProtocol: return "OutOfOrderProtocol";
        case Err::UnknownSession: return "UnknownSession";
        case Err::Unauthorized: return "Unauthorized";
        case Err::CertificateInvalid: return "CertificateInvalid";
        case Err::VerificationFailure: return "VerificationFailure";
        case Err::SenderClaimMismatch: return "SenderClaimMismatch";
        case Err::ReceiverClaimMismatch: return "ReceiverClaimMismatch";
        case Err::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace auditshare
