#pragma once

#include <stdexcept>
#include <string>

namespace auditshare {

enum class Err {
    // input validation
    MissingPIIColumn,
    EmptyPIIValue,
    SchemaEmpty,
    InsufficientFakes,
    OversizeObject,
    Unsatisfiable,
    DomainError,
    EmptyExpression,
    UnknownObject,
    ConfigError,
    // transport / protocol
    ChannelClosed,
    LengthMismatch,
    ProtocolDesync,
    DecryptFailure,
    ProtocolAborted,
    EmptySession,
    OutOfOrderProtocol,
    UnknownSession,
    Unauthorized,
    // certification / arbitration
    CertificateInvalid,
    VerificationFailure,
    SenderClaimMismatch,
    ReceiverClaimMismatch,
    // misc
    IoError,
};

const char* err_name(Err e);

class AuditError : public std::runtime_error {
  public:
    AuditError(Err code, const std::string& msg)
        : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}

    Err code() const { return code_; }

  private:
    Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) {
    throw AuditError(code, msg);
}

}  // namespace auditshare
