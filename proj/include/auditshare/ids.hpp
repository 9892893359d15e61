#pragma once

#include <array>
#include <cstring>
#include <string>

#include "auditshare/bytes.hpp"
#include "auditshare/errors.hpp"
#include "auditshare/rng.hpp"

namespace auditshare {

using SessionId = std::array<uint8_t, 16>;

inline std::string session_hex(const SessionId& id) {
    return hex(BytesView(id.data(), id.size()));
}

inline SessionId session_from_hex(std::string_view s) {
    Bytes b = from_hex(s);
    if (b.size() != 16) fail(Err::IoError, "session id must be 16 bytes");
    SessionId id;
    std::memcpy(id.data(), b.data(), 16);
    return id;
}

inline SessionId random_session_id(Rng& rng) {
    SessionId id;
    rng.fill(id.data(), id.size());
    return id;
}

}  // namespace auditshare
