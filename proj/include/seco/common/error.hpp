#pragma once

#include <stdexcept>
#include <string>

namespace seco {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration supplied by a caller.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed bytes on the wire or on disk.
struct SerializationError : Error {
    using Error::Error;
};

// A party deviated from the expected message flow, or a crypto check failed mid-protocol.
struct ProtocolError : Error {
    using Error::Error;
};

struct ChannelClosed : ProtocolError {
    using ProtocolError::ProtocolError;
};

struct TimeoutError : ProtocolError {
    using ProtocolError::ProtocolError;
};

// Garbled row failed its tag check.
struct AuthError : ProtocolError {
    using ProtocolError::ProtocolError;
};

}  // namespace seco
