#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qmpc {

// Error taxonomy. The CLI maps these onto exit codes (see tools/).
//   StructuralError  - mismatched widths/dims/metadata between protocol objects
//   DomainError      - value outside the contract's input domain
//   IntegrityError   - inconsistent replicated shares or seed fingerprints
//   StateError       - illegal object/session state (table reuse, phase regression)
//   TransportError   - peer unreachable, disconnect, timeout
//   DesyncError      - tag mismatch beyond the reordering window
//   ConfigError      - invalid model/run configuration
//   ParseError       - malformed input file (carries a byte offset)

struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DesyncError : TransportError {
    using TransportError::TransportError;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t byte_offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    std::size_t offset;
};

}  // namespace qmpc
