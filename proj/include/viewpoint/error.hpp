#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace viewpoint {

enum class ErrorCode {
    invalid_argument,
    malformed_input,
    duplicate_id,
    empty_text,
    not_found,
    io_failure,
    unavailable,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::malformed_input: return "malformed_input";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::empty_text: return "empty_text";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::unavailable: return "unavailable";
    }
    return "unknown";
}

/// Every recoverable failure in the library is reported as an Error carrying
/// a machine-readable code next to the human message.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), m_code(code)
    {}

    ErrorCode code() const noexcept { return m_code; }

  private:
    ErrorCode m_code;
};

}  // namespace viewpoint
