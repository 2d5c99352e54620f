#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coliee {

enum class ErrorKind {
    parse,
    integrity,
    empty_input,
    not_found,
    validation,
    completeness,
    config,
    undefined_similarity,
    training,
    fill,
    precondition,
    io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return m_kind; }

  private:
    ErrorKind m_kind;
};

}  // namespace coliee
