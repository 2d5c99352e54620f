#include "coliee/error.hpp"

namespace coliee {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::parse: return "parse error";
    case ErrorKind::integrity: return "integrity error";
    case ErrorKind::empty_input: return "empty input";
    case ErrorKind::not_found: return "not found";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::completeness: return "completeness error";
    case ErrorKind::config: return "config error";
    case ErrorKind::undefined_similarity: return "undefined similarity";
    case ErrorKind::training: return "training error";
    case ErrorKind::fill: return "fill error";
    case ErrorKind::precondition: return "precondition violated";
    case ErrorKind::io: return "i/o error";
    }
    return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), m_kind(kind)
{}

}  // namespace coliee
