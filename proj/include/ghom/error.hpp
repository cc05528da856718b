#ifndef GHOM_ERROR_HPP
#define GHOM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ghom {

enum class ErrorKind {
    InvalidInput,
    InvalidHomography,
    DegenerateScale,
    DegenerateConfiguration,
    GenerationFailure,
    NoModel,
    Parse,
    Data,
    Configuration,
};

inline const char *to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::InvalidHomography: return "invalid homography";
    case ErrorKind::DegenerateScale: return "degenerate scale";
    case ErrorKind::DegenerateConfiguration: return "degenerate configuration";
    case ErrorKind::GenerationFailure: return "generation failure";
    case ErrorKind::NoModel: return "no model";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Data: return "data error";
    case ErrorKind::Configuration: return "configuration error";
    }
    return "error";
}

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

    ErrorKind kind() const noexcept { return kind_; }
    // what() without the kind prefix.
    const std::string &message() const noexcept { return message_; }

  private:
    ErrorKind kind_;
    std::string message_;
};

} // namespace ghom

#endif // GHOM_ERROR_HPP
