#pragma once

#include <stdexcept>
#include <string>

namespace knudsen {

enum class ErrorCode {
    invalid_argument,
    domain,
    atom_cap,
    corner_hit,
    tracer_stuck,
    invariant,
    geometry_mismatch,
};

// Every failure raised by the library carries one of the codes above so the
// C API can map it to a status without string matching.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace knudsen
