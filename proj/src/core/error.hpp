#pragma once

#include <stdexcept>
#include <string>

namespace opstego {

enum class ErrorCode {
  InvalidArgument = 1,
  Parse,
  Io,
  DimensionMismatch,
  Degenerate,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace opstego
