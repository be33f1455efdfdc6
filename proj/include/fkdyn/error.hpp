#pragma once

#include <stdexcept>
#include <string>

namespace fkdyn {

enum class ErrorCode {
  invalid_argument = 1,
  precondition = 2,
  size_cap = 3,
  not_realizable = 4,
  epoch_cap = 5,
  inconclusive = 6,
  internal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace fkdyn
