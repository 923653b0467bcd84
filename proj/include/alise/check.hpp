#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace alise {

/// Error raised by any violated precondition or malformed input.
class alise_error : public std::runtime_error {
 public:
  explicit alise_error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
[[noreturn]] inline void raise_check(const char* file, int line, const std::string& msg) {
  std::ostringstream os;
  os << file << ":" << line << ": " << msg;
  throw alise_error(os.str());
}
}  // namespace detail

}  // namespace alise

#define ALISE_CHECK(cond, msg)                                        \
  do {                                                                \
    if (!(cond)) {                                                    \
      std::ostringstream os_;                                         \
      os_ << msg;                                                     \
      ::alise::detail::raise_check(__FILE__, __LINE__, os_.str());    \
    }                                                                 \
  } while (0)
