#ifndef OJACC_ERROR_HPP_
#define OJACC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ojacc {

// Error classes map one-to-one onto CLI exit codes.
enum class ErrorKind { Usage = 1, Parse = 2, Verify = 3, Cycle = 4, Guard = 5 };

class Error : public std::runtime_error {
 public:
   Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
   auto kind() const -> ErrorKind { return kind_; }
   auto exit_code() const -> int { return static_cast<int>(kind_); }

 private:
   ErrorKind kind_;
};

inline auto parse_error(const std::string& m) -> Error { return Error(ErrorKind::Parse, m); }
inline auto usage_error(const std::string& m) -> Error { return Error(ErrorKind::Usage, m); }
inline auto cycle_error(const std::string& m) -> Error { return Error(ErrorKind::Cycle, m); }
inline auto guard_error(const std::string& m) -> Error { return Error(ErrorKind::Guard, m); }
inline auto verify_error(const std::string& m) -> Error { return Error(ErrorKind::Verify, m); }

}  // namespace ojacc

#endif  // OJACC_ERROR_HPP_
