#ifndef AEROMODAL_ERRORS_HPP
#define AEROMODAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aeromodal {

// Error kinds map onto CLI exit codes.
enum class ErrorKind {
  Parse = 2,          // malformed input files or configs
  Numerical = 3,      // solver/decomposition failures, degenerate inputs
  NonConvergence = 4, // iteration budgets exhausted where a hard result was required
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorKind::Parse, what) {}
  ParseError(const std::string& what, long line)
      : Error(ErrorKind::Parse, what + " (line " + std::to_string(line) + ")"), line(line) {}
  long line = -1;
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

} // namespace aeromodal

#endif
