#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracgal {

/// Raised when a caller passes parameters outside an operation's domain.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot deliver its accuracy contract.
/// `index()` identifies the offending interval, mode or sample when one exists.
class NumericalError : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit NumericalError(const std::string& what, std::size_t index = npos)
      : std::runtime_error(index == npos ? what : what + " (index " + std::to_string(index) + ")"),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace detail
}  // namespace fracgal
