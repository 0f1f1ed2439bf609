#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ontoq {

// A hypothesis of a construction does not hold for the given data
// (e.g. a density that is not strictly positive). The CLI maps these to exit code 1.
class domain_violation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The requested object cannot be materialised as an explicit table.
class unsupported_size : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A corrected interaction energy came out non-positive.
class spectral_positivity_error : public domain_violation {
 public:
  spectral_positivity_error(const std::string& what, std::size_t i, std::size_t j)
      : domain_violation(what), row_(i), col_(j) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

// Malformed input file (bad magic, wrong column set, truncated data).
class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ontoq
