#pragma once

#include <stdexcept>
#include <string>

namespace dampwave {

/// A computation ran but could not produce a trustworthy answer: overflow,
/// a zero on a boundary, an unstable truncation ladder, an exhausted budget.
/// Precondition violations use std::invalid_argument instead.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace dampwave
