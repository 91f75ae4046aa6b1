#pragma once

#include <stdexcept>
#include <string>

namespace gbp {

// Dataset fails a propriety/validation rule. `rule` names the violated rule
// so callers (and the CLI exit path) can report it without parsing text.
class validation_error : public std::runtime_error {
 public:
  validation_error(std::string rule, const std::string& detail)
      : std::runtime_error(rule + ": " + detail), rule_(std::move(rule)) {}
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string rule_;
};

// Optimization / fitting failures (no interior maximum, Newton stall, ...).
class fit_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear algebra failures (non-PD matrix, singular system).
class matrix_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Acceptance-rejection sampler failures (refill limit, bad envelope).
class sampler_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inconsistent user configuration.
class config_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File / parse problems.
class io_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gbp
