#pragma once

#include <stdexcept>
#include <string>

namespace diforms {

/// Error kinds raised by the library. Each value corresponds to one named
/// validation or precondition failure of the module contracts.
enum class Errc {
  duplicate_atom,
  nonpositive_weight,
  foreign_atom,
  layout_mismatch,
  dimension_mismatch,
  non_hermitian_form,
  invalid_partition,
  non_nested_tails,
  overlapping_sets,
  precondition_violated,
  eigen_failure,
  not_semibounded,
  bad_range,
  not_closed,
  no_identity,
  no_inverse,
  not_associative,
  group_too_large,
  decomposition_unstable,
  not_hermitian_coefficients,
  not_invariant,
  config_error,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace diforms
