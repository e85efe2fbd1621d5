#include "diforms/errors.hpp"

namespace diforms {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::duplicate_atom: return "DuplicateAtom";
    case Errc::nonpositive_weight: return "NonpositiveWeight";
    case Errc::foreign_atom: return "ForeignAtom";
    case Errc::layout_mismatch: return "LayoutMismatch";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::non_hermitian_form: return "NonHermitianForm";
    case Errc::invalid_partition: return "InvalidPartition";
    case Errc::non_nested_tails: return "NonNestedTails";
    case Errc::overlapping_sets: return "OverlappingSets";
    case Errc::precondition_violated: return "PreconditionViolated";
    case Errc::eigen_failure: return "EigenFailure";
    case Errc::not_semibounded: return "NotSemibounded";
    case Errc::bad_range: return "BadRange";
    case Errc::not_closed: return "NotClosed";
    case Errc::no_identity: return "NoIdentity";
    case Errc::no_inverse: return "NoInverse";
    case Errc::not_associative: return "NotAssociative";
    case Errc::group_too_large: return "GroupTooLarge";
    case Errc::decomposition_unstable: return "DecompositionUnstable";
    case Errc::not_hermitian_coefficients: return "NotHermitianCoefficients";
    case Errc::not_invariant: return "NotInvariant";
    case Errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace diforms
