#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "diforms/direct_integral.hpp"

namespace diforms {

/// Spectrum bounds of the weighted single-atom form v -> Q(extend_by_zero(v)),
/// i.e. of mu({alpha}) * H_alpha. Recorded per fiber as semibound metadata.
struct FiberSemibound {
  double lower = 0.0;
  double upper = 0.0;
};

/// A Hermitean quadratic form on the direct integral, given fiberwise by
/// Hermitian matrices H_alpha:
///
///   Q(phi, psi) = sum_alpha mu({alpha}) <phi(alpha), H_alpha psi(alpha)>_alpha.
///
/// Construction validates Hermiticity of every fiber matrix and records
/// per-fiber spectrum bounds, both weighted (of mu({alpha}) H_alpha) and
/// unweighted (of H_alpha itself; the spectrum of the representing operator).
/// Immutable after construction.
class DirectIntegralForm {
 public:
  DirectIntegralForm(FiberLayout layout, std::vector<Eigen::MatrixXcd> fiber_matrices);

  const FiberLayout& layout() const noexcept { return layout_; }
  std::size_t atom_count() const noexcept { return matrices_.size(); }
  const Eigen::MatrixXcd& matrix_at(std::size_t atom_index) const {
    return matrices_.at(atom_index);
  }
  const Eigen::MatrixXcd& matrix(Atom a) const;

  /// Weighted per-fiber spectrum bounds (metadata for the semibound records).
  const FiberSemibound& semibound_at(std::size_t atom_index) const {
    return weighted_bounds_.at(atom_index);
  }
  /// Unweighted spectrum bounds of H_alpha.
  const FiberSemibound& spectrum_at(std::size_t atom_index) const {
    return spectrum_bounds_.at(atom_index);
  }

 private:
  FiberLayout layout_;
  std::vector<Eigen::MatrixXcd> matrices_;
  std::vector<FiberSemibound> weighted_bounds_;
  std::vector<FiberSemibound> spectrum_bounds_;
};

/// Diagonal-value provider for black-box quadratic forms.
using QProvider = std::function<double(const Section&)>;

/// The real measure Omega_phi: Delta -> Q(P_Delta phi), stored atomwise in
/// space order together with its total variation.
struct SignedAtomicMeasure {
  std::vector<Atom> atoms;
  std::vector<double> values;
  double total_variation = 0.0;

  double total() const {
    double t = 0.0;
    for (double v : values) t += v;
    return t;
  }
  /// Omega(Delta), summed in atom order.
  double value_of(const IndexSet& delta) const;
};

struct OaCheck {
  bool additive = false;
  double residual = 0.0;
  double reference = 0.0;  // Q(P_Delta phi)
};

struct TailReport {
  std::vector<double> values;  // |Q(P_tail_n phi)| per truncation
  bool vanished = false;       // below tolerance at the last truncation
};

struct CsbResult {
  bool holds = false;
  double max_excess = 0.0;  // max over pairs of |Q(phi,psi)| - M sqrt(h h')
};

/// Evidence triple examined by the closability probe: norms of the sequence,
/// diagonal values Q(phi_n), and pairwise differences Q(phi_n - phi_m).
struct ClosabilityEvidence {
  std::vector<double> norms;
  std::vector<double> q_values;
  /// q_diff(i, j) for i < j, row-packed: entry for (i,j) at index
  /// i*(2n-i-1)/2 + (j-i-1). Use diff_at().
  std::vector<double> q_diffs;

  double diff_at(std::size_t i, std::size_t j) const;
  static ClosabilityEvidence from_sections(const QProvider& q, const std::vector<Section>& seq);
};

struct ProbeTolerances {
  double norm_below = 0.5;     // final norm must have fallen below this
  double cauchy_below = 1e-9;  // pairwise |Q(phi_n - phi_m)| on the window
  double value_above = 1e-6;   // |Q(phi_n)| exceeding this flags a violation
  std::size_t window = 3;      // trailing window length
};

struct ClosabilityVerdict {
  enum class Status { consistent, violation };
  Status status = Status::consistent;
  std::optional<ClosabilityEvidence> witness;  // populated on violation
};

/// Q(phi). Imaginary residue of the Hermitian evaluation is checked against
/// 1e-12 relative and discarded. Throws LayoutMismatch / NonHermitianForm.
double eval_q(const DirectIntegralForm& form, const Section& phi);

/// Q(phi, psi), conjugate-linear in the first argument.
Complex eval_sesq(const DirectIntegralForm& form, const Section& phi, const Section& psi);

/// Recovers the sesquilinear form from diagonal values only:
///   Q(phi,psi) = 1/4 [ Q(phi+psi) - Q(phi-psi) - i Q(phi+i psi) + i Q(phi-i psi) ].
/// Agrees with eval_sesq (conjugate-linear first argument) when the provider
/// is the diagonal of a Hermitean sesquilinear form.
Complex polarize(const QProvider& q, const Section& phi, const Section& psi);

/// Omega_phi({alpha}) = Q(P_{alpha} phi) for every atom of the space.
SignedAtomicMeasure omega_measure(const DirectIntegralForm& form, const Section& phi);

/// Radon-Nikodym density omega_phi(alpha) = Omega_phi({alpha}) / mu({alpha}),
/// atom-ordered.
std::vector<double> density(const DirectIntegralForm& form, const Section& phi);

/// Checks Q(P_Delta phi) = sum_i Q(P_{Delta_i} phi) for a finite partition.
/// The provider variant validates black-box forms; fiberwise forms satisfy
/// this by construction. Throws InvalidPartition.
OaCheck check_orthogonal_additivity(const QProvider& q, const Section& phi, const Partition& p,
                                    double rel_tol = 1e-11);
OaCheck check_orthogonal_additivity(const DirectIntegralForm& form, const Section& phi,
                                    const Partition& p, double rel_tol = 1e-11);

/// |Q(P_tail phi)| along a nested decreasing family of tails. Throws
/// NonNestedTails.
TailReport check_tail_vanishing(const QProvider& q, const Section& phi,
                                const std::vector<IndexSet>& nested_tails, double tol);
TailReport check_tail_vanishing(const DirectIntegralForm& form, const Section& phi,
                                const std::vector<IndexSet>& nested_tails, double tol);

/// Q(P_{Delta1} phi, P_{Delta2} psi) for disjoint index sets. Throws
/// OverlappingSets.
Complex cross_term(const DirectIntegralForm& form, const IndexSet& delta1, const IndexSet& delta2,
                   const Section& phi, const Section& psi);

/// Generalized Cauchy-Schwarz check: given |Q(phi)| <= M h(phi) on every
/// sampled section (precondition, else PreconditionViolated), verifies
/// |Q(phi,psi)| <= M sqrt(h(phi)) sqrt(h(psi)) + slack on every pair.
CsbResult csb_check(const QProvider& q, const QProvider& h, double M,
                    const std::vector<std::pair<Section, Section>>& samples,
                    double slack = 1e-10);

/// Finite-evidence closability probe. Can only falsify closability: when the
/// norms have decreased below tolerance and the pairwise Q-differences are
/// Cauchy-small on the trailing window, persistently large |Q(phi_n)| yields
/// a violation; anything else is consistent.
ClosabilityVerdict closability_probe(const ClosabilityEvidence& evidence,
                                     const ProbeTolerances& tol = {});
ClosabilityVerdict closability_probe(const QProvider& q, const std::vector<Section>& sequence,
                                     const ProbeTolerances& tol = {});

}  // namespace diforms
