#pragma once

#include <cstdint>
#include <random>

#include "diforms/spectral.hpp"

namespace diforms {

/// Discretised position operator on [k_min, k_max+1): atoms k with counting
/// measure, one fiber per unit cell I_k = [k, k+1) carrying n_per_cell
/// midpoint samples x_{k,j} = k + (j+1/2)/n. The quadrature weight h = 1/n
/// lives in the fiber metric, so Q(phi) = sum_k sum_j h x_{k,j} |phi_{k,j}|^2.
struct PositionModel {
  int k_min = 0;
  int k_max = 0;
  int n_per_cell = 1;
  AtomicMeasureSpace space;
  FiberLayout layout;
  DirectIntegralForm form;

  /// Midpoint abscissa of grid point j in cell k.
  double abscissa(int k, int j) const;

  /// Indicator of [cell_lo, cell_hi) as a section: all-ones fibers on the
  /// cells k = cell_lo .. cell_hi-1. Throws BadRange outside the truncation.
  Section indicator(int cell_lo, int cell_hi) const;
};

PositionModel position_model(int k_min, int k_max, int n_per_cell);

struct PositionSpectralReport {
  std::size_t sections_checked = 0;
  double max_rel_error = 0.0;
  bool all_strong = false;
  bool resolution_is_indicator = false;  // E(sigma) = chi_sigma on grid points
  double max_fiber_bound_ratio = 0.0;    // |q_k| / (max{|k|,|k+1|} |phi_k|^2)
};

/// Runs decompose + verify_representation over indicator and seeded random
/// sections, and checks that E(sigma) acts as multiplication by chi_sigma.
PositionSpectralReport position_spectral_check(const PositionModel& model,
                                               std::uint64_t seed = 1,
                                               std::size_t n_random_sections = 50);

/// Refinement family witnessing a non-closable form: level n lives on its own
/// one-cell model with n grid points and metric h = 1/n; the section is 1 at
/// the first grid point. The associated black-box form evaluates the shared
/// evaluation point, Q(phi) = |phi_1|^2, so norms shrink like 1/n while the
/// Q-values stay at 1 and all pairwise differences vanish.
struct SpikeFamily {
  struct Level {
    FiberLayout layout;
    Section section;
  };
  std::vector<Level> levels;

  /// Black-box evaluation-point form on one level's section.
  static double q_eval(const Section& phi);

  /// Norms, Q-values and cross-level Q-differences, ready for the probe.
  ClosabilityEvidence evidence() const;
};

/// Builds the family and runs the closability probe on its evidence.
/// Requires n_levels >= 3.
std::pair<SpikeFamily, ClosabilityVerdict> spike_family(int n_levels);

/// Alternating-sign scalar model for tail studies: atoms k = 1..n_atoms with
/// counting measure, H_k = ((-1)^k). With phi(k) = 2^{-k/2} the tail values
/// obey |Q(P_{k>=n} phi)| <= 2^{1-n}.
struct GeometricTailModel {
  AtomicMeasureSpace space;
  FiberLayout layout;
  DirectIntegralForm form;
  Section section;
};

GeometricTailModel geometric_tail_model(int n_atoms);

struct RandomModel {
  AtomicMeasureSpace space;
  FiberLayout layout;
  DirectIntegralForm form;
};

/// Seed-deterministic random model: weights log-uniform in [0.1, 10], fiber
/// dimensions uniform in [1, max_dim], Hermitian fibers built as U diag(l) U*
/// with eigenvalues uniform in [eig_lo, eig_hi]. When the range straddles 0
/// and the space has >= 2 atoms, the extreme eigenvalues are pinned to the
/// range endpoints so the model is guaranteed non-semibounded.
RandomModel random_model(std::uint64_t seed, int n_atoms, int max_dim, double eig_lo,
                         double eig_hi);

/// Seed-deterministic dense random section with standard complex Gaussian
/// fiber entries.
Section random_section(const FiberLayout& layout, std::mt19937_64& rng);
Section random_section(const FiberLayout& layout, std::uint64_t seed);

/// Random Hermitian matrix U diag(l) U* with eigenvalues uniform in
/// [eig_lo, eig_hi]; exposed for tests and the group module.
Eigen::MatrixXcd random_hermitian(int dim, double eig_lo, double eig_hi, std::mt19937_64& rng);

/// Haar-like random unitary from the QR of a complex Ginibre matrix.
Eigen::MatrixXcd random_unitary(int dim, std::mt19937_64& rng);

}  // namespace diforms
