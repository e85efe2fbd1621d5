#pragma once

#include <complex>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "diforms/measure_space.hpp"

namespace diforms {

using Complex = std::complex<double>;

/// Fiber dimensions over a point-supported measure space. Each atom alpha
/// carries a finite-dimensional complex fiber of dimension d_alpha >= 1.
///
/// The fiber inner product is <u,v>_alpha = s_alpha * u^dagger v, where
/// s_alpha > 0 is an optional per-fiber metric scale (default 1). The scale
/// hosts quadrature weights of discretised function-space fibers; the measure
/// weight mu({alpha}) stays in the global inner product and never enters the
/// fiber metric.
///
/// Layouts are cheap to copy (shared immutable payload) and safe to read
/// concurrently.
class FiberLayout {
 public:
  FiberLayout(AtomicMeasureSpace space, std::vector<int> dims);
  FiberLayout(AtomicMeasureSpace space, std::vector<int> dims, std::vector<double> metric_scales);

  const AtomicMeasureSpace& space() const noexcept { return data_->space; }
  std::size_t atom_count() const noexcept { return data_->space.size(); }
  int dim_at(std::size_t i) const { return data_->dims.at(i); }
  int dim(Atom a) const;
  double metric_scale_at(std::size_t i) const { return data_->scales.at(i); }
  double metric_scale(Atom a) const;

  /// True when both layouts describe the same space, dimensions and metric.
  bool compatible(const FiberLayout& other) const noexcept;

 private:
  struct Data {
    AtomicMeasureSpace space;
    std::vector<int> dims;
    std::vector<double> scales;
  };
  std::shared_ptr<const Data> data_;
};

/// A section of the direct integral: one fiber vector per atom, stored
/// sparsely (absent atom = zero fiber). Value type; operations are pure.
class Section {
 public:
  explicit Section(FiberLayout layout) : layout_(std::move(layout)) {}

  static Section zero(FiberLayout layout) { return Section(std::move(layout)); }

  const FiberLayout& layout() const noexcept { return layout_; }

  /// Stores a fiber vector. Throws ForeignAtom / DimensionMismatch.
  void set_fiber(Atom a, Eigen::VectorXcd v);

  /// Fiber by atom index, or nullptr when the fiber is (implicitly) zero.
  const Eigen::VectorXcd* fiber_if_present(std::size_t atom_index) const;

  /// Dense fiber by atom label (zeros when absent). Throws ForeignAtom.
  Eigen::VectorXcd fiber(Atom a) const;

  /// Atom indices with a stored fiber, ascending.
  const std::map<std::size_t, Eigen::VectorXcd>& stored() const noexcept { return fibers_; }

  Section operator+(const Section& other) const;
  Section operator-(const Section& other) const;
  Section operator*(Complex scalar) const;

 private:
  FiberLayout layout_;
  std::map<std::size_t, Eigen::VectorXcd> fibers_;
};

inline Section operator*(Complex scalar, const Section& s) { return s * scalar; }

/// Weighted scalar product <phi|psi> = sum_alpha mu({alpha}) <phi(a),psi(a)>_a,
/// conjugate-linear in the first argument. Throws LayoutMismatch.
Complex inner(const Section& phi, const Section& psi);

double norm_sq(const Section& phi);
double norm(const Section& phi);

/// Orthogonal projection P_Delta: keeps fibers on atoms of delta, zeroes the
/// rest. Throws ForeignAtom when delta references an unknown atom.
Section project(const IndexSet& delta, const Section& phi);

/// Section supported on a single atom, carrying the given fiber vector.
Section extend_by_zero(const Eigen::VectorXcd& fiber_vector, Atom atom, const FiberLayout& layout);

}  // namespace diforms
