#include "diforms/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace diforms {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool exactly_diagonal(const Eigen::MatrixXcd& h) {
  for (Eigen::Index r = 0; r < h.rows(); ++r)
    for (Eigen::Index c = 0; c < h.cols(); ++c) {
      if (r == c) {
        if (h(r, c).imag() != 0.0) return false;
      } else if (h(r, c) != Complex(0.0, 0.0)) {
        return false;
      }
    }
  return true;
}

FiberSpectralData decompose_fiber(Atom atom, const Eigen::MatrixXcd& h) {
  FiberSpectralData out;
  out.atom = atom;
  const Eigen::Index d = h.rows();

  if (exactly_diagonal(h)) {
    // Diagonal fibers decompose exactly: sorted diagonal with a permutation
    // matrix, ties kept in input order.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&h](Eigen::Index a, Eigen::Index b) { return h(a, a).real() < h(b, b).real(); });
    out.eigenvalues.resize(d);
    out.eigenvectors = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      out.eigenvalues(i) = h(order[i], order[i]).real();
      out.eigenvectors(order[i], i) = 1.0;
    }
    out.reconstruction_residual = 0.0;
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success)
    raise(Errc::eigen_failure, "eigensolver did not converge at atom " + std::to_string(atom));
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();

  const double h_scale = 1.0 + (h.size() ? h.cwiseAbs().maxCoeff() : 0.0);
  const double ortho = (out.eigenvectors.adjoint() * out.eigenvectors -
                        Eigen::MatrixXcd::Identity(d, d))
                           .cwiseAbs()
                           .maxCoeff();
  out.reconstruction_residual =
      (out.eigenvectors * out.eigenvalues.asDiagonal() * out.eigenvectors.adjoint() - h)
          .cwiseAbs()
          .maxCoeff();
  if (ortho > 1e-10 || out.reconstruction_residual > 1e-9 * h_scale)
    raise(Errc::eigen_failure,
          "eigensolve at atom " + std::to_string(atom) + " failed the residual check");
  return out;
}

/// Ranges [begin, end) of eigenvalue clusters closer than 1e-10 * scale.
std::vector<std::pair<Eigen::Index, Eigen::Index>> eigen_clusters(const Eigen::VectorXd& ev) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  const Eigen::Index d = ev.size();
  if (d == 0) return out;
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  Eigen::Index begin = 0;
  for (Eigen::Index i = 1; i < d; ++i) {
    if (ev(i) - ev(i - 1) > 1e-10 * scale) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  out.emplace_back(begin, d);
  return out;
}

AtomicSpectralMeasure fiber_measure_at(const SpectralModel& model, std::size_t idx,
                                       const Eigen::VectorXcd& v) {
  const FiberSpectralData& fib = model.fiber_at(idx);
  const double s = model.layout().metric_scale_at(idx);
  AtomicSpectralMeasure out;
  const double total_raw = s * v.squaredNorm();
  for (auto [begin, end] : eigen_clusters(fib.eigenvalues)) {
    double mass = 0.0;
    for (Eigen::Index k = begin; k < end; ++k) {
      const Complex c = fib.eigenvectors.col(k).dot(v);
      mass += s * std::norm(c);
    }
    // Floor rounding noise so eigenvector sections produce clean point masses.
    if (mass <= 1e-20 * total_raw) continue;
    out.atoms.emplace_back(fib.eigenvalues(begin), mass);
    out.total_mass += mass;
  }
  return out;
}

}  // namespace

const char* to_string(RepresentationVerdict v) noexcept {
  switch (v) {
    case RepresentationVerdict::strong: return "strong";
    case RepresentationVerdict::weak: return "weak";
    case RepresentationVerdict::fail: return "fail";
  }
  return "fail";
}

BorelSetSpec::BorelSetSpec(std::vector<Interval> intervals) {
  std::vector<Interval> kept;
  for (Interval iv : intervals) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi)) raise(Errc::bad_range, "NaN interval endpoint");
    if (iv.lo == -kInf) iv.lo_closed = false;
    if (iv.hi == kInf) iv.hi_closed = false;
    if (iv.lo > iv.hi) continue;
    if (iv.lo == iv.hi && !(iv.lo_closed && iv.hi_closed)) continue;
    if (iv.lo == -kInf && iv.hi == -kInf) continue;
    if (iv.lo == kInf) continue;
    kept.push_back(iv);
  }
  std::sort(kept.begin(), kept.end(), [](const Interval& a, const Interval& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.lo_closed && !b.lo_closed;
  });
  for (const Interval& iv : kept) {
    if (!intervals_.empty()) {
      Interval& cur = intervals_.back();
      const bool touches =
          iv.lo < cur.hi || (iv.lo == cur.hi && (cur.hi_closed || iv.lo_closed));
      if (touches) {
        if (iv.hi > cur.hi) {
          cur.hi = iv.hi;
          cur.hi_closed = iv.hi_closed;
        } else if (iv.hi == cur.hi) {
          cur.hi_closed = cur.hi_closed || iv.hi_closed;
        }
        continue;
      }
    }
    intervals_.push_back(iv);
  }
}

BorelSetSpec BorelSetSpec::all() { return BorelSetSpec({{-kInf, kInf, false, false}}); }

BorelSetSpec BorelSetSpec::closed(double lo, double hi) {
  return BorelSetSpec({{lo, hi, true, true}});
}

BorelSetSpec BorelSetSpec::half_open(double lo, double hi) {
  return BorelSetSpec({{lo, hi, true, false}});
}

BorelSetSpec BorelSetSpec::below(double hi, bool closed) {
  return BorelSetSpec({{-kInf, hi, false, closed}});
}

bool BorelSetSpec::contains(double x) const noexcept {
  for (const Interval& iv : intervals_) {
    const bool above_lo = x > iv.lo || (x == iv.lo && iv.lo_closed);
    const bool below_hi = x < iv.hi || (x == iv.hi && iv.hi_closed);
    if (above_lo && below_hi) return true;
  }
  return false;
}

bool BorelSetSpec::bounded() const noexcept {
  for (const Interval& iv : intervals_)
    if (iv.lo == -kInf || iv.hi == kInf) return false;
  return true;
}

bool BorelSetSpec::compact_like() const noexcept {
  if (!bounded()) return false;
  for (const Interval& iv : intervals_)
    if (!iv.lo_closed || !iv.hi_closed) return false;
  return true;
}

BorelSetSpec BorelSetSpec::united(const BorelSetSpec& other) const {
  std::vector<Interval> all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return BorelSetSpec(std::move(all));
}

double AtomicSpectralMeasure::mass_in(const BorelSetSpec& sigma) const {
  double m = 0.0;
  for (const auto& [lambda, w] : atoms)
    if (sigma.contains(lambda)) m += w;
  return m;
}

SpectralModel decompose(const DirectIntegralForm& form) {
  SpectralModel model(form);
  const std::size_t n = form.atom_count();
  model.fibers_.reserve(n);
  SemiboundSummary sb{kInf, -kInf, kInf, -kInf};
  for (std::size_t i = 0; i < n; ++i) {
    model.fibers_.push_back(
        decompose_fiber(form.layout().space().atom_at(i), form.matrix_at(i)));
    const double mu = form.layout().space().weight_at(i);
    const Eigen::VectorXd& ev = model.fibers_.back().eigenvalues;
    sb.spectrum_min = std::min(sb.spectrum_min, ev.minCoeff());
    sb.spectrum_max = std::max(sb.spectrum_max, ev.maxCoeff());
    sb.m_below = std::min(sb.m_below, mu * ev.minCoeff());
    sb.m_above = std::max(sb.m_above, mu * ev.maxCoeff());
  }
  if (n == 0) sb = SemiboundSummary{};
  model.semibound_ = sb;
  return model;
}

AtomicSpectralMeasure fiber_measure(const SpectralModel& model, Atom atom, const Section& phi) {
  auto idx = model.layout().space().index_of(atom);
  if (!idx) raise(Errc::foreign_atom, "atom " + std::to_string(atom) + " not in layout");
  if (!model.layout().compatible(phi.layout()))
    raise(Errc::layout_mismatch, "section does not match the model layout");
  const Eigen::VectorXcd* v = phi.fiber_if_present(*idx);
  if (!v) return {};
  return fiber_measure_at(model, *idx, *v);
}

AtomicSpectralMeasure global_measure(const SpectralModel& model, const Section& phi) {
  if (!model.layout().compatible(phi.layout()))
    raise(Errc::layout_mismatch, "section does not match the model layout");
  // Coalesce eigenvalues across atoms by exact equality only; near-equal
  // values stay distinct so reports remain deterministic.
  std::map<double, double> masses;
  for (const auto& [i, v] : phi.stored()) {
    const double mu = model.layout().space().weight_at(i);
    for (const auto& [lambda, w] : fiber_measure_at(model, i, v).atoms)
      masses[lambda] += mu * w;
  }
  AtomicSpectralMeasure out;
  out.atoms.assign(masses.begin(), masses.end());
  for (const auto& [lambda, w] : out.atoms) out.total_mass += w;
  return out;
}

Section resolution_apply(const SpectralModel& model, const BorelSetSpec& sigma,
                         const Section& phi) {
  if (!model.layout().compatible(phi.layout()))
    raise(Errc::layout_mismatch, "section does not match the model layout");
  Section out(phi.layout());
  for (const auto& [i, v] : phi.stored()) {
    const FiberSpectralData& fib = model.fiber_at(i);
    std::vector<Eigen::Index> sel;
    for (Eigen::Index k = 0; k < fib.eigenvalues.size(); ++k)
      if (sigma.contains(fib.eigenvalues(k))) sel.push_back(k);
    if (sel.empty()) continue;
    Eigen::MatrixXcd basis(fib.eigenvectors.rows(), static_cast<Eigen::Index>(sel.size()));
    for (std::size_t c = 0; c < sel.size(); ++c) basis.col(static_cast<Eigen::Index>(c)) =
        fib.eigenvectors.col(sel[c]);
    out.set_fiber(model.layout().space().atom_at(i), basis * (basis.adjoint() * v));
  }
  return out;
}

double commute_check(const SpectralModel& model, const BorelSetSpec& sigma, const IndexSet& delta,
                     const Section& phi) {
  const Section a = project(delta, resolution_apply(model, sigma, phi));
  const Section b = resolution_apply(model, sigma, project(delta, phi));
  return norm(a - b);
}

Moments moments(const AtomicSpectralMeasure& measure) {
  Moments m;
  for (const auto& [lambda, w] : measure.atoms) {
    m.first += lambda * w;
    m.first_abs += std::abs(lambda) * w;
    m.second += lambda * lambda * w;
  }
  return m;
}

Section apply_T(const SpectralModel& model, const Section& phi) {
  if (!model.layout().compatible(phi.layout()))
    raise(Errc::layout_mismatch, "section does not match the model layout");
  Section out(phi.layout());
  for (const auto& [i, v] : phi.stored())
    out.set_fiber(model.layout().space().atom_at(i), model.form().matrix_at(i) * v);
  return out;
}

bool is_in_dfin(const SpectralModel& model, const Section& phi, const IndexSet& delta,
                const BorelSetSpec& sigma) {
  // mu(Delta) is finite for every stored truncation; the binding conditions
  // are compactness of sigma and R_sigma P_Delta phi = phi.
  if (!sigma.compact_like()) return false;
  const Section reduced = resolution_apply(model, sigma, project(delta, phi));
  return norm(reduced - phi) <= 1e-12 * (1.0 + norm(phi));
}

double graph_norm(const SpectralModel& model, const Section& phi) {
  double total = norm_sq(phi);
  for (const auto& [i, v] : phi.stored())
    total += model.layout().space().weight_at(i) *
             moments(fiber_measure_at(model, i, v)).first_abs;
  return std::sqrt(total);
}

NormEquivalenceResult norm_equivalence_check(const SpectralModel& model, double m,
                                             std::span<const Section> samples,
                                             double rel_slack) {
  if (m < 0.0) raise(Errc::bad_range, "semibound m must be >= 0");
  // The semibound is a statement about the spectrum of the representing
  // operator, i.e. the unweighted fiber eigenvalues.
  if (model.semibound().spectrum_min < -m - 1e-12)
    raise(Errc::not_semibounded, "spectrum reaches " +
                                     std::to_string(model.semibound().spectrum_min) +
                                     " below the declared semibound -" + std::to_string(m));
  NormEquivalenceResult out;
  out.max_upper_excess = -kInf;
  out.max_lower_excess = -kInf;
  for (const Section& phi : samples) {
    const double nsq = norm_sq(phi);
    const double q = eval_q(model.form(), phi);
    const double gn = graph_norm(model, phi);
    const double gn_sq = gn * gn;
    const double gq_sq = (1.0 + m) * nsq + q;
    const double scale = 1.0 + std::abs(gn_sq) + std::abs(gq_sq);
    out.max_upper_excess =
        std::max(out.max_upper_excess, (gq_sq - (1.0 + m) * gn_sq) / scale);
    out.max_lower_excess =
        std::max(out.max_lower_excess, (gn_sq - (1.0 + 2.0 * m) * gq_sq) / scale);
  }
  out.holds = samples.empty() ||
              (out.max_upper_excess <= rel_slack && out.max_lower_excess <= rel_slack);
  return out;
}

RepresentationReport verify_representation(const SpectralModel& model, const Section& phi,
                                           const std::optional<DFinWitness>& witness,
                                           double rel_tol) {
  RepresentationReport rep;
  rep.q_direct = eval_q(model.form(), phi);

  double fiber_sum = 0.0;
  for (const auto& [i, v] : phi.stored())
    fiber_sum += model.layout().space().weight_at(i) *
                 moments(fiber_measure_at(model, i, v)).first;
  rep.q_spectral = fiber_sum;

  const AtomicSpectralMeasure nu = global_measure(model, phi);
  const Moments gm = moments(nu);
  rep.q_global_spectral = gm.first;
  rep.first_abs_moment = gm.first_abs;
  rep.second_moment = gm.second;

  rep.abs_error = std::abs(rep.q_direct - rep.q_spectral);
  rep.rel_error = rep.abs_error / (1.0 + std::abs(rep.q_direct));
  rep.fiber_vs_global_rel =
      std::abs(rep.q_spectral - rep.q_global_spectral) / (1.0 + std::abs(rep.q_spectral));
  rep.graph_norm = graph_norm(model, phi);
  rep.in_dt = std::isfinite(rep.second_moment);
  rep.in_dfin = witness && is_in_dfin(model, phi, witness->delta, witness->sigma);

  const bool agree = rep.rel_error <= rel_tol && rep.fiber_vs_global_rel <= rel_tol &&
                     std::isfinite(rep.first_abs_moment);
  if (agree && rep.in_dfin)
    rep.verdict = RepresentationVerdict::strong;
  else if (agree && !witness)
    rep.verdict = RepresentationVerdict::weak;
  else
    rep.verdict = RepresentationVerdict::fail;
  return rep;
}

}  // namespace diforms
