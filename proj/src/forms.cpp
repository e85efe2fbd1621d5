#include "diforms/forms.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace diforms {

namespace {

constexpr Complex kImag{0.0, 1.0};

double hermiticity_defect(const Eigen::MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void require_layout(const DirectIntegralForm& form, const Section& phi) {
  if (!form.layout().compatible(phi.layout()))
    raise(Errc::layout_mismatch, "section does not match the form layout");
}

}  // namespace

DirectIntegralForm::DirectIntegralForm(FiberLayout layout,
                                       std::vector<Eigen::MatrixXcd> fiber_matrices)
    : layout_(std::move(layout)), matrices_(std::move(fiber_matrices)) {
  if (matrices_.size() != layout_.atom_count())
    raise(Errc::dimension_mismatch, "one fiber matrix per atom required");
  weighted_bounds_.resize(matrices_.size());
  spectrum_bounds_.resize(matrices_.size());
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    const Eigen::MatrixXcd& h = matrices_[i];
    const int d = layout_.dim_at(i);
    if (h.rows() != d || h.cols() != d)
      raise(Errc::dimension_mismatch,
            "fiber matrix at atom " + std::to_string(layout_.space().atom_at(i)) +
                " is not " + std::to_string(d) + "x" + std::to_string(d));
    const double scale = 1.0 + (h.size() ? h.cwiseAbs().maxCoeff() : 0.0);
    if (hermiticity_defect(h) > 1e-12 * scale)
      raise(Errc::non_hermitian_form, "fiber matrix at atom " +
                                          std::to_string(layout_.space().atom_at(i)) +
                                          " is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
      raise(Errc::eigen_failure,
            "eigensolve failed at atom " + std::to_string(layout_.space().atom_at(i)));
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    const double mu = layout_.space().weight_at(i);
    spectrum_bounds_[i] = {lo, hi};
    weighted_bounds_[i] = {mu * lo, mu * hi};
  }
}

const Eigen::MatrixXcd& DirectIntegralForm::matrix(Atom a) const {
  auto idx = layout_.space().index_of(a);
  if (!idx) raise(Errc::foreign_atom, "atom " + std::to_string(a) + " not in layout");
  return matrices_[*idx];
}

double SignedAtomicMeasure::value_of(const IndexSet& delta) const {
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (delta.contains(atoms[i])) total += values[i];
  return total;
}

double eval_q(const DirectIntegralForm& form, const Section& phi) {
  require_layout(form, phi);
  const FiberLayout& layout = form.layout();
  Complex total = 0.0;
  for (const auto& [i, v] : phi.stored())
    total += layout.space().weight_at(i) * layout.metric_scale_at(i) *
             v.dot(form.matrix_at(i) * v);
  if (std::abs(total.imag()) > 1e-12 * (1.0 + std::abs(total)))
    raise(Errc::non_hermitian_form, "quadratic evaluation has imaginary residue " +
                                        std::to_string(total.imag()));
  return total.real();
}

Complex eval_sesq(const DirectIntegralForm& form, const Section& phi, const Section& psi) {
  require_layout(form, phi);
  require_layout(form, psi);
  const FiberLayout& layout = form.layout();
  Complex total = 0.0;
  for (const auto& [i, v] : phi.stored()) {
    const auto* w = psi.fiber_if_present(i);
    if (!w) continue;
    total += layout.space().weight_at(i) * layout.metric_scale_at(i) *
             v.dot(form.matrix_at(i) * *w);
  }
  return total;
}

Complex polarize(const QProvider& q, const Section& phi, const Section& psi) {
  const double a = q(phi + psi);
  const double b = q(phi - psi);
  const double c = q(phi + kImag * psi);
  const double d = q(phi - kImag * psi);
  // Conjugate-linear in the first argument, matching eval_sesq.
  return 0.25 * (Complex(a - b, 0.0) - kImag * c + kImag * d);
}

SignedAtomicMeasure omega_measure(const DirectIntegralForm& form, const Section& phi) {
  require_layout(form, phi);
  const FiberLayout& layout = form.layout();
  SignedAtomicMeasure out;
  out.atoms = layout.space().atoms();
  out.values.assign(out.atoms.size(), 0.0);
  for (const auto& [i, v] : phi.stored()) {
    const Complex t = layout.space().weight_at(i) * layout.metric_scale_at(i) *
                      v.dot(form.matrix_at(i) * v);
    out.values[i] = t.real();
  }
  for (double v : out.values) out.total_variation += std::abs(v);
  return out;
}

std::vector<double> density(const DirectIntegralForm& form, const Section& phi) {
  SignedAtomicMeasure omega = omega_measure(form, phi);
  std::vector<double> out(omega.values.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = omega.values[i] / form.layout().space().weight_at(i);
  return out;
}

OaCheck check_orthogonal_additivity(const QProvider& q, const Section& phi, const Partition& p,
                                    double rel_tol) {
  PartitionCheck pc = validate_partition(p);
  if (!pc.ok) raise(Errc::invalid_partition, pc.diagnostics);
  const double whole = q(project(p.parent, phi));
  double sum = 0.0;
  for (const IndexSet& part : p.parts) sum += q(project(part, phi));
  OaCheck out;
  out.reference = whole;
  out.residual = std::abs(whole - sum);
  out.additive = out.residual <= rel_tol * (1.0 + std::abs(whole));
  return out;
}

OaCheck check_orthogonal_additivity(const DirectIntegralForm& form, const Section& phi,
                                    const Partition& p, double rel_tol) {
  return check_orthogonal_additivity([&form](const Section& s) { return eval_q(form, s); }, phi,
                                     p, rel_tol);
}

TailReport check_tail_vanishing(const QProvider& q, const Section& phi,
                                const std::vector<IndexSet>& nested_tails, double tol) {
  for (std::size_t i = 1; i < nested_tails.size(); ++i)
    if (!nested_tails[i].is_subset_of(nested_tails[i - 1]))
      raise(Errc::non_nested_tails, "tail " + std::to_string(i) + " is not contained in tail " +
                                        std::to_string(i - 1));
  TailReport out;
  out.values.reserve(nested_tails.size());
  for (const IndexSet& tail : nested_tails) out.values.push_back(std::abs(q(project(tail, phi))));
  out.vanished = !out.values.empty() && out.values.back() <= tol;
  return out;
}

TailReport check_tail_vanishing(const DirectIntegralForm& form, const Section& phi,
                                const std::vector<IndexSet>& nested_tails, double tol) {
  return check_tail_vanishing([&form](const Section& s) { return eval_q(form, s); }, phi,
                              nested_tails, tol);
}

Complex cross_term(const DirectIntegralForm& form, const IndexSet& delta1, const IndexSet& delta2,
                   const Section& phi, const Section& psi) {
  if (!delta1.is_disjoint_from(delta2))
    raise(Errc::overlapping_sets, "cross_term requires disjoint index sets");
  return eval_sesq(form, project(delta1, phi), project(delta2, psi));
}

CsbResult csb_check(const QProvider& q, const QProvider& h, double M,
                    const std::vector<std::pair<Section, Section>>& samples, double slack) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (const Section* s : {&samples[i].first, &samples[i].second}) {
      const double hv = h(*s);
      if (hv < -1e-12)
        raise(Errc::precondition_violated,
              "h is negative on sample pair " + std::to_string(i));
      if (std::abs(q(*s)) > M * hv + 1e-10)
        raise(Errc::precondition_violated,
              "|Q(phi)| exceeds M h(phi) on sample pair " + std::to_string(i));
    }
  }
  CsbResult out;
  out.max_excess = -std::numeric_limits<double>::infinity();
  for (const auto& [phi, psi] : samples) {
    const double bound = M * std::sqrt(std::max(0.0, h(phi))) * std::sqrt(std::max(0.0, h(psi)));
    const double excess = std::abs(polarize(q, phi, psi)) - bound;
    out.max_excess = std::max(out.max_excess, excess);
  }
  out.holds = samples.empty() || out.max_excess <= slack;
  return out;
}

double ClosabilityEvidence::diff_at(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  const std::size_t n = norms.size();
  return q_diffs.at(i * (2 * n - i - 1) / 2 + (j - i - 1));
}

ClosabilityEvidence ClosabilityEvidence::from_sections(const QProvider& q,
                                                       const std::vector<Section>& seq) {
  ClosabilityEvidence ev;
  ev.norms.reserve(seq.size());
  ev.q_values.reserve(seq.size());
  for (const Section& s : seq) {
    ev.norms.push_back(norm(s));
    ev.q_values.push_back(q(s));
  }
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j) ev.q_diffs.push_back(q(seq[i] - seq[j]));
  return ev;
}

ClosabilityVerdict closability_probe(const ClosabilityEvidence& evidence,
                                     const ProbeTolerances& tol) {
  const std::size_t n = evidence.norms.size();
  ClosabilityVerdict out;
  if (n == 0) return out;

  bool decreasing = true;
  for (std::size_t i = 1; i < n; ++i)
    if (evidence.norms[i] > evidence.norms[i - 1] + 1e-12 * (1.0 + evidence.norms[i - 1]))
      decreasing = false;
  const bool norms_small = decreasing && evidence.norms.back() <= tol.norm_below;

  const std::size_t w = std::min(tol.window, n);
  const std::size_t start = n - w;
  double max_diff = 0.0;
  for (std::size_t i = start; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      max_diff = std::max(max_diff, std::abs(evidence.diff_at(i, j)));
  const bool cauchy = max_diff <= tol.cauchy_below;

  double min_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = start; i < n; ++i)
    min_value = std::min(min_value, std::abs(evidence.q_values[i]));

  if (norms_small && cauchy && min_value > tol.value_above) {
    out.status = ClosabilityVerdict::Status::violation;
    out.witness = evidence;
  }
  return out;
}

ClosabilityVerdict closability_probe(const QProvider& q, const std::vector<Section>& sequence,
                                     const ProbeTolerances& tol) {
  return closability_probe(ClosabilityEvidence::from_sections(q, sequence), tol);
}

}  // namespace diforms
