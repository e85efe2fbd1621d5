#include "diforms/models.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

namespace diforms {

namespace {

std::complex<double> complex_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double re = gauss(rng);
  const double im = gauss(rng);
  return {re, im};
}

}  // namespace

double PositionModel::abscissa(int k, int j) const {
  return static_cast<double>(k) + (static_cast<double>(j) + 0.5) / n_per_cell;
}

Section PositionModel::indicator(int cell_lo, int cell_hi) const {
  if (cell_lo < k_min || cell_hi > k_max + 1 || cell_lo > cell_hi)
    raise(Errc::bad_range, "indicator cells outside the truncation");
  Section out(layout);
  for (int k = cell_lo; k < cell_hi; ++k)
    out.set_fiber(k, Eigen::VectorXcd::Ones(n_per_cell));
  return out;
}

PositionModel position_model(int k_min, int k_max, int n_per_cell) {
  if (k_min > k_max) raise(Errc::bad_range, "k_min must be <= k_max");
  if (n_per_cell < 1) raise(Errc::bad_range, "n_per_cell must be >= 1");
  std::vector<Atom> atoms;
  for (int k = k_min; k <= k_max; ++k) atoms.push_back(k);
  const std::size_t n_atoms = atoms.size();
  AtomicMeasureSpace space =
      make_space(std::move(atoms), std::vector<double>(n_atoms, 1.0),
                 "counting measure on Z truncated to [" + std::to_string(k_min) + ", " +
                     std::to_string(k_max) + "]");
  FiberLayout layout(space, std::vector<int>(n_atoms, n_per_cell),
                     std::vector<double>(n_atoms, 1.0 / n_per_cell));

  std::vector<Eigen::MatrixXcd> matrices;
  matrices.reserve(n_atoms);
  for (int k = k_min; k <= k_max; ++k) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n_per_cell, n_per_cell);
    for (int j = 0; j < n_per_cell; ++j)
      h(j, j) = static_cast<double>(k) + (static_cast<double>(j) + 0.5) / n_per_cell;
    matrices.push_back(std::move(h));
  }
  return PositionModel{k_min,  k_max, n_per_cell, space, layout,
                       DirectIntegralForm(layout, std::move(matrices))};
}

PositionSpectralReport position_spectral_check(const PositionModel& model, std::uint64_t seed,
                                               std::size_t n_random_sections) {
  const SpectralModel spec = decompose(model.form);
  PositionSpectralReport rep;

  std::vector<Section> samples;
  for (int k = model.k_min; k <= model.k_max; ++k) samples.push_back(model.indicator(k, k + 1));
  samples.push_back(model.indicator(model.k_min, model.k_max + 1));
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n_random_sections; ++i)
    samples.push_back(random_section(model.layout, rng));

  const DFinWitness witness{all_atoms(model.space),
                            BorelSetSpec::closed(model.k_min - 1.0, model.k_max + 2.0)};
  rep.all_strong = true;
  for (const Section& phi : samples) {
    const RepresentationReport r = verify_representation(spec, phi, witness);
    rep.max_rel_error = std::max(rep.max_rel_error, r.rel_error);
    if (r.verdict != RepresentationVerdict::strong) rep.all_strong = false;
  }
  rep.sections_checked = samples.size();

  // E(sigma) must act as multiplication by chi_sigma on the grid points.
  rep.resolution_is_indicator = true;
  const std::vector<BorelSetSpec> sigmas = {
      BorelSetSpec::half_open(0.0, 1.0),
      BorelSetSpec::half_open(model.k_min, 0.0),
      BorelSetSpec::closed(model.k_min + 0.25, model.k_max + 0.75),
      BorelSetSpec::empty(),
      BorelSetSpec::all(),
  };
  for (const BorelSetSpec& sigma : sigmas) {
    for (const Section& phi : samples) {
      const Section projected = resolution_apply(spec, sigma, phi);
      for (int k = model.k_min; k <= model.k_max; ++k) {
        const Eigen::VectorXcd before = phi.fiber(k);
        const Eigen::VectorXcd after = projected.fiber(k);
        for (int j = 0; j < model.n_per_cell; ++j) {
          const Complex expected = sigma.contains(model.abscissa(k, j)) ? before(j) : 0.0;
          if (after(j) != expected) rep.resolution_is_indicator = false;
        }
      }
    }
  }

  // Per-fiber bound |q_k(phi^k)| <= max{|k|, |k+1|} |phi^k|_k^2.
  for (const Section& phi : samples) {
    for (int k = model.k_min; k <= model.k_max; ++k) {
      const Eigen::VectorXcd v = phi.fiber(k);
      const double fiber_norm_sq = model.layout.metric_scale(k) * v.squaredNorm();
      if (fiber_norm_sq == 0.0) continue;
      const Complex q = model.layout.metric_scale(k) * v.dot(model.form.matrix(k) * v);
      const double bound = std::max(std::abs(static_cast<double>(k)),
                                    std::abs(static_cast<double>(k + 1)));
      rep.max_fiber_bound_ratio =
          std::max(rep.max_fiber_bound_ratio, std::abs(q.real()) / (bound * fiber_norm_sq));
    }
  }
  return rep;
}

double SpikeFamily::q_eval(const Section& phi) {
  const std::size_t first_atom = 0;
  const Eigen::VectorXcd* v = phi.fiber_if_present(first_atom);
  if (!v || v->size() == 0) return 0.0;
  return std::norm((*v)(0));
}

ClosabilityEvidence SpikeFamily::evidence() const {
  ClosabilityEvidence ev;
  for (const Level& level : levels) {
    ev.norms.push_back(norm(level.section));
    ev.q_values.push_back(q_eval(level.section));
  }
  // All levels share the evaluation point; a difference of two levels has
  // evaluation value v_i - v_j there, regardless of the refinement grids.
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const Complex vi = levels[i].section.fiber(0)(0);
    for (std::size_t j = i + 1; j < levels.size(); ++j) {
      const Complex vj = levels[j].section.fiber(0)(0);
      ev.q_diffs.push_back(std::norm(vi - vj));
    }
  }
  return ev;
}

std::pair<SpikeFamily, ClosabilityVerdict> spike_family(int n_levels) {
  if (n_levels < 3) raise(Errc::bad_range, "spike family needs at least 3 levels");
  SpikeFamily family;
  for (int n = 1; n <= n_levels; ++n) {
    AtomicMeasureSpace space = make_space({0}, {1.0}, "single cell [0,1), refinement level");
    FiberLayout layout(space, {n}, {1.0 / n});
    Section phi(layout);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    v(0) = 1.0;
    phi.set_fiber(0, std::move(v));
    family.levels.push_back({std::move(layout), std::move(phi)});
  }
  ClosabilityVerdict verdict = closability_probe(family.evidence());
  return {std::move(family), std::move(verdict)};
}

GeometricTailModel geometric_tail_model(int n_atoms) {
  if (n_atoms < 1) raise(Errc::bad_range, "n_atoms must be >= 1");
  std::vector<Atom> atoms;
  std::vector<Eigen::MatrixXcd> matrices;
  for (int k = 1; k <= n_atoms; ++k) {
    atoms.push_back(k);
    Eigen::MatrixXcd h(1, 1);
    h(0, 0) = (k % 2 == 0) ? 1.0 : -1.0;
    matrices.push_back(std::move(h));
  }
  AtomicMeasureSpace space = make_space(std::move(atoms),
                                        std::vector<double>(static_cast<std::size_t>(n_atoms), 1.0),
                                        "counting measure, atoms 1..n");
  FiberLayout layout(space, std::vector<int>(static_cast<std::size_t>(n_atoms), 1));
  DirectIntegralForm form(layout, std::move(matrices));
  Section phi(layout);
  for (int k = 1; k <= n_atoms; ++k) {
    Eigen::VectorXcd v(1);
    v(0) = std::pow(2.0, -0.5 * k);
    phi.set_fiber(k, std::move(v));
  }
  return {std::move(space), std::move(layout), std::move(form), std::move(phi)};
}

Eigen::MatrixXcd random_unitary(int dim, std::mt19937_64& rng) {
  Eigen::MatrixXcd g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = complex_normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  // Fix the phase convention so the factorisation is unique.
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < dim; ++c) {
    const Complex d = r(c, c);
    if (std::abs(d) > 0.0) q.col(c) *= d / std::abs(d);
  }
  return q;
}

Eigen::MatrixXcd random_hermitian(int dim, double eig_lo, double eig_hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(eig_lo, eig_hi);
  Eigen::VectorXd ev(dim);
  for (int i = 0; i < dim; ++i) ev(i) = uni(rng);
  const Eigen::MatrixXcd u = random_unitary(dim, rng);
  Eigen::MatrixXcd h = u * ev.asDiagonal() * u.adjoint();
  return 0.5 * (h + h.adjoint());  // re-symmetrise rounding noise
}

RandomModel random_model(std::uint64_t seed, int n_atoms, int max_dim, double eig_lo,
                         double eig_hi) {
  if (n_atoms < 1 || max_dim < 1) raise(Errc::bad_range, "n_atoms and max_dim must be >= 1");
  if (!(eig_lo <= eig_hi)) raise(Errc::bad_range, "empty eigenvalue range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_uni(std::log(0.1), std::log(10.0));
  std::uniform_int_distribution<int> dim_dist(1, max_dim);

  std::vector<Atom> atoms;
  std::vector<double> weights;
  std::vector<int> dims;
  for (int a = 0; a < n_atoms; ++a) {
    atoms.push_back(a);
    weights.push_back(std::exp(log_uni(rng)));
    dims.push_back(dim_dist(rng));
  }
  AtomicMeasureSpace space = make_space(std::move(atoms), std::move(weights));
  FiberLayout layout(space, dims);

  std::vector<Eigen::MatrixXcd> matrices;
  std::uniform_real_distribution<double> uni(eig_lo, eig_hi);
  for (int a = 0; a < n_atoms; ++a) {
    const int d = dims[static_cast<std::size_t>(a)];
    Eigen::VectorXd ev(d);
    for (int i = 0; i < d; ++i) ev(i) = uni(rng);
    // Pin the extreme eigenvalues when the range straddles zero, so the model
    // is non-semibounded by construction.
    if (eig_lo < 0.0 && eig_hi > 0.0 && n_atoms >= 2) {
      if (a == 0) ev(0) = eig_lo;
      if (a == n_atoms - 1) ev(d - 1) = eig_hi;
    }
    const Eigen::MatrixXcd u = random_unitary(d, rng);
    Eigen::MatrixXcd h = u * ev.asDiagonal() * u.adjoint();
    matrices.push_back(0.5 * (h + h.adjoint()));
  }
  return {std::move(space), layout, DirectIntegralForm(layout, std::move(matrices))};
}

Section random_section(const FiberLayout& layout, std::mt19937_64& rng) {
  Section out(layout);
  for (std::size_t i = 0; i < layout.atom_count(); ++i) {
    Eigen::VectorXcd v(layout.dim_at(i));
    for (int j = 0; j < layout.dim_at(i); ++j) v(j) = complex_normal(rng);
    out.set_fiber(layout.space().atom_at(i), std::move(v));
  }
  return out;
}

Section random_section(const FiberLayout& layout, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_section(layout, rng);
}

}  // namespace diforms
