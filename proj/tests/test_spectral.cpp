#include <future>
#include <random>

#include "doctest.h"

#include "diforms/models.hpp"
#include "diforms/spectral.hpp"
#include "test_util.hpp"

using namespace diforms;
using testutil::cvec;
using testutil::scalar_layout;
using testutil::scalar_section;
using testutil::throws_errc;

namespace {

IndexSet random_subset(const AtomicMeasureSpace& space, std::mt19937_64& rng) {
  std::vector<Atom> members;
  for (Atom a : space.atoms())
    if (rng() & 1u) members.push_back(a);
  return IndexSet(std::move(members));
}

DirectIntegralForm two_level_form() {
  auto layout = FiberLayout(make_space({0}, {1.0}), {2});
  Eigen::MatrixXcd h(2, 2);
  h << 0.0, 1.0, 1.0, 0.0;
  return DirectIntegralForm(layout, {h});
}

}  // namespace

TEST_CASE("BorelSetSpec normalization and membership") {
  auto s = BorelSetSpec({{0.0, 1.0, true, false}, {1.0, 2.0, true, true}, {5.0, 4.0, true, true}});
  REQUIRE(s.intervals().size() == 1);  // [0,1) and [1,2] merge; empty dropped
  CHECK(s.contains(0.0));
  CHECK(s.contains(2.0));
  CHECK_FALSE(s.contains(2.5));

  auto half = BorelSetSpec::half_open(0.0, 1.0);
  CHECK(half.contains(0.0));
  CHECK_FALSE(half.contains(1.0));
  CHECK(half.bounded());
  CHECK_FALSE(half.compact_like());
  CHECK(BorelSetSpec::closed(0.0, 1.0).compact_like());
  CHECK(BorelSetSpec::point(3.0).contains(3.0));
  CHECK_FALSE(BorelSetSpec::below(0.0, true).bounded());
  CHECK(BorelSetSpec::all().contains(-1e300));
  CHECK(BorelSetSpec::empty().is_empty());

  auto u = BorelSetSpec::closed(0.0, 1.0).united(BorelSetSpec::closed(3.0, 4.0));
  CHECK(u.intervals().size() == 2);
}

TEST_CASE("decompose sorts diagonal fibers exactly") {
  auto layout = FiberLayout(make_space({0}, {1.0}), {2});
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
  h(0, 0) = 5.0;
  h(1, 1) = -3.0;
  SpectralModel model = decompose(DirectIntegralForm(layout, {h}));
  const FiberSpectralData& fib = model.fiber_at(0);
  CHECK(fib.eigenvalues(0) == -3.0);
  CHECK(fib.eigenvalues(1) == 5.0);
  CHECK(fib.eigenvectors(1, 0) == Complex(1.0));  // permutation matrix
  CHECK(fib.eigenvectors(0, 1) == Complex(1.0));
  CHECK(fib.reconstruction_residual == 0.0);
  CHECK(model.semibound().spectrum_min == -3.0);
  CHECK(model.semibound().spectrum_max == 5.0);
}

TEST_CASE("decompose the 2x2 swap analytically") {
  SpectralModel model = decompose(two_level_form());
  const FiberSpectralData& fib = model.fiber_at(0);
  CHECK(fib.eigenvalues(0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(fib.eigenvalues(1) == doctest::Approx(1.0).epsilon(1e-14));
  const double c = 1.0 / std::sqrt(2.0);
  // Eigenvectors are (1, -1)/sqrt(2) and (1, 1)/sqrt(2) up to phase.
  CHECK(std::abs(fib.eigenvectors(0, 0)) == doctest::Approx(c));
  CHECK(std::abs(fib.eigenvectors(1, 0)) == doctest::Approx(c));
  CHECK(std::abs(fib.eigenvectors.col(0).dot(cvec({1.0, 1.0}))) <= 1e-14);
}

TEST_CASE("decompose reconstruction residual on random fibers") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXcd h = random_hermitian(6, -10.0, 10.0, rng);
    auto layout = FiberLayout(make_space({0}, {1.0}), {6});
    SpectralModel model = decompose(DirectIntegralForm(layout, {h}));
    const FiberSpectralData& fib = model.fiber_at(0);
    // Independent reconstruction by explicit loops.
    Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Zero(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c)
          rebuilt(r, c) +=
              fib.eigenvalues(i) * fib.eigenvectors(r, i) * std::conj(fib.eigenvectors(c, i));
    const double residual = (rebuilt - h).cwiseAbs().maxCoeff();
    CHECK(residual <= 1e-9 * (1.0 + h.cwiseAbs().maxCoeff()));
    CHECK(fib.reconstruction_residual <= 1e-9 * (1.0 + h.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("fiber measure examples") {
  SpectralModel model = decompose(two_level_form());
  const FiberLayout& layout = model.layout();

  Section phi(layout);
  phi.set_fiber(0, cvec({1.0, 0.0}));
  AtomicSpectralMeasure nu = fiber_measure(model, 0, phi);
  REQUIRE(nu.atoms.size() == 2);
  CHECK(nu.atoms[0].first == doctest::Approx(-1.0));
  CHECK(nu.atoms[0].second == doctest::Approx(0.5));
  CHECK(nu.atoms[1].first == doctest::Approx(1.0));
  CHECK(nu.atoms[1].second == doctest::Approx(0.5));
  CHECK(nu.total_mass == doctest::Approx(1.0));

  CHECK(fiber_measure(model, 0, Section::zero(layout)).atoms.empty());

  // An eigenvector section concentrates on a single spectral atom.
  Section ev(layout);
  ev.set_fiber(0, model.fiber_at(0).eigenvectors.col(1));
  AtomicSpectralMeasure point = fiber_measure(model, 0, ev);
  REQUIRE(point.atoms.size() == 1);
  CHECK(point.atoms[0].first == doctest::Approx(1.0));
  CHECK(point.atoms[0].second == doctest::Approx(1.0));

  CHECK(throws_errc([&] { fiber_measure(model, 9, phi); }, Errc::foreign_atom));
}

TEST_CASE("global measure merges fibers with measure weights") {
  auto layout = scalar_layout({0, 1}, {2.0, 3.0});
  auto form = testutil::scalar_form(layout, {4.0, 4.0});
  SpectralModel model = decompose(form);
  Section phi = scalar_section(layout, {1.0, 1.0});
  AtomicSpectralMeasure nu = global_measure(model, phi);
  // Equal eigenvalues coalesce exactly: single atom at 4 with mass 2+3.
  REQUIRE(nu.atoms.size() == 1);
  CHECK(nu.atoms[0].first == 4.0);
  CHECK(nu.atoms[0].second == doctest::Approx(5.0));
  CHECK(nu.total_mass == doctest::Approx(norm_sq(phi)));

  // Single atom: global equals fiberwise up to the weight.
  auto single = FiberLayout(make_space({7}, {1.0}), {2});
  Eigen::MatrixXcd h(2, 2);
  h << 1.0, Complex(0.0, -0.5), Complex(0.0, 0.5), -2.0;
  SpectralModel sm = decompose(DirectIntegralForm(single, {h}));
  Section psi(single);
  psi.set_fiber(7, cvec({Complex(1.0, 0.5), -1.0}));
  AtomicSpectralMeasure a = fiber_measure(sm, 7, psi);
  AtomicSpectralMeasure g = global_measure(sm, psi);
  REQUIRE(a.atoms.size() == g.atoms.size());
  for (std::size_t i = 0; i < a.atoms.size(); ++i) {
    CHECK(g.atoms[i].first == a.atoms[i].first);
    CHECK(g.atoms[i].second == doctest::Approx(a.atoms[i].second));
  }

  // The two summation orders of the first absolute moment agree.
  std::mt19937_64 rng(67);
  auto rm = random_model(5000, 7, 5, -8.0, 8.0);
  SpectralModel rmodel = decompose(rm.form);
  for (int trial = 0; trial < 10; ++trial) {
    Section s = random_section(rm.layout, rng);
    double fiberwise = 0.0;
    for (std::size_t i = 0; i < rm.space.size(); ++i)
      fiberwise += rm.space.weight_at(i) *
                   moments(fiber_measure(rmodel, rm.space.atom_at(i), s)).first_abs;
    const double global = moments(global_measure(rmodel, s)).first_abs;
    CHECK(std::abs(fiberwise - global) <= 1e-11 * (1.0 + std::abs(global)));
  }
}

TEST_CASE("resolution of the identity") {
  std::mt19937_64 rng(71);
  auto rm = random_model(5100, 6, 4, -5.0, 5.0);
  SpectralModel model = decompose(rm.form);
  Section phi = random_section(rm.layout, rng);

  CHECK(norm(resolution_apply(model, BorelSetSpec::all(), phi) - phi) <=
        1e-12 * (1.0 + norm(phi)));
  CHECK(norm(resolution_apply(model, BorelSetSpec::empty(), phi)) == 0.0);
  const double below = model.semibound().spectrum_min - 1.0;
  CHECK(norm(resolution_apply(model, BorelSetSpec::below(below, true), phi)) == 0.0);

  // Additivity over disjoint spectral windows and idempotency.
  auto mid = BorelSetSpec::half_open(-5.0, 0.0);
  auto top = BorelSetSpec::half_open(0.0, 6.0);
  Section sum = resolution_apply(model, mid, phi) + resolution_apply(model, top, phi);
  Section whole = resolution_apply(model, mid.united(top), phi);
  CHECK(norm(sum - whole) <= 1e-11 * (1.0 + norm(whole)));
  Section once = resolution_apply(model, mid, phi);
  CHECK(norm(resolution_apply(model, mid, once) - once) <= 1e-12 * (1.0 + norm(once)));

  // Self-adjointness for the weighted inner product.
  Section psi = random_section(rm.layout, rng);
  const Complex lhs = inner(resolution_apply(model, mid, phi), psi);
  const Complex rhs = inner(phi, resolution_apply(model, mid, psi));
  CHECK(std::abs(lhs - rhs) <= 1e-11 * (1.0 + std::abs(rhs)));
}

TEST_CASE("projections P and R commute") {
  std::mt19937_64 rng(73);
  auto rm = random_model(5200, 8, 4, -6.0, 6.0);
  SpectralModel model = decompose(rm.form);
  std::uniform_real_distribution<double> edge(-7.0, 7.0);
  for (int trial = 0; trial < 50; ++trial) {
    Section phi = random_section(rm.layout, rng);
    const double a = edge(rng), b = edge(rng);
    auto sigma = BorelSetSpec::closed(std::min(a, b), std::max(a, b));
    IndexSet delta = random_subset(rm.space, rng);
    CHECK(commute_check(model, sigma, delta, phi) <= 1e-12);
  }
  CHECK(commute_check(model, BorelSetSpec::closed(0, 1), IndexSet::empty(),
                      random_section(rm.layout, rng)) == 0.0);
}

TEST_CASE("moments") {
  CHECK(moments(AtomicSpectralMeasure{}).first == 0.0);
  CHECK(moments(AtomicSpectralMeasure{}).second == 0.0);

  AtomicSpectralMeasure sym{{{-1.0, 0.5}, {1.0, 0.5}}, 1.0};
  Moments m = moments(sym);
  CHECK(m.first == 0.0);
  CHECK(m.first_abs == 1.0);
  CHECK(m.second == 1.0);

  AtomicSpectralMeasure single{{{-2.5, 0.3}}, 0.3};
  Moments s = moments(single);
  CHECK(s.first == doctest::Approx(-0.75));
  CHECK(s.first_abs == doctest::Approx(0.75));
  CHECK(s.second == doctest::Approx(1.875));
}

TEST_CASE("apply_T acts fiberwise and represents the sesquilinear form") {
  SpectralModel model = decompose(two_level_form());
  Section ev(model.layout());
  ev.set_fiber(0, model.fiber_at(0).eigenvectors.col(0));
  Section t_ev = apply_T(model, ev);
  CHECK(norm(t_ev - ev * Complex(model.fiber_at(0).eigenvalues(0), 0.0)) <= 1e-14);

  CHECK(norm(apply_T(model, Section::zero(model.layout()))) == 0.0);

  std::mt19937_64 rng(79);
  auto rm = random_model(5300, 7, 5, -4.0, 4.0);
  SpectralModel rmodel = decompose(rm.form);
  for (int trial = 0; trial < 100; ++trial) {
    Section phi = random_section(rm.layout, rng);
    Section psi = random_section(rm.layout, rng);
    const Complex direct = eval_sesq(rm.form, phi, psi);
    const Complex via_t = inner(phi, apply_T(rmodel, psi));
    CHECK(std::abs(direct - via_t) <= 1e-11 * (1.0 + std::abs(direct)));
  }
}

TEST_CASE("membership in D_Fin") {
  SpectralModel model = decompose(two_level_form());
  Section ev(model.layout());
  ev.set_fiber(0, model.fiber_at(0).eigenvectors.col(1));
  const double lambda = model.fiber_at(0).eigenvalues(1);
  CHECK(is_in_dfin(model, ev, IndexSet({0}), BorelSetSpec::point(lambda)));
  CHECK_FALSE(is_in_dfin(model, ev, IndexSet({0}), BorelSetSpec::below(0.0, true)));

  // Spectrum inside [-1,1], support inside delta: membership by containment.
  auto layout = scalar_layout({0, 1, 2}, {1.0, 1.0, 1.0});
  auto form = testutil::scalar_form(layout, {-0.5, 0.25, 1.0});
  SpectralModel sm = decompose(form);
  Section phi(layout);
  phi.set_fiber(0, cvec({1.0}));
  phi.set_fiber(1, cvec({2.0}));
  CHECK(is_in_dfin(sm, phi, IndexSet({0, 1}), BorelSetSpec::closed(-1.0, 1.0)));
  CHECK_FALSE(is_in_dfin(sm, phi, IndexSet({0}), BorelSetSpec::closed(-1.0, 1.0)));
}

TEST_CASE("graph norm examples and bounds") {
  auto layout = FiberLayout(make_space({0}, {1.0}), {2});
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
  h(0, 0) = -1.0;
  h(1, 1) = 2.0;
  SpectralModel model = decompose(DirectIntegralForm(layout, {h}));

  CHECK(graph_norm(model, Section::zero(layout)) == 0.0);

  Section phi(layout);
  phi.set_fiber(0, cvec({1.0, 1.0}));
  const double g = graph_norm(model, phi);
  CHECK(g * g == doctest::Approx(5.0).epsilon(1e-14));  // 2 + |-1| + |2|

  // Positive form: graph norm squared = |phi|^2 + Q(phi).
  auto pos_layout = scalar_layout({0, 1}, {1.0, 3.0});
  auto pos = testutil::scalar_form(pos_layout, {2.0, 0.5});
  SpectralModel pmodel = decompose(pos);
  Section psi = scalar_section(pos_layout, {1.0, Complex(0.0, 1.0)});
  const double pg = graph_norm(pmodel, psi);
  CHECK(pg * pg == doctest::Approx(norm_sq(psi) + eval_q(pos, psi)).epsilon(1e-13));

  std::mt19937_64 rng(83);
  auto rm = random_model(5400, 6, 4, -7.0, 7.0);
  SpectralModel rmodel = decompose(rm.form);
  for (int trial = 0; trial < 50; ++trial) {
    Section a = random_section(rm.layout, rng);
    Section b = random_section(rm.layout, rng);
    const double ga = graph_norm(rmodel, a);
    const double gb = graph_norm(rmodel, b);
    CHECK(ga >= norm(a) - 1e-12);
    CHECK(std::abs(eval_q(rm.form, a)) <= ga * ga + 1e-10 * (1.0 + ga * ga));
    // Cauchy estimate chain.
    const double gd = graph_norm(rmodel, a - b);
    const double lhs = std::abs(eval_q(rm.form, a) - eval_q(rm.form, b));
    CHECK(lhs <= (ga + gb) * gd + 1e-9 * (1.0 + lhs));
  }
}

TEST_CASE("norm equivalence for semibounded forms") {
  // H = diag(-1, 1), mu = 1, semibound m = 1.
  auto layout = FiberLayout(make_space({0}, {1.0}), {2});
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
  h(0, 0) = -1.0;
  h(1, 1) = 1.0;
  SpectralModel model = decompose(DirectIntegralForm(layout, {h}));

  std::vector<Section> samples;
  for (auto v : {cvec({1.0, 0.0}), cvec({0.0, 1.0}), cvec({1.0, 1.0})}) {
    Section s(layout);
    s.set_fiber(0, v);
    samples.push_back(s);
  }
  // Hand values for phi=(1,0): |phi|^2=1, Q=-1, [phi]^2=2, [phi]_Q^2=1:
  // chain 1: 1 <= 2*2; chain 2: 2 <= 3*1. Both hold; the checker must agree.
  NormEquivalenceResult r = norm_equivalence_check(model, 1.0, samples);
  CHECK(r.holds);

  CHECK(throws_errc([&] { norm_equivalence_check(model, 0.5, samples); },
                    Errc::not_semibounded));

  // Positive form with m = 0: both norms coincide.
  auto pos_layout = scalar_layout({0}, {1.0});
  auto pos = testutil::scalar_form(pos_layout, {3.0});
  SpectralModel pmodel = decompose(pos);
  std::vector<Section> pos_samples = {scalar_section(pos_layout, {Complex(1.0, -2.0)})};
  NormEquivalenceResult pr = norm_equivalence_check(pmodel, 0.0, pos_samples);
  CHECK(pr.holds);
  const double gn = graph_norm(pmodel, pos_samples[0]);
  const double gq = std::sqrt(norm_sq(pos_samples[0]) + eval_q(pos, pos_samples[0]));
  CHECK(gn == doctest::Approx(gq).epsilon(1e-13));
}

TEST_CASE("verify_representation grades strong, weak and fail") {
  SpectralModel model = decompose(two_level_form());
  Section ev(model.layout());
  ev.set_fiber(0, model.fiber_at(0).eigenvectors.col(1));
  const double lambda = model.fiber_at(0).eigenvalues(1);

  DFinWitness witness{IndexSet({0}), BorelSetSpec::point(lambda)};
  RepresentationReport strong = verify_representation(model, ev, witness);
  CHECK(strong.verdict == RepresentationVerdict::strong);
  CHECK(strong.q_direct == doctest::Approx(lambda));
  CHECK(strong.q_spectral == doctest::Approx(lambda));
  CHECK(strong.q_global_spectral == doctest::Approx(lambda));

  RepresentationReport weak = verify_representation(model, ev);
  CHECK(weak.verdict == RepresentationVerdict::weak);

  DFinWitness invalid{IndexSet({0}), BorelSetSpec::below(lambda + 1.0, true)};
  RepresentationReport fail = verify_representation(model, ev, invalid);
  CHECK(fail.verdict == RepresentationVerdict::fail);

  RepresentationReport zero = verify_representation(model, Section::zero(model.layout()));
  CHECK(zero.q_direct == 0.0);
  CHECK(zero.q_spectral == 0.0);
  CHECK(zero.q_global_spectral == 0.0);
}

TEST_CASE("representation identity on a random model") {
  std::mt19937_64 rng(89);
  auto rm = random_model(5500, 8, 6, -10.0, 10.0);
  SpectralModel model = decompose(rm.form);
  DFinWitness witness{all_atoms(rm.space),
                      BorelSetSpec::closed(model.semibound().spectrum_min - 1.0,
                                           model.semibound().spectrum_max + 1.0)};
  for (int trial = 0; trial < 100; ++trial) {
    Section phi = random_section(rm.layout, rng);
    RepresentationReport rep = verify_representation(model, phi, witness);
    CHECK(rep.verdict == RepresentationVerdict::strong);
    CHECK(rep.rel_error <= 1e-10);
    CHECK(rep.fiber_vs_global_rel <= 1e-10);
  }
}

TEST_CASE("a decomposed model is shareable across workers") {
  auto rm = random_model(5700, 10, 6, -5.0, 5.0);
  SpectralModel model = decompose(rm.form);
  DFinWitness witness{all_atoms(rm.space),
                      BorelSetSpec::closed(model.semibound().spectrum_min - 1.0,
                                           model.semibound().spectrum_max + 1.0)};
  std::vector<std::future<bool>> workers;
  for (int w = 0; w < 4; ++w)
    workers.push_back(std::async(std::launch::async, [&model, &rm, &witness, w] {
      std::mt19937_64 rng(7000 + static_cast<std::uint64_t>(w));
      bool ok = true;
      for (int t = 0; t < 25; ++t) {
        Section phi = random_section(rm.layout, rng);
        const RepresentationReport rep = verify_representation(model, phi, witness);
        ok = ok && rep.verdict == RepresentationVerdict::strong && rep.rel_error <= 1e-10;
      }
      return ok;
    }));
  for (auto& f : workers) CHECK(f.get());
}

TEST_CASE("restricted spectral measures are consistent") {
  std::mt19937_64 rng(97);
  auto rm = random_model(5600, 7, 4, -6.0, 6.0);
  SpectralModel model = decompose(rm.form);
  for (int trial = 0; trial < 20; ++trial) {
    Section phi = random_section(rm.layout, rng);
    IndexSet delta = random_subset(rm.space, rng);
    auto sigma = BorelSetSpec::closed(-3.0, 2.0);

    // nu_{P_Delta phi}(sigma) = sum over Delta of mu * nu^alpha_phi(sigma).
    const double restricted = global_measure(model, project(delta, phi)).mass_in(sigma);
    double fiberwise = 0.0;
    for (std::size_t i = 0; i < rm.space.size(); ++i)
      if (delta.contains(rm.space.atom_at(i)))
        fiberwise += rm.space.weight_at(i) *
                     fiber_measure(model, rm.space.atom_at(i), phi).mass_in(sigma);
    CHECK(std::abs(restricted - fiberwise) <= 1e-11 * (1.0 + std::abs(fiberwise)));

    // Second moments shrink under projection.
    const double m2_proj = moments(global_measure(model, project(delta, phi))).second;
    const double m2_full = moments(global_measure(model, phi)).second;
    CHECK(m2_proj <= m2_full + 1e-10 * (1.0 + m2_full));
  }
}
