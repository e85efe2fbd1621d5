#include <random>

#include "doctest.h"

#include "diforms/direct_integral.hpp"
#include "diforms/models.hpp"
#include "test_util.hpp"

using namespace diforms;
using testutil::cvec;
using testutil::scalar_layout;
using testutil::scalar_section;
using testutil::throws_errc;

namespace {

Partition random_partition(const AtomicMeasureSpace& space, std::mt19937_64& rng, int n_parts) {
  std::vector<std::vector<Atom>> buckets(static_cast<std::size_t>(n_parts));
  std::uniform_int_distribution<int> pick(0, n_parts - 1);
  for (Atom a : space.atoms()) buckets[static_cast<std::size_t>(pick(rng))].push_back(a);
  Partition p;
  p.parent = all_atoms(space);
  for (auto& b : buckets) p.parts.push_back(IndexSet(std::move(b)));
  return p;
}

IndexSet random_subset(const AtomicMeasureSpace& space, std::mt19937_64& rng) {
  std::vector<Atom> members;
  for (Atom a : space.atoms())
    if (rng() & 1u) members.push_back(a);
  return IndexSet(std::move(members));
}

}  // namespace

TEST_CASE("layout validation") {
  auto space = make_space({0, 1}, {1.0, 2.0});
  CHECK(throws_errc([&] { FiberLayout(space, {1}); }, Errc::dimension_mismatch));
  CHECK(throws_errc([&] { FiberLayout(space, {1, 0}); }, Errc::dimension_mismatch));
  CHECK(throws_errc([&] { FiberLayout(space, {1, 1}, {1.0, -1.0}); }, Errc::bad_range));
  FiberLayout ok(space, {2, 3});
  CHECK(ok.dim(0) == 2);
  CHECK(ok.dim(1) == 3);
  CHECK(ok.metric_scale(1) == 1.0);
}

TEST_CASE("inner product is the weighted fiber sum") {
  auto layout2 = FiberLayout(make_space({0}, {1.0}), {2});
  Section zero = Section::zero(layout2);
  CHECK(inner(zero, zero) == Complex(0.0));

  Section e1(layout2), e2(layout2);
  e1.set_fiber(0, cvec({1.0, 0.0}));
  e2.set_fiber(0, cvec({0.0, 1.0}));
  CHECK(std::abs(inner(e1, e2)) == 0.0);

  auto layout = scalar_layout({0, 1}, {2.0, 3.0});
  Section ones = scalar_section(layout, {1.0, 1.0});
  CHECK(inner(ones, ones).real() == doctest::Approx(5.0).epsilon(1e-15));

  // Conjugate-linear in the first argument.
  Section psi = scalar_section(layout, {Complex(0.4, -0.3), Complex(1.0, 2.0)});
  const Complex lhs = inner(ones * Complex(0.0, 1.0), psi);
  const Complex rhs = Complex(0.0, -1.0) * inner(ones, psi);
  CHECK(std::abs(lhs - rhs) <= 1e-14);

  auto other_layout = scalar_layout({0, 1}, {1.0, 1.0});
  Section foreign = scalar_section(other_layout, {1.0, 1.0});
  CHECK(throws_errc([&] { inner(ones, foreign); }, Errc::layout_mismatch));
}

TEST_CASE("norm examples") {
  auto layout = scalar_layout({0}, {4.0});
  CHECK(norm(Section::zero(layout)) == 0.0);
  CHECK(norm(scalar_section(layout, {1.0})) == 2.0);

  const int k = 7;
  std::vector<Atom> atoms;
  for (int i = 0; i < k; ++i) atoms.push_back(i);
  auto counting = scalar_layout(atoms, std::vector<double>(k, 1.0));
  Section units(counting);
  for (int i = 0; i < k; ++i) units.set_fiber(i, cvec({1.0}));
  CHECK(norm(units) == doctest::Approx(std::sqrt(double(k))).epsilon(1e-15));
}

TEST_CASE("projection family") {
  auto layout = scalar_layout({0, 1, 2}, {1.0, 2.0, 0.5});
  Section phi = scalar_section(layout, {1.0, Complex(0.0, 2.0), -3.0});

  Section full = project(all_atoms(layout.space()), phi);
  CHECK(norm(full - phi) == 0.0);
  CHECK(norm(project(IndexSet::empty(), phi)) == 0.0);

  Section psi = scalar_section(layout, {Complex(2.0, 1.0), 1.0, 1.0});
  CHECK(std::abs(inner(project(IndexSet({0}), phi), project(IndexSet({1, 2}), psi))) == 0.0);

  // Idempotent and self-adjoint.
  IndexSet delta({0, 2});
  CHECK(norm(project(delta, project(delta, phi)) - project(delta, phi)) == 0.0);
  CHECK(std::abs(inner(project(delta, phi), psi) - inner(phi, project(delta, psi))) <= 1e-14);

  CHECK(throws_errc([&] { project(IndexSet({9}), phi); }, Errc::foreign_atom));
}

TEST_CASE("extend_by_zero") {
  auto space = make_space({5, 6}, {3.0, 1.0});
  FiberLayout layout(space, {2, 1});

  Section z = extend_by_zero(cvec({0.0, 0.0}), 5, layout);
  CHECK(norm(z) == 0.0);

  Section s = extend_by_zero(cvec({1.0, 0.0}), 5, layout);
  CHECK(norm(s) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(norm(project(IndexSet({5}), s) - s) == 0.0);

  CHECK(throws_errc([&] { extend_by_zero(cvec({1.0}), 5, layout); }, Errc::dimension_mismatch));
  CHECK(throws_errc([&] { extend_by_zero(cvec({1.0}), 7, layout); }, Errc::foreign_atom));
}

TEST_CASE("parallelogram law on random sections") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto model = random_model(1000 + trial, 6, 4, -2.0, 2.0);
    Section phi = random_section(model.layout, rng);
    Section psi = random_section(model.layout, rng);
    const double lhs = norm_sq(phi + psi) + norm_sq(phi - psi);
    const double rhs = 2.0 * norm_sq(phi) + 2.0 * norm_sq(psi);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("Pythagoras over partitions") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    auto model = random_model(2000 + trial, 8, 3, -1.0, 1.0);
    Section phi = random_section(model.layout, rng);
    Partition p = random_partition(model.space, rng, 3);
    REQUIRE(validate_partition(p).ok);
    double sum = 0.0;
    for (const auto& part : p.parts) sum += norm_sq(project(part, phi));
    CHECK(std::abs(sum - norm_sq(phi)) <= 1e-12 * (1.0 + norm_sq(phi)));
  }
}

TEST_CASE("projection composition matches set intersection") {
  std::mt19937_64 rng(17);
  auto model = random_model(3000, 10, 3, -1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    Section phi = random_section(model.layout, rng);
    IndexSet d1 = random_subset(model.space, rng);
    IndexSet d2 = random_subset(model.space, rng);
    Section lhs = project(d1, project(d2, phi));
    Section rhs = project(d1.intersect(d2), phi);
    CHECK(norm(lhs - rhs) == 0.0);
  }
}
