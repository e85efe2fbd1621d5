#include "diforms/group_rep.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace diforms {

namespace {

double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

std::complex<double> complex_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double re = gauss(rng);
  const double im = gauss(rng);
  return {re, im};
}

}  // namespace

GroupModel GroupModel::build(const std::vector<std::vector<int>>& cayley) {
  const int n = static_cast<int>(cayley.size());
  if (n == 0) raise(Errc::no_identity, "empty Cayley table");
  if (n > 64) raise(Errc::group_too_large, "group order capped at 64");
  GroupModel g;
  g.order_ = n;
  g.table_.resize(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a) {
    if (static_cast<int>(cayley[a].size()) != n)
      raise(Errc::not_closed, "Cayley table is not square");
    for (int b = 0; b < n; ++b) {
      const int p = cayley[a][b];
      if (p < 0 || p >= n)
        raise(Errc::not_closed, "product " + std::to_string(a) + "*" + std::to_string(b) +
                                    " = " + std::to_string(p) + " leaves the element set");
      g.table_[static_cast<std::size_t>(a) * n + b] = p;
    }
  }
  for (int a = 0; a < n; ++a)
    if (g.mul(0, a) != a || g.mul(a, 0) != a)
      raise(Errc::no_identity, "element 0 is not a two-sided identity");
  g.inverse_.assign(static_cast<std::size_t>(n), -1);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b)
      if (g.mul(a, b) == 0 && g.mul(b, a) == 0) {
        g.inverse_[static_cast<std::size_t>(a)] = b;
        break;
      }
    if (g.inverse_[static_cast<std::size_t>(a)] < 0)
      raise(Errc::no_inverse, "element " + std::to_string(a) + " has no inverse");
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c)))
          raise(Errc::not_associative, "associativity fails at (" + std::to_string(a) + ", " +
                                           std::to_string(b) + ", " + std::to_string(c) + ")");
  return g;
}

std::vector<std::vector<int>> GroupModel::conjugacy_classes() const {
  std::vector<bool> seen(static_cast<std::size_t>(order_), false);
  std::vector<std::vector<int>> classes;
  for (int a = 0; a < order_; ++a) {
    if (seen[static_cast<std::size_t>(a)]) continue;
    std::vector<int> orbit;
    for (int h = 0; h < order_; ++h) {
      const int conj = mul(mul(h, a), inverse(h));
      if (!seen[static_cast<std::size_t>(conj)]) {
        seen[static_cast<std::size_t>(conj)] = true;
        orbit.push_back(conj);
      }
    }
    std::sort(orbit.begin(), orbit.end());
    classes.push_back(std::move(orbit));
  }
  return classes;
}

RegularRepresentation regular_rep(const GroupModel& group) {
  const int n = group.order();
  RegularRepresentation rep{group, {}};
  rep.left.reserve(static_cast<std::size_t>(n));
  for (int g = 0; g < n; ++g) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < n; ++k) m(group.mul(g, k), k) = 1.0;  // L(g) e_k = e_{gk}
    rep.left.push_back(std::move(m));
  }

  auto check_pair = [&rep, &group](int a, int b) {
    const Eigen::MatrixXcd prod = rep.left[static_cast<std::size_t>(a)] *
                                  rep.left[static_cast<std::size_t>(b)];
    if (max_abs(prod - rep.left[static_cast<std::size_t>(group.mul(a, b))]) != 0.0)
      raise(Errc::not_associative, "regular representation is not a homomorphism at (" +
                                       std::to_string(a) + ", " + std::to_string(b) + ")");
  };
  if (n <= 24) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) check_pair(a, b);
  } else {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int i = 0; i < 200; ++i) check_pair(pick(rng), pick(rng));
  }
  return rep;
}

Eigen::MatrixXcd right_translation(const GroupModel& group, int g) {
  const int n = group.order();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) m(group.mul(k, group.inverse(g)), k) = 1.0;  // R(g) e_k = e_{k g^-1}
  return m;
}

std::vector<Eigen::MatrixXcd> class_sums(const GroupModel& group) {
  std::vector<Eigen::MatrixXcd> out;
  for (const std::vector<int>& cls : group.conjugacy_classes()) {
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(group.order(), group.order());
    for (int g : cls) sum += right_translation(group, g);
    out.push_back(std::move(sum));
  }
  return out;
}

namespace {

/// One attempt at the central decomposition. Returns an unsorted result or
/// nothing when the random central element collides two components.
std::optional<IsotypicDecomposition> try_isotypic(const RegularRepresentation& rep,
                                                  const std::vector<Eigen::MatrixXcd>& sums,
                                                  std::vector<Eigen::MatrixXcd>& rights,
                                                  std::uint64_t seed) {
  const int n = rep.group.order();
  std::mt19937_64 rng(seed);
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const Eigen::MatrixXcd& s : sums) y += complex_normal(rng) * s;
  const Eigen::MatrixXcd z = 0.5 * (y + y.adjoint());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(z);
  if (solver.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd ev = solver.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());

  std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters;
  Eigen::Index begin = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (ev(i) - ev(i - 1) > 1e-8 * scale) {
      clusters.emplace_back(begin, i);
      begin = i;
    }
  clusters.emplace_back(begin, ev.size());
  if (clusters.size() != sums.size()) return std::nullopt;  // components collided

  IsotypicDecomposition decomp;
  double residual = 0.0;
  for (auto [lo, hi] : clusters) {
    const Eigen::MatrixXcd u = solver.eigenvectors().middleCols(lo, hi - lo);
    Eigen::MatrixXcd p = u * u.adjoint();
    p = 0.5 * (p + p.adjoint());
    residual = std::max(residual, max_abs(p * p - p));
    const double trace = p.trace().real();
    const int rank = static_cast<int>(std::lround(trace));
    if (std::abs(trace - rank) > 1e-8 || rank < 1) return std::nullopt;
    const int mult = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rank))));
    if (mult * mult != rank) return std::nullopt;  // not a perfect square
    decomp.projections.push_back(std::move(p));
    decomp.ranks.push_back(rank);
    decomp.multiplicities.push_back(mult);
  }

  int rank_total = 0;
  for (int r : decomp.ranks) rank_total += r;
  if (rank_total != n) return std::nullopt;

  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(n, n);
  for (const Eigen::MatrixXcd& p : decomp.projections) total += p;
  residual = std::max(residual, max_abs(total - Eigen::MatrixXcd::Identity(n, n)));
  for (std::size_t i = 0; i < decomp.projections.size(); ++i)
    for (std::size_t j = i + 1; j < decomp.projections.size(); ++j)
      residual = std::max(residual, max_abs(decomp.projections[i] * decomp.projections[j]));

  if (rights.empty())
    for (int g = 0; g < n; ++g) rights.push_back(right_translation(rep.group, g));
  for (const Eigen::MatrixXcd& p : decomp.projections)
    for (int g = 0; g < n; ++g) {
      residual = std::max(residual, max_abs(p * rep.left[static_cast<std::size_t>(g)] -
                                            rep.left[static_cast<std::size_t>(g)] * p));
      residual = std::max(residual, max_abs(p * rights[static_cast<std::size_t>(g)] -
                                            rights[static_cast<std::size_t>(g)] * p));
    }
  if (residual > 1e-10) return std::nullopt;
  decomp.max_residual = residual;

  // Orthonormal range bases via rank-revealing QR of the projections.
  for (std::size_t i = 0; i < decomp.projections.size(); ++i) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(decomp.projections[i]);
    qr.setThreshold(1e-8);
    if (qr.rank() != decomp.ranks[i]) return std::nullopt;
    const Eigen::MatrixXcd q =
        qr.householderQ() * Eigen::MatrixXcd::Identity(n, decomp.ranks[i]);
    if (max_abs(q * q.adjoint() - decomp.projections[i]) > 1e-8) return std::nullopt;
    decomp.bases.push_back(q);
  }
  return decomp;
}

}  // namespace

IsotypicDecomposition isotypic_decomposition(const RegularRepresentation& rep,
                                             std::uint64_t seed) {
  const std::vector<Eigen::MatrixXcd> sums = class_sums(rep.group);
  std::vector<Eigen::MatrixXcd> rights;
  for (std::uint64_t attempt = 0; attempt < 10; ++attempt) {
    auto decomp = try_isotypic(rep, sums, rights, seed + attempt);
    if (!decomp) continue;

    // Distinct components must be disjoint; a nontrivial intertwiner means the
    // random element merged two of them.
    bool disjoint = true;
    std::vector<std::vector<Eigen::MatrixXcd>> restrictions;
    for (std::size_t i = 0; i < decomp->projections.size(); ++i)
      restrictions.push_back(restrict_to_component(rep, *decomp, i));
    for (std::size_t i = 0; i < restrictions.size() && disjoint; ++i)
      for (std::size_t j = i + 1; j < restrictions.size() && disjoint; ++j)
        if (intertwiner_space(restrictions[i], restrictions[j]).dimension != 0) disjoint = false;
    if (!disjoint) continue;

    // Deterministic component order: rank, then trace of Z restricted? The
    // cluster order already follows the random element; sort by rank with the
    // original order breaking ties.
    std::vector<std::size_t> order(decomp->projections.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&decomp](std::size_t a, std::size_t b) {
      return decomp->ranks[a] < decomp->ranks[b];
    });
    IsotypicDecomposition sorted;
    sorted.max_residual = decomp->max_residual;
    for (std::size_t i : order) {
      sorted.projections.push_back(std::move(decomp->projections[i]));
      sorted.ranks.push_back(decomp->ranks[i]);
      sorted.multiplicities.push_back(decomp->multiplicities[i]);
      sorted.bases.push_back(std::move(decomp->bases[i]));
    }
    return sorted;
  }
  raise(Errc::decomposition_unstable,
        "no stable isotypic decomposition after 10 reseeds (order " +
            std::to_string(rep.group.order()) + ")");
}

IntertwinerSpace intertwiner_space(std::span<const Eigen::MatrixXcd> rep1,
                                   std::span<const Eigen::MatrixXcd> rep2) {
  if (rep1.size() != rep2.size())
    raise(Errc::dimension_mismatch, "representations must share the element indexing");
  const Eigen::Index d1 = rep1.empty() ? 0 : rep1[0].rows();
  const Eigen::Index d2 = rep2.empty() ? 0 : rep2[0].rows();
  const Eigen::Index dim = d1 * d2;
  IntertwinerSpace out;
  if (dim == 0) return out;

  // Stack vec(M V1(g) - V2(g) M) = 0 over all elements; column-major vec.
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(rep1.size()) * dim, dim);
  for (std::size_t g = 0; g < rep1.size(); ++g) {
    const Eigen::MatrixXcd& v1 = rep1[g];
    const Eigen::MatrixXcd& v2 = rep2[g];
    Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(dim, dim);
    // (V1^T kron I_d2) - (I_d1 kron V2)
    for (Eigen::Index c1 = 0; c1 < d1; ++c1)
      for (Eigen::Index r1 = 0; r1 < d1; ++r1) {
        const Complex w = v1(r1, c1);
        if (w == Complex(0.0, 0.0)) continue;
        for (Eigen::Index k = 0; k < d2; ++k) block(c1 * d2 + k, r1 * d2 + k) += w;
      }
    for (Eigen::Index k = 0; k < d1; ++k) block.block(k * d2, k * d2, d2, d2) -= v2;
    a.middleRows(static_cast<Eigen::Index>(g) * dim, dim) = block;
  }

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double cutoff = sv.size() ? std::max(1e-10, 1e-8 * sv(0)) : 1e-10;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) continue;
    Eigen::MatrixXcd m(d2, d1);
    for (Eigen::Index c = 0; c < d1; ++c) m.col(c) = svd.matrixV().col(i).segment(c * d2, d2);
    for (std::size_t g = 0; g < rep1.size(); ++g)
      if (max_abs(m * rep1[g] - rep2[g] * m) > 1e-10)
        raise(Errc::eigen_failure, "extracted intertwiner fails the relation");
    out.basis.push_back(std::move(m));
  }
  out.dimension = static_cast<int>(out.basis.size());
  return out;
}

std::vector<Eigen::MatrixXcd> restrict_to_component(const RegularRepresentation& rep,
                                                    const IsotypicDecomposition& decomp,
                                                    std::size_t component) {
  const Eigen::MatrixXcd& b = decomp.bases.at(component);
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(rep.left.size());
  for (const Eigen::MatrixXcd& l : rep.left) out.push_back(b.adjoint() * l * b);
  return out;
}

Section InvariantForm::compress(const Eigen::VectorXcd& v,
                                const IsotypicDecomposition& decomp) const {
  Section out(isotypic_layout);
  for (std::size_t i = 0; i < decomp.bases.size(); ++i)
    out.set_fiber(static_cast<Atom>(i), decomp.bases[i].adjoint() * v);
  return out;
}

InvariantForm make_invariant_form(const RegularRepresentation& rep,
                                  const IsotypicDecomposition& decomp,
                                  const std::vector<Complex>& coefficients) {
  const int n = rep.group.order();
  if (static_cast<int>(coefficients.size()) != n)
    raise(Errc::not_hermitian_coefficients, "one coefficient per group element required");
  for (int g = 0; g < n; ++g) {
    const Complex expected = std::conj(coefficients[static_cast<std::size_t>(g)]);
    const Complex actual = coefficients[static_cast<std::size_t>(rep.group.inverse(g))];
    if (std::abs(expected - actual) > 1e-12 * (1.0 + std::abs(expected)))
      raise(Errc::not_hermitian_coefficients,
            "coefficient at inverse of " + std::to_string(g) + " is not the conjugate");
  }
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n);
  for (int g = 0; g < n; ++g)
    t += coefficients[static_cast<std::size_t>(g)] * right_translation(rep.group, g);
  if (max_abs(t - t.adjoint()) > 1e-12 * (1.0 + max_abs(t)))
    raise(Errc::not_hermitian_coefficients, "assembled operator is not Hermitian");
  for (int g = 0; g < n; ++g) {
    const Eigen::MatrixXcd& l = rep.left[static_cast<std::size_t>(g)];
    if (max_abs(t * l - l * t) > 1e-10)
      raise(Errc::not_invariant,
            "operator does not commute with L(" + std::to_string(g) + ")");
  }

  const std::size_t m = decomp.projections.size();
  std::vector<Atom> labels(m);
  std::vector<int> dims(m);
  for (std::size_t i = 0; i < m; ++i) {
    labels[i] = static_cast<Atom>(i);
    dims[i] = decomp.ranks[i];
  }
  AtomicMeasureSpace space = make_space(std::move(labels), std::vector<double>(m, 1.0),
                                        "isotypic components, counting measure");
  FiberLayout layout(space, std::move(dims));
  std::vector<Eigen::MatrixXcd> blocks;
  blocks.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Eigen::MatrixXcd h = decomp.bases[i].adjoint() * t * decomp.bases[i];
    blocks.push_back(0.5 * (h + h.adjoint()));
  }
  return InvariantForm{std::move(t), layout, DirectIntegralForm(layout, std::move(blocks))};
}

double invariance_check(const std::function<double(const Eigen::VectorXcd&)>& q,
                        const RegularRepresentation& rep,
                        std::span<const Eigen::VectorXcd> samples) {
  double worst = 0.0;
  for (const Eigen::VectorXcd& v : samples) {
    const double base = q(v);
    for (const Eigen::MatrixXcd& l : rep.left)
      worst = std::max(worst, std::abs(q(l * v) - base));
  }
  return worst;
}

double cross_isotypic_vanish(const InvariantForm& form, const IsotypicDecomposition& decomp,
                             const std::vector<int>& components1,
                             const std::vector<int>& components2,
                             std::span<const std::pair<Eigen::VectorXcd, Eigen::VectorXcd>> samples) {
  for (int c1 : components1)
    for (int c2 : components2)
      if (c1 == c2) raise(Errc::overlapping_sets, "component label sets overlap");
  const Eigen::Index n = form.op.rows();
  Eigen::MatrixXcd p1 = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd p2 = Eigen::MatrixXcd::Zero(n, n);
  for (int c : components1) p1 += decomp.projections.at(static_cast<std::size_t>(c));
  for (int c : components2) p2 += decomp.projections.at(static_cast<std::size_t>(c));
  double worst = 0.0;
  for (const auto& [v, w] : samples)
    worst = std::max(worst, std::abs(Complex((p1 * v).dot(form.op * (p2 * w)))));
  return worst;
}

GroupModel cyclic_group(int n) {
  std::vector<std::vector<int>> table(static_cast<std::size_t>(n),
                                      std::vector<int>(static_cast<std::size_t>(n)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) table[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = (a + b) % n;
  return GroupModel::build(table);
}

GroupModel symmetric_group_s3() {
  // Permutations of {0,1,2} in lexicographic order; product = composition,
  // (p*q)(x) = p(q(x)). Index 0 is the identity.
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  auto index_of = [&perms](const int p[3]) {
    for (int i = 0; i < 6; ++i)
      if (perms[i][0] == p[0] && perms[i][1] == p[1] && perms[i][2] == p[2]) return i;
    return -1;
  };
  std::vector<std::vector<int>> table(6, std::vector<int>(6));
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      int composed[3];
      for (int x = 0; x < 3; ++x) composed[x] = perms[a][perms[b][x]];
      table[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = index_of(composed);
    }
  return GroupModel::build(table);
}

GroupModel dihedral_group_d4() {
  // Elements r^i s^j encoded as i + 4j; s r = r^{-1} s.
  auto encode = [](int i, int j) { return ((i % 4) + 4) % 4 + 4 * (j % 2); };
  std::vector<std::vector<int>> table(8, std::vector<int>(8));
  for (int i1 = 0; i1 < 4; ++i1)
    for (int j1 = 0; j1 < 2; ++j1)
      for (int i2 = 0; i2 < 4; ++i2)
        for (int j2 = 0; j2 < 2; ++j2) {
          const int i = j1 == 0 ? i1 + i2 : i1 - i2;
          table[static_cast<std::size_t>(encode(i1, j1))]
               [static_cast<std::size_t>(encode(i2, j2))] = encode(i, j1 + j2);
        }
  return GroupModel::build(table);
}

GroupModel quaternion_group_q8() {
  // Elements (axis, sign): 1,-1,i,-i,j,-j,k,-k encoded as 2*axis + sign.
  // ax_mul[a][b] = resulting axis, ax_sign[a][b] = 1 for a negative sign.
  const int ax_mul[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  const int ax_sign[4][4] = {{0, 0, 0, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}, {0, 0, 1, 1}};
  // Row i: i*i=-1, i*j=k, i*k=-j; row j: j*i=-k, j*j=-1, j*k=i; row k:
  // k*i=j, k*j=-i, k*k=-1.
  std::vector<std::vector<int>> table(8, std::vector<int>(8));
  for (int a = 0; a < 4; ++a)
    for (int sa = 0; sa < 2; ++sa)
      for (int b = 0; b < 4; ++b)
        for (int sb = 0; sb < 2; ++sb) {
          const int axis = ax_mul[a][b];
          const int sign = (sa + sb + ax_sign[a][b]) % 2;
          table[static_cast<std::size_t>(2 * a + sa)][static_cast<std::size_t>(2 * b + sb)] =
              2 * axis + sign;
        }
  return GroupModel::build(table);
}

std::vector<std::vector<int>> parse_cayley_table(const std::string& text) {
  std::istringstream in(text);
  std::vector<int> flat;
  int value = 0;
  while (in >> value) flat.push_back(value);
  const auto n = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(flat.size()))));
  if (n * n != flat.size() || n == 0)
    raise(Errc::not_closed, "Cayley table must be a nonempty square integer grid");
  std::vector<std::vector<int>> table(n, std::vector<int>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) table[a][b] = flat[a * n + b];
  return table;
}

std::string format_cayley_table(const GroupModel& group) {
  std::ostringstream out;
  for (int a = 0; a < group.order(); ++a) {
    for (int b = 0; b < group.order(); ++b) {
      if (b) out << ' ';
      out << group.mul(a, b);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace diforms
