#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "diforms/forms.hpp"

namespace diforms {

/// A finite group given by its Cayley table over elements 0..n-1 with 0 the
/// identity. All axioms are verified exactly at construction (orders are
/// capped at 64 so the brute-force associativity check stays trivial).
class GroupModel {
 public:
  /// Validates the table. Throws NotClosed / NoIdentity / NoInverse /
  /// NotAssociative / GroupTooLarge.
  static GroupModel build(const std::vector<std::vector<int>>& cayley);

  int order() const noexcept { return order_; }
  int mul(int a, int b) const { return table_[static_cast<std::size_t>(a) * order_ + b]; }
  int inverse(int a) const { return inverse_.at(static_cast<std::size_t>(a)); }

  /// Conjugacy classes as sorted element lists, ordered by smallest member.
  std::vector<std::vector<int>> conjugacy_classes() const;

 private:
  GroupModel() = default;
  int order_ = 0;
  std::vector<int> table_;  // row-major, table[a*n + b] = a*b
  std::vector<int> inverse_;
};

/// Left regular representation: L(g) e_h = e_{g h}, i.e. (L(g)phi)(h) =
/// phi(g^{-1} h). Permutation matrices; the homomorphism law is verified on
/// all pairs for n <= 24 and on 200 seeded pairs otherwise.
struct RegularRepresentation {
  GroupModel group;
  std::vector<Eigen::MatrixXcd> left;  // indexed by group element
};

RegularRepresentation regular_rep(const GroupModel& group);

/// Right translation matrix R(g) e_k = e_{k g^{-1}}, i.e. (R(g)phi)(h) =
/// phi(h g). Commutes with every L.
Eigen::MatrixXcd right_translation(const GroupModel& group, int g);

/// One 0/1 matrix per conjugacy class: sum of R(g) over the class. These span
/// the centre of the group algebra acting on the regular representation.
std::vector<Eigen::MatrixXcd> class_sums(const GroupModel& group);

/// Minimal central projections of the regular representation, with ranks
/// n(alpha)^2 and multiplicities n(alpha).
struct IsotypicDecomposition {
  std::vector<Eigen::MatrixXcd> projections;
  std::vector<int> ranks;
  std::vector<int> multiplicities;
  /// Orthonormal bases of the projection ranges (columns), one per component.
  std::vector<Eigen::MatrixXcd> bases;
  double max_residual = 0.0;  // worst idempotency/centrality/completeness defect
};

/// Decomposes via the eigenspaces of a random Hermitian central element,
/// certified by idempotency, centrality, completeness, perfect-square ranks
/// and vanishing cross intertwiners; reseeds on collision. Throws
/// DecompositionUnstable after 10 attempts.
IsotypicDecomposition isotypic_decomposition(const RegularRepresentation& rep,
                                             std::uint64_t seed = 1);

struct IntertwinerSpace {
  std::vector<Eigen::MatrixXcd> basis;  // each M satisfies M V1(g) = V2(g) M
  int dimension = 0;
};

/// Null space of M V1(g) - V2(g) M = 0 over all group elements.
IntertwinerSpace intertwiner_space(std::span<const Eigen::MatrixXcd> rep1,
                                   std::span<const Eigen::MatrixXcd> rep2);

/// Restriction of the regular representation to one isotypic component, in
/// the component's orthonormal basis.
std::vector<Eigen::MatrixXcd> restrict_to_component(const RegularRepresentation& rep,
                                                    const IsotypicDecomposition& decomp,
                                                    std::size_t component);

/// A G-invariant Hermitean form on C[G] together with its expression over the
/// isotypic layout (atoms = component labels, counting measure, fibers = the
/// projection ranges, H_alpha the compressed blocks).
struct InvariantForm {
  Eigen::MatrixXcd op;  // T = sum_g c_g R(g); commutes with every L(g)
  FiberLayout isotypic_layout;
  DirectIntegralForm isotypic_form;

  double q(const Eigen::VectorXcd& v) const { return v.dot(op * v).real(); }

  /// Pushes a regular-space vector into the isotypic layout.
  Section compress(const Eigen::VectorXcd& v, const IsotypicDecomposition& decomp) const;
};

/// Builds T = sum_g c_g R(g) from coefficients with c_{g^{-1}} = conj(c_g).
/// Throws NotHermitianCoefficients / NotInvariant.
InvariantForm make_invariant_form(const RegularRepresentation& rep,
                                  const IsotypicDecomposition& decomp,
                                  const std::vector<Complex>& coefficients);

/// max over sampled (g, v) of |Q(L(g)v) - Q(v)| for a black-box form on C[G].
double invariance_check(const std::function<double(const Eigen::VectorXcd&)>& q,
                        const RegularRepresentation& rep,
                        std::span<const Eigen::VectorXcd> samples);

/// max over sample pairs of |Q(P_{D1} v, P_{D2} w)| where D1, D2 are disjoint
/// component label sets. Vanishes for invariant forms. Throws OverlappingSets.
double cross_isotypic_vanish(const InvariantForm& form, const IsotypicDecomposition& decomp,
                             const std::vector<int>& components1,
                             const std::vector<int>& components2,
                             std::span<const std::pair<Eigen::VectorXcd, Eigen::VectorXcd>> samples);

/// Shipped desk-scale groups.
GroupModel cyclic_group(int n);
GroupModel symmetric_group_s3();
GroupModel dihedral_group_d4();
GroupModel quaternion_group_q8();

/// Cayley table serialisation: whitespace-separated integer grid.
std::vector<std::vector<int>> parse_cayley_table(const std::string& text);
std::string format_cayley_table(const GroupModel& group);

}  // namespace diforms
