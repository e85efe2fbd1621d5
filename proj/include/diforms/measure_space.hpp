#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "diforms/errors.hpp"

namespace diforms {

/// Atom identifier. Labels are opaque; integers cover every model we build
/// (truncations of Z, isotypic labels, explicit configs).
using Atom = std::int64_t;

/// A point-supported measure space: finitely many atoms, each with a strictly
/// positive weight. Atom order is fixed at construction and used for all
/// deterministic iteration and report output. Immutable after construction.
class AtomicMeasureSpace {
 public:
  /// Validates and builds a space. Throws DuplicateAtom / NonpositiveWeight.
  static AtomicMeasureSpace make(std::vector<Atom> labels, std::vector<double> weights,
                                 std::string truncation_note = {});

  std::size_t size() const noexcept { return atoms_.size(); }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  Atom atom_at(std::size_t i) const { return atoms_.at(i); }
  double weight_at(std::size_t i) const { return weights_.at(i); }

  /// Position of an atom in the fixed order, if it belongs to the space.
  std::optional<std::size_t> index_of(Atom a) const noexcept;

  /// Weight of a single atom. Throws ForeignAtom.
  double weight(Atom a) const;

  bool contains(Atom a) const noexcept { return index_of(a).has_value(); }

  /// Total measure of the stored truncation, mu(A).
  double total_measure() const noexcept;

  const std::string& truncation_note() const noexcept { return truncation_note_; }

  bool operator==(const AtomicMeasureSpace& other) const noexcept {
    return atoms_ == other.atoms_ && weights_ == other.weights_;
  }

 private:
  AtomicMeasureSpace() = default;

  std::vector<Atom> atoms_;
  std::vector<double> weights_;
  std::unordered_map<Atom, std::size_t> index_;
  std::string truncation_note_;
};

/// A measurable subset of atoms. Stored sorted and deduplicated; membership
/// against a particular space is validated by the operations that take one.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(std::vector<Atom> members);

  static IndexSet empty() { return IndexSet{}; }

  const std::vector<Atom>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool is_empty() const noexcept { return members_.empty(); }
  bool contains(Atom a) const noexcept;

  bool is_subset_of(const IndexSet& other) const noexcept;
  bool is_disjoint_from(const IndexSet& other) const noexcept;

  IndexSet intersect(const IndexSet& other) const;
  IndexSet unite(const IndexSet& other) const;
  IndexSet subtract(const IndexSet& other) const;

  bool operator==(const IndexSet& other) const noexcept { return members_ == other.members_; }

 private:
  std::vector<Atom> members_;  // sorted, unique
};

/// A finite partition {Delta_i} of a parent set Delta.
struct Partition {
  IndexSet parent;
  std::vector<IndexSet> parts;
};

struct PartitionCheck {
  bool ok = false;
  std::string diagnostics;  // names the first violating atom, if any
};

/// Convenience alias of AtomicMeasureSpace::make.
AtomicMeasureSpace make_space(std::vector<Atom> labels, std::vector<double> weights,
                              std::string truncation_note = {});

/// mu(Delta) = sum of atom weights. Throws ForeignAtom for unknown members.
double measure_of(const AtomicMeasureSpace& space, const IndexSet& delta);

/// Verdict-returning check that parts are pairwise disjoint and cover parent.
PartitionCheck validate_partition(const Partition& p);

/// Partition of `delta` into singletons, in space atom order.
Partition singleton_partition(const AtomicMeasureSpace& space, const IndexSet& delta);

/// The full atom set of a space.
IndexSet all_atoms(const AtomicMeasureSpace& space);

}  // namespace diforms
