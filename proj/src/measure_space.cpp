#include "diforms/measure_space.hpp"

#include <algorithm>
#include <cmath>

namespace diforms {

AtomicMeasureSpace AtomicMeasureSpace::make(std::vector<Atom> labels, std::vector<double> weights,
                                            std::string truncation_note) {
  if (labels.size() != weights.size())
    raise(Errc::bad_range, "labels and weights must have equal length");
  AtomicMeasureSpace s;
  s.atoms_ = std::move(labels);
  s.weights_ = std::move(weights);
  s.truncation_note_ = std::move(truncation_note);
  s.index_.reserve(s.atoms_.size());
  for (std::size_t i = 0; i < s.atoms_.size(); ++i) {
    if (!s.index_.emplace(s.atoms_[i], i).second)
      raise(Errc::duplicate_atom, "atom " + std::to_string(s.atoms_[i]) + " appears twice");
    const double w = s.weights_[i];
    if (!(w > 0.0) || !std::isfinite(w))
      raise(Errc::nonpositive_weight,
            "atom " + std::to_string(s.atoms_[i]) + " has weight " + std::to_string(w));
  }
  return s;
}

std::optional<std::size_t> AtomicMeasureSpace::index_of(Atom a) const noexcept {
  auto it = index_.find(a);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double AtomicMeasureSpace::weight(Atom a) const {
  auto idx = index_of(a);
  if (!idx) raise(Errc::foreign_atom, "atom " + std::to_string(a) + " not in space");
  return weights_[*idx];
}

double AtomicMeasureSpace::total_measure() const noexcept {
  double total = 0.0;
  for (double w : weights_) total += w;
  return total;
}

IndexSet::IndexSet(std::vector<Atom> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

bool IndexSet::contains(Atom a) const noexcept {
  return std::binary_search(members_.begin(), members_.end(), a);
}

bool IndexSet::is_subset_of(const IndexSet& other) const noexcept {
  return std::includes(other.members_.begin(), other.members_.end(), members_.begin(),
                       members_.end());
}

bool IndexSet::is_disjoint_from(const IndexSet& other) const noexcept {
  auto a = members_.begin();
  auto b = other.members_.begin();
  while (a != members_.end() && b != other.members_.end()) {
    if (*a < *b)
      ++a;
    else if (*b < *a)
      ++b;
    else
      return false;
  }
  return true;
}

IndexSet IndexSet::intersect(const IndexSet& other) const {
  std::vector<Atom> out;
  std::set_intersection(members_.begin(), members_.end(), other.members_.begin(),
                        other.members_.end(), std::back_inserter(out));
  return IndexSet(std::move(out));
}

IndexSet IndexSet::unite(const IndexSet& other) const {
  std::vector<Atom> out;
  std::set_union(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(),
                 std::back_inserter(out));
  return IndexSet(std::move(out));
}

IndexSet IndexSet::subtract(const IndexSet& other) const {
  std::vector<Atom> out;
  std::set_difference(members_.begin(), members_.end(), other.members_.begin(),
                      other.members_.end(), std::back_inserter(out));
  return IndexSet(std::move(out));
}

AtomicMeasureSpace make_space(std::vector<Atom> labels, std::vector<double> weights,
                              std::string truncation_note) {
  return AtomicMeasureSpace::make(std::move(labels), std::move(weights),
                                  std::move(truncation_note));
}

double measure_of(const AtomicMeasureSpace& space, const IndexSet& delta) {
  // Summed in the fixed sorted order of the set; exact finite additivity up to
  // summation order.
  double total = 0.0;
  for (Atom a : delta.members()) total += space.weight(a);
  return total;
}

PartitionCheck validate_partition(const Partition& p) {
  IndexSet seen;
  for (const IndexSet& part : p.parts) {
    IndexSet overlap = seen.intersect(part);
    if (!overlap.is_empty())
      return {false, "overlap at atom " + std::to_string(overlap.members().front())};
    seen = seen.unite(part);
  }
  IndexSet uncovered = p.parent.subtract(seen);
  if (!uncovered.is_empty())
    return {false, "uncovered atom " + std::to_string(uncovered.members().front())};
  IndexSet extra = seen.subtract(p.parent);
  if (!extra.is_empty())
    return {false, "atom " + std::to_string(extra.members().front()) + " outside parent"};
  return {true, ""};
}

Partition singleton_partition(const AtomicMeasureSpace& space, const IndexSet& delta) {
  Partition p;
  p.parent = delta;
  for (Atom a : space.atoms())
    if (delta.contains(a)) p.parts.push_back(IndexSet({a}));
  return p;
}

IndexSet all_atoms(const AtomicMeasureSpace& space) { return IndexSet(space.atoms()); }

}  // namespace diforms
