#include "diforms/direct_integral.hpp"

#include <cmath>

namespace diforms {

FiberLayout::FiberLayout(AtomicMeasureSpace space, std::vector<int> dims)
    : FiberLayout(std::move(space), std::move(dims), {}) {}

FiberLayout::FiberLayout(AtomicMeasureSpace space, std::vector<int> dims,
                         std::vector<double> metric_scales) {
  if (dims.size() != space.size())
    raise(Errc::dimension_mismatch, "one fiber dimension per atom required");
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (dims[i] < 1)
      raise(Errc::dimension_mismatch,
            "fiber dimension at atom " + std::to_string(space.atom_at(i)) + " must be >= 1");
  if (metric_scales.empty()) metric_scales.assign(space.size(), 1.0);
  if (metric_scales.size() != space.size())
    raise(Errc::dimension_mismatch, "one metric scale per atom required");
  for (double s : metric_scales)
    if (!(s > 0.0) || !std::isfinite(s))
      raise(Errc::bad_range, "fiber metric scales must be positive");
  data_ = std::make_shared<const Data>(
      Data{std::move(space), std::move(dims), std::move(metric_scales)});
}

int FiberLayout::dim(Atom a) const {
  auto idx = data_->space.index_of(a);
  if (!idx) raise(Errc::foreign_atom, "atom " + std::to_string(a) + " not in layout");
  return data_->dims[*idx];
}

double FiberLayout::metric_scale(Atom a) const {
  auto idx = data_->space.index_of(a);
  if (!idx) raise(Errc::foreign_atom, "atom " + std::to_string(a) + " not in layout");
  return data_->scales[*idx];
}

bool FiberLayout::compatible(const FiberLayout& other) const noexcept {
  if (data_ == other.data_) return true;
  return data_->space == other.data_->space && data_->dims == other.data_->dims &&
         data_->scales == other.data_->scales;
}

void Section::set_fiber(Atom a, Eigen::VectorXcd v) {
  auto idx = layout_.space().index_of(a);
  if (!idx) raise(Errc::foreign_atom, "atom " + std::to_string(a) + " not in layout");
  if (v.size() != layout_.dim_at(*idx))
    raise(Errc::dimension_mismatch, "fiber vector at atom " + std::to_string(a) + " has length " +
                                        std::to_string(v.size()) + ", expected " +
                                        std::to_string(layout_.dim_at(*idx)));
  fibers_[*idx] = std::move(v);
}

const Eigen::VectorXcd* Section::fiber_if_present(std::size_t atom_index) const {
  auto it = fibers_.find(atom_index);
  return it == fibers_.end() ? nullptr : &it->second;
}

Eigen::VectorXcd Section::fiber(Atom a) const {
  auto idx = layout_.space().index_of(a);
  if (!idx) raise(Errc::foreign_atom, "atom " + std::to_string(a) + " not in layout");
  if (const auto* v = fiber_if_present(*idx)) return *v;
  return Eigen::VectorXcd::Zero(layout_.dim_at(*idx));
}

namespace {

void require_compatible(const Section& a, const Section& b) {
  if (!a.layout().compatible(b.layout()))
    raise(Errc::layout_mismatch, "sections live on different layouts");
}

}  // namespace

Section Section::operator+(const Section& other) const {
  require_compatible(*this, other);
  Section out(layout_);
  for (const auto& [i, v] : fibers_) {
    if (const auto* w = other.fiber_if_present(i))
      out.fibers_[i] = v + *w;
    else
      out.fibers_[i] = v;
  }
  for (const auto& [i, w] : other.fibers_)
    if (!fibers_.count(i)) out.fibers_[i] = w;
  return out;
}

Section Section::operator-(const Section& other) const {
  require_compatible(*this, other);
  Section out(layout_);
  for (const auto& [i, v] : fibers_) {
    if (const auto* w = other.fiber_if_present(i))
      out.fibers_[i] = v - *w;
    else
      out.fibers_[i] = v;
  }
  for (const auto& [i, w] : other.fibers_)
    if (!fibers_.count(i)) out.fibers_[i] = -w;
  return out;
}

Section Section::operator*(Complex scalar) const {
  Section out(layout_);
  for (const auto& [i, v] : fibers_) out.fibers_[i] = scalar * v;
  return out;
}

Complex inner(const Section& phi, const Section& psi) {
  require_compatible(phi, psi);
  const FiberLayout& layout = phi.layout();
  Complex total = 0.0;
  // Fixed atom order; Eigen's dot conjugates its first argument.
  for (const auto& [i, v] : phi.stored()) {
    const auto* w = psi.fiber_if_present(i);
    if (!w) continue;
    total += layout.space().weight_at(i) * layout.metric_scale_at(i) * v.dot(*w);
  }
  return total;
}

double norm_sq(const Section& phi) {
  const FiberLayout& layout = phi.layout();
  double total = 0.0;
  for (const auto& [i, v] : phi.stored())
    total += layout.space().weight_at(i) * layout.metric_scale_at(i) * v.squaredNorm();
  return total;
}

double norm(const Section& phi) { return std::sqrt(norm_sq(phi)); }

Section project(const IndexSet& delta, const Section& phi) {
  const AtomicMeasureSpace& space = phi.layout().space();
  for (Atom a : delta.members())
    if (!space.contains(a)) raise(Errc::foreign_atom, "atom " + std::to_string(a) + " not in layout");
  Section out(phi.layout());
  for (const auto& [i, v] : phi.stored())
    if (delta.contains(space.atom_at(i))) out.set_fiber(space.atom_at(i), v);
  return out;
}

Section extend_by_zero(const Eigen::VectorXcd& fiber_vector, Atom atom, const FiberLayout& layout) {
  Section out(layout);
  out.set_fiber(atom, fiber_vector);
  return out;
}

}  // namespace diforms
