#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

#include "diforms/direct_integral.hpp"
#include "diforms/errors.hpp"
#include "diforms/forms.hpp"

namespace testutil {

template <typename Fn>
bool throws_errc(Fn&& fn, diforms::Errc expected) {
  try {
    fn();
  } catch (const diforms::Error& e) {
    return e.code() == expected;
  } catch (...) {
    return false;
  }
  return false;
}

/// Layout with one scalar fiber per atom.
inline diforms::FiberLayout scalar_layout(std::vector<diforms::Atom> atoms,
                                          std::vector<double> weights) {
  auto space = diforms::make_space(std::move(atoms), std::move(weights));
  return diforms::FiberLayout(space, std::vector<int>(space.size(), 1));
}

/// Scalar section with the given complex values, one per atom in order.
inline diforms::Section scalar_section(const diforms::FiberLayout& layout,
                                       std::initializer_list<std::complex<double>> values) {
  diforms::Section s(layout);
  std::size_t i = 0;
  for (std::complex<double> v : values) {
    Eigen::VectorXcd fiber(1);
    fiber(0) = v;
    s.set_fiber(layout.space().atom_at(i++), fiber);
  }
  return s;
}

/// Scalar form with the given real diagonal entries, one per atom in order.
inline diforms::DirectIntegralForm scalar_form(const diforms::FiberLayout& layout,
                                               std::initializer_list<double> entries) {
  std::vector<Eigen::MatrixXcd> mats;
  for (double e : entries) {
    Eigen::MatrixXcd m(1, 1);
    m(0, 0) = e;
    mats.push_back(m);
  }
  return diforms::DirectIntegralForm(layout, std::move(mats));
}

inline Eigen::VectorXcd cvec(std::initializer_list<std::complex<double>> values) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (std::complex<double> x : values) v(i++) = x;
  return v;
}

}  // namespace testutil
