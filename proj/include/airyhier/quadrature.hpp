#pragma once

#include <functional>
#include <vector>

namespace airyhier::quad {

/// A quadrature rule: nodes x and positive weights w.
struct Rule {
  std::vector<double> x;
  std::vector<double> w;

  std::size_t size() const { return x.size(); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * f(x[k]);
    return s;
  }
};

/// m-point Gauss-Legendre rule on [-1,1] (Newton iteration on P_m).
const Rule& gauss_legendre(int m);

/// Affine image of a [-1,1] rule on [a,b].
Rule scaled(const Rule& base, double a, double b);

/// Composite rule: the base [-1,1] rule replicated over `panels` equal
/// subintervals of [a,b].
Rule composite(const Rule& base, double a, double b, int panels);

/// Composite rule over explicit breakpoints a=b0<b1<...<bk=b with
/// `panels_per_cell[i]` equal panels inside each cell.
Rule composite_cells(const Rule& base, const std::vector<double>& breaks,
                     const std::vector<int>& panels_per_cell);

}  // namespace airyhier::quad
