#include "airyhier/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace airyhier::quad {

namespace {

Rule make_gauss_legendre(int m) {
  if (m < 1) throw std::invalid_argument("gauss_legendre: m >= 1 required");
  Rule r;
  r.x.resize(m);
  r.w.resize(m);
  for (int k = 0; k < m; ++k) {
    // Chebyshev-based initial guess, then Newton on P_m(x) = 0.
    double x = std::cos(M_PI * (k + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (m == 1) p1 = x;
      for (int j = 2; j <= m; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double pm = (m == 1) ? x : p1;
      double pm1 = (m == 1) ? 1.0 : p0;
      dp = m * (x * pm - pm1) / (x * x - 1.0);
      double dx = pm / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[m - 1 - k] = x;
    r.w[m - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const Rule& gauss_legendre(int m) {
  static std::map<int, Rule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, make_gauss_legendre(m)).first;
  return it->second;
}

Rule scaled(const Rule& base, double a, double b) {
  Rule r;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  r.x.reserve(base.size());
  r.w.reserve(base.size());
  for (std::size_t k = 0; k < base.size(); ++k) {
    r.x.push_back(mid + half * base.x[k]);
    r.w.push_back(half * base.w[k]);
  }
  return r;
}

Rule composite(const Rule& base, double a, double b, int panels) {
  if (panels < 1) throw std::invalid_argument("composite: panels >= 1 required");
  Rule r;
  r.x.reserve(base.size() * panels);
  r.w.reserve(base.size() * panels);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    Rule part = scaled(base, a + p * h, a + (p + 1) * h);
    r.x.insert(r.x.end(), part.x.begin(), part.x.end());
    r.w.insert(r.w.end(), part.w.begin(), part.w.end());
  }
  return r;
}

Rule composite_cells(const Rule& base, const std::vector<double>& breaks,
                     const std::vector<int>& panels_per_cell) {
  if (breaks.size() < 2 || panels_per_cell.size() + 1 != breaks.size())
    throw std::invalid_argument("composite_cells: inconsistent breakpoints");
  Rule r;
  for (std::size_t c = 0; c + 1 < breaks.size(); ++c) {
    Rule part = composite(base, breaks[c], breaks[c + 1], panels_per_cell[c]);
    r.x.insert(r.x.end(), part.x.begin(), part.x.end());
    r.w.insert(r.w.end(), part.w.begin(), part.w.end());
  }
  return r;
}

}  // namespace airyhier::quad
