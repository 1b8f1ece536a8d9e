#include "airyhier/fredholm.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "airyhier/airy.hpp"
#include "airyhier/quadrature.hpp"

namespace airyhier::fredholm {

namespace {

constexpr int kPanelPts = 16;
constexpr double kDensity = 16.0;  // default nodes per unit length

// Composite Gauss rule with at least m nodes (0 -> density-based default).
quad::Rule halfline_rule(double a, double b, int m) {
  const double len = b - a;
  int panels = (m > 0) ? (m + kPanelPts - 1) / kPanelPts
                       : static_cast<int>(std::ceil(len * kDensity / kPanelPts));
  panels = std::max(panels, 2);
  return quad::composite(quad::gauss_legendre(kPanelPts), a, b, panels);
}

// Rule for integrals against w on [a,b]: panel widths graded geometrically
// away from the transition at 0 (width ~ 1/w'(0)), capped at 1 to resolve
// Ai_n oscillation. m > default node count subdivides every panel.
quad::Rule weighted_rule(const weights::Weight& w, double a, double b, int m) {
  const double scale = std::min(1.0, 0.25 / w.derivative(0.0));
  std::vector<double> cuts{a};
  if (a < 0.0 && b > 0.0) {
    std::vector<double> left;
    for (double width = scale, z = 0.0; z > a; width = std::min(1.0, 2 * width)) {
      z = std::max(a, z - width);
      left.push_back(z);
    }
    cuts.assign(left.rbegin(), left.rend());
    cuts.insert(cuts.begin(), a);
    if (cuts.back() != 0.0) cuts.push_back(0.0);
    for (double width = scale, z = 0.0; z < b; width = std::min(1.0, 2 * width)) {
      z = std::min(b, z + width);
      cuts.push_back(z);
    }
  } else {
    const int panels = std::max(2, static_cast<int>(std::ceil(b - a)));
    for (int k = 1; k <= panels; ++k) cuts.push_back(a + (b - a) * k / panels);
  }
  // deduplicate near-coincident breakpoints
  std::vector<double> uniq{cuts.front()};
  for (double c : cuts)
    if (c > uniq.back() + 1e-12) uniq.push_back(c);
  const int base = static_cast<int>(uniq.size() - 1) * kPanelPts;
  const int sub = (m > base) ? (m + base - 1) / base : 1;
  quad::Rule r;
  const auto g = quad::gauss_legendre(kPanelPts);
  for (std::size_t j = 0; j + 1 < uniq.size(); ++j) {
    const auto cell =
        quad::composite(g, uniq[j], uniq[j + 1], sub);
    r.x.insert(r.x.end(), cell.x.begin(), cell.x.end());
    r.w.insert(r.w.end(), cell.w.begin(), cell.w.end());
  }
  return r;
}

// Outer truncation of the half-line: the kernel diagonal decays like
// w(-(x+t)) ~ exp(-omega (x+t)).
double halfline_upper(double t, const weights::Weight& w) {
  return std::max(4.0, -t + 42.0 / w.decay_rate + 2.0);
}

std::shared_ptr<const specfun::AiryCache> cache_for_range(int n, double lo,
                                                          double hi) {
  return specfun::cache_for(n, lo - 1.0, hi + 1.0);
}

struct Factor {
  // B[i][k] = sqrt(a_w[i]) * Ai_n(a[i] + b[k] + t) * sqrt(b_w[k]); the
  // b-side weights already include any density factor.
  Eigen::MatrixXd B;
};

Eigen::MatrixXd factor_matrix(int n, double t, const quad::Rule& ar,
                              const std::vector<double>& aw,
                              const quad::Rule& br,
                              const std::vector<double>& bw) {
  const double cut = ai_cutoff(n);
  double lo = ar.x.front() + br.x.front() + t;
  auto cache = cache_for_range(n, std::min(lo, -1.0), cut);
  const auto na = static_cast<Eigen::Index>(ar.x.size());
  const auto nb = static_cast<Eigen::Index>(br.x.size());
  Eigen::MatrixXd B(na, nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    const double sa = std::sqrt(aw[i]);
    for (Eigen::Index k = 0; k < nb; ++k) {
      const double s = ar.x[i] + br.x[k] + t;
      B(i, k) = (s > cut) ? 0.0 : sa * cache->ai(s) * std::sqrt(bw[k]);
    }
  }
  return B;
}

KernelDiscretization finalize(int n, double t, double lambda,
                              const quad::Rule& outer,
                              const std::vector<double>& outer_w,
                              const quad::Rule& inner,
                              const std::vector<double>& inner_w) {
  Eigen::MatrixXd B = factor_matrix(n, t, outer, outer_w, inner, inner_w);
  KernelDiscretization d;
  d.n = n;
  d.t = t;
  d.lambda = lambda;
  d.x_nodes = outer.x;
  d.x_weights = outer_w;
  d.z_nodes = inner.x;
  d.z_weights = inner_w;
  d.matrix = lambda * (B * B.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.matrix,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("fredholm: eigensolve failed");
  d.eigenvalues = es.eigenvalues();
  if (lambda >= 0.0 && lambda <= 1.0) {
    // discrete shadow of 0 <= K_{t,n} <= 1
    if (d.eigenvalues(0) < -1e-8 ||
        d.eigenvalues(d.eigenvalues.size() - 1) > lambda + 1e-6)
      throw std::runtime_error(
          "fredholm: Nystrom eigenvalue outside [0, lambda] (assembly "
          "inaccuracy)");
  }
  return d;
}

}  // namespace

double ai_cutoff(int n, double eps) {
  const double m = 2.0 * n;
  const double c = m / (m + 1.0) * std::sin(M_PI / m);
  return std::pow(-std::log(eps) / c, m / (m + 1.0));
}

double KernelDiscretization::logdet() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double mu = eigenvalues(i);
    if (mu >= 1.0) throw std::runtime_error("fredholm: determinant not positive");
    s += std::log1p(-mu);
  }
  return s;
}

double KernelDiscretization::det() const { return std::exp(logdet()); }

double kernel_value(int n, double t, const weights::Weight& w, double x,
                    double y) {
  if (x < 0.0 || y < 0.0)
    throw std::invalid_argument("kernel_value: x, y >= 0 required");
  const double cut = ai_cutoff(n);
  const double zlo = w.support_lo(1e-18);
  const double zhi = cut - t - std::min(x, y);
  if (zhi <= zlo) return 0.0;
  const auto zr = weighted_rule(w, zlo, zhi, 0);
  auto cache = cache_for_range(n, zlo + t - 1.0, cut);
  double s = 0.0;
  for (std::size_t k = 0; k < zr.x.size(); ++k) {
    const double z = zr.x[k];
    const double a = x + z + t, b = z + y + t;
    if (a > cut || b > cut) continue;
    s += zr.w[k] * w.value(z) * cache->ai(a) * cache->ai(b);
  }
  return s;
}

KernelDiscretization assemble_halfline(int n, double t, double lambda,
                                       const weights::Weight& w, int m_x,
                                       int m_z) {
  const double cut = ai_cutoff(n);
  const auto xr = halfline_rule(0.0, halfline_upper(t, w), m_x);
  const auto zr = weighted_rule(w, w.support_lo(1e-18), cut - t, m_z);
  std::vector<double> zw(zr.x.size());
  for (std::size_t k = 0; k < zr.x.size(); ++k)
    zw[k] = zr.w[k] * w.value(zr.x[k]);
  return finalize(n, t, lambda, xr, xr.w, zr, zw);
}

KernelDiscretization assemble_sigma(int n, double t, double lambda,
                                    const weights::Weight& w, int m_z,
                                    int m_y) {
  const double cut = ai_cutoff(n);
  const auto zr = weighted_rule(w, w.support_lo(1e-18), cut - t, m_z);
  const auto yr = halfline_rule(0.0, halfline_upper(t, w), m_y);
  std::vector<double> zw(zr.x.size());
  for (std::size_t k = 0; k < zr.x.size(); ++k)
    zw[k] = zr.w[k] * w.value(zr.x[k]);
  return finalize(n, t, lambda, zr, zw, yr, yr.w);
}

double det_halfline(int n, double t, double lambda, const weights::Weight& w,
                    int m_x, int m_z) {
  if (lambda == 0.0) return 1.0;
  return assemble_halfline(n, t, lambda, w, m_x, m_z).det();
}

double det_sigma(int n, double t, double lambda, const weights::Weight& w,
                 int m_z, int m_y) {
  if (lambda == 0.0) return 1.0;
  return assemble_sigma(n, t, lambda, w, m_z, m_y).det();
}

double det_step(int n, double t, double lambda, int m) {
  if (lambda == 0.0) return 1.0;
  const double cut = ai_cutoff(n);
  const auto zr = halfline_rule(0.0, std::max(4.0, cut - t), m);
  const auto yr = halfline_rule(0.0, std::max(4.0, cut - t), m);
  return finalize(n, t, lambda, zr, zr.w, yr, yr.w).det();
}

double trace_kernel(int n, double t, const weights::Weight& w) {
  // trace of the lambda=1 symmetrized matrix equals the quadrature value of
  // int_0^inf K(x,x) dx
  const double cut = ai_cutoff(n);
  const auto xr = halfline_rule(0.0, halfline_upper(t, w), 0);
  const auto zr = weighted_rule(w, w.support_lo(1e-18), cut - t, 0);
  auto cache = cache_for_range(n, zr.x.front() + t - 1.0, cut);
  double s = 0.0;
  for (std::size_t i = 0; i < xr.x.size(); ++i) {
    double diag = 0.0;
    for (std::size_t k = 0; k < zr.x.size(); ++k) {
      const double a = xr.x[i] + zr.x[k] + t;
      if (a > cut) continue;
      const double v = cache->ai(a);
      diag += zr.w[k] * w.value(zr.x[k]) * v * v;
    }
    s += xr.w[i] * diag;
  }
  return s;
}

}  // namespace airyhier::fredholm
