#include "airyhier/airy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <map>
#include <mutex>
#include <thread>

#include "airyhier/quadrature.hpp"

namespace airyhier::specfun {

namespace {

using cplx = std::complex<double>;

cplx cpow_int(cplx z, int p) {
  cplx r(1.0, 0.0);
  for (int k = 0; k < p; ++k) r *= z;
  return r;
}

// Hyperbola-shaped contour lambda(s) = A sinh(s) + i Y cosh(s) with tail
// angles +-(pi - b), b against the positive real axis.
struct Path {
  int n;
  double x;
  double A, Y, b;
  double S;     // truncation parameter
  double hmax;  // max over the path of log|exp(i psi)|
  double hend;  // value at the truncation endpoint

  cplx lambda(double s) const { return {A * std::sinh(s), Y * std::cosh(s)}; }
  cplx dlambda(double s) const { return {A * std::cosh(s), Y * std::sinh(s)}; }

  cplx psi(cplx l) const {
    return cpow_int(l, 2 * n + 1) / double(2 * n + 1) + x * l;
  }
  // log-magnitude of exp(i psi) at path parameter s
  double h(double s) const { return -psi(lambda(s)).imag(); }
};

Path make_path(int n, double x, const ContourSpec& c, double truncation) {
  Path p;
  p.n = n;
  p.x = x;
  const double bisector = M_PI / (2.0 * (2 * n + 1));
  p.b = (c.b > 0.0) ? c.b : bisector;
  if (c.vertex > 0.0) {
    p.Y = c.vertex;
  } else if (x > 0.0 && n == 1) {
    // pass through the damped saddle at height sqrt(x); for n >= 2 a high
    // vertex would drag the path through the growth sector between the first
    // two decay sectors of exp(i psi), so keep it low and let the x-term of
    // the phase do the damping.
    p.Y = std::max(0.4, std::sqrt(x));
  } else {
    p.Y = 0.4;
  }
  if (x < 0.0) {
    // Cap the on-path magnitude ~ exp(sin(b) * E) to bound cancellation.
    const double E = (2.0 * n / (2 * n + 1)) * std::pow(-x, (2.0 * n + 1) / (2 * n));
    const double cap = c.exponent_cap;
    if (std::sin(p.b) * E > cap) p.b = std::asin(cap / E);
  }
  p.A = p.Y / std::tan(p.b);

  // Scan for the on-path maximum and the truncation point (h symmetric in s).
  const double drop = std::log(truncation) - 4.0;
  double hmax = p.h(0.0);
  double s = 0.0;
  const double ds = 0.05;
  for (;;) {
    s += ds;
    double hs = p.h(s);
    hmax = std::max(hmax, hs);
    if (s > 0.5 && hs < hmax + drop) break;
    if (s > 60.0) break;  // unreachable: the 2n+1 power decays super-fast
  }
  p.S = s + 0.2;
  p.hmax = hmax;
  p.hend = p.h(p.S);
  return p;
}

// All derivative orders 0..jmax of Ai_n at x by adaptive composite
// Gauss-Legendre along the path. Pure contour quadrature (no asymptotics).
std::vector<double> contour_derivs(int n, double x, int jmax, const ContourSpec& cspec,
                                   const QuadConfig& q, double* imag_res = nullptr) {
  const Path p = make_path(n, x, cspec, q.truncation);
  const quad::Rule& base = quad::gauss_legendre(q.points_per_panel);
  const cplx I(0.0, 1.0);

  struct Sums {
    std::vector<cplx> acc;
    std::vector<double> l1;  // per-order L1 norm, the cancellation scale
  };
  auto evaluate = [&](int panels) {
    Sums s_out{std::vector<cplx>(jmax + 1, cplx(0.0, 0.0)),
               std::vector<double>(jmax + 1, 0.0)};
    const double h = 2.0 * p.S / panels;
    for (int pa = 0; pa < panels; ++pa) {
      const double a = -p.S + pa * h;
      for (std::size_t k = 0; k < base.size(); ++k) {
        const double s = a + 0.5 * h * (base.x[k] + 1.0);
        const double w = 0.5 * h * base.w[k];
        const cplx l = p.lambda(s);
        const cplx g = std::exp(I * p.psi(l)) * p.dlambda(s) * w;
        cplx il_pow(1.0, 0.0);
        const cplx il = I * l;
        for (int j = 0; j <= jmax; ++j) {
          s_out.acc[j] += g * il_pow;
          s_out.l1[j] += std::abs(g * il_pow);
          il_pow *= il;
        }
      }
    }
    for (auto& v : s_out.acc) v /= 2.0 * M_PI;
    for (auto& v : s_out.l1) v /= 2.0 * M_PI;
    return s_out;
  };

  int panels = q.initial_panels;
  Sums prev = evaluate(panels);
  constexpr double eps = 2.2e-16;
  for (int d = 0; d < q.max_doublings; ++d) {
    panels *= 2;
    Sums cur = evaluate(panels);
    bool ok = true;
    for (int j = 0; j <= jmax; ++j) {
      // Accept when the refinement change is within tolerance relative to the
      // value, or below the cancellation noise floor of the alternating sum.
      const double noise = 30.0 * eps * cur.l1[j];
      if (std::abs(cur.acc[j] - prev.acc[j]) >
          std::max(q.tol * std::abs(cur.acc[j]), noise))
        ok = false;
    }
    prev = std::move(cur);
    if (ok) {
      std::vector<double> out(jmax + 1);
      double ir = 0.0;
      for (int j = 0; j <= jmax; ++j) {
        out[j] = prev.acc[j].real();
        const double scale =
            std::max(std::abs(prev.acc[j]), 30.0 * eps * prev.l1[j]);
        ir = std::max(ir, std::abs(prev.acc[j].imag()) / scale);
      }
      if (imag_res) *imag_res = ir;
      return out;
    }
  }
  double res = 0.0;
  for (int j = 0; j <= jmax; ++j) res = std::max(res, std::abs(prev.acc[j]));
  throw QuadratureError("Ai_" + std::to_string(n) + " contour quadrature did not converge at x=" +
                            std::to_string(x),
                        res);
}

}  // namespace

HigherAiryEvaluator::HigherAiryEvaluator(int n, ContourSpec contour, QuadConfig quad,
                                         double switch_x)
    : n_(n), contour_(contour), quad_(quad), switch_x_(switch_x) {
  if (n < 1) throw std::invalid_argument("HigherAiryEvaluator: n >= 1 required");
  const double sector_hi = M_PI / (2 * n + 1);
  if (contour_.b != 0.0 && (contour_.b <= 0.0 || contour_.b >= sector_hi))
    throw std::invalid_argument("HigherAiryEvaluator: contour angle outside (0, pi/(2n+1))");
}

std::vector<double> HigherAiryEvaluator::derivs(double x, int jmax) const {
  if (jmax < 0 || jmax > 2 * n_ + 2)
    throw std::invalid_argument("derivs: order cap is 2n+2");
  return contour_derivs(n_, x, jmax, contour_, quad_);
}

double HigherAiryEvaluator::deriv(double x, int j) const {
  if (j < 0 || j > 2 * n_) throw std::invalid_argument("deriv: 0 <= j <= 2n required");
  if (j == 0 && x > switch_x_) return ai_asymptotic(n_, x, Side::positive);
  return contour_derivs(n_, x, j, contour_, quad_)[j];
}

double HigherAiryEvaluator::imag_residual(double x) const {
  double ir = 0.0;
  contour_derivs(n_, x, 0, contour_, quad_, &ir);
  return ir;
}

double HigherAiryEvaluator::endpoint_decay(double x) const {
  const Path p = make_path(n_, x, contour_, quad_.truncation);
  return std::exp(p.hend - p.hmax);
}

double ai_asymptotic(int n, double x, Side side) {
  if (n < 1) throw std::invalid_argument("ai_asymptotic: n >= 1 required");
  if (!(x > 0.0)) throw std::domain_error("ai_asymptotic: x > 0 required");
  const double xi = (2.0 * n / (2 * n + 1)) * std::pow(x, (2.0 * n + 1) / (2 * n));
  const double amp = std::pow(x, -(2.0 * n - 1) / (4 * n)) / std::sqrt(n * M_PI);
  if (side == Side::negative) return amp * std::cos(xi - 0.25 * M_PI);
  if (n == 1) {
    // The two leading saddles coincide on the imaginary axis: a single
    // contribution of half the pair amplitude and no oscillation.
    return 0.5 * amp * std::exp(-xi);
  }
  const double phase = xi * std::cos(M_PI / (2 * n)) + 0.5 * (-0.5 * M_PI + M_PI / (2 * n));
  return amp * std::exp(-xi * std::sin(M_PI / (2 * n))) * std::cos(phase);
}

namespace {

const HigherAiryEvaluator& default_evaluator(int n) {
  static std::map<int, HigherAiryEvaluator> pool;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = pool.find(n);
  if (it == pool.end()) it = pool.emplace(n, HigherAiryEvaluator(n)).first;
  return it->second;
}

}  // namespace

double ai(int n, double x) { return default_evaluator(n).deriv(x, 0); }

double ai_deriv(int n, double x, int j) { return default_evaluator(n).deriv(x, j); }

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

AiryCache::AiryCache(int n, double lo, double hi) : n_(n), lo_(lo), hi_(hi), eval_(n) {
  if (!(hi > lo)) throw std::invalid_argument("AiryCache: hi > lo required");
  const double target_h = 1.0 / 128.0;
  npts_ = static_cast<std::size_t>(std::ceil((hi - lo) / target_h)) + 1;
  h_ = (hi - lo) / static_cast<double>(npts_ - 1);
  const int jtop = 2 * n + 2;
  vals_.assign(jtop + 1, std::vector<double>(npts_));

  const unsigned nthreads =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), 8u);
  const std::size_t chunk = (npts_ + nthreads - 1) / nthreads;
  std::vector<std::future<void>> futs;
  for (unsigned w = 0; w < nthreads; ++w) {
    const std::size_t k0 = w * chunk, k1 = std::min(npts_, k0 + chunk);
    if (k0 >= k1) break;
    futs.push_back(std::async(std::launch::async, [this, jtop, k0, k1] {
      for (std::size_t k = k0; k < k1; ++k) {
        const std::vector<double> d = eval_.derivs(lo_ + h_ * static_cast<double>(k), jtop);
        for (int j = 0; j <= jtop; ++j) vals_[j][k] = d[j];
      }
    }));
  }
  for (auto& f : futs) f.get();
}

double AiryCache::deriv(double x, int j) const {
  if (j < 0 || j > 2 * n_) throw std::invalid_argument("AiryCache::deriv: 0 <= j <= 2n");
  if (x < lo_ || x > hi_) return eval_.derivs(x, j)[j];
  std::size_t k = static_cast<std::size_t>((x - lo_) / h_);
  if (k >= npts_ - 1) k = npts_ - 2;
  const double u = (x - (lo_ + h_ * static_cast<double>(k))) / h_;
  const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
  // quintic Hermite basis (value, first, second derivative at both ends)
  const double H0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
  const double H1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
  const double H2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
  const double H3 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
  const double H4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
  const double H5 = 0.5 * u3 - u4 + 0.5 * u5;
  const double f0 = vals_[j][k], f1 = vals_[j][k + 1];
  const double d0 = vals_[j + 1][k] * h_, d1 = vals_[j + 1][k + 1] * h_;
  const double s0 = vals_[j + 2][k] * h_ * h_, s1 = vals_[j + 2][k + 1] * h_ * h_;
  return f0 * H0 + d0 * H1 + s0 * H2 + f1 * H3 + d1 * H4 + s1 * H5;
}

std::shared_ptr<const AiryCache> cache_for(int n, double lo, double hi) {
  static std::map<int, std::shared_ptr<const AiryCache>> pool;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = pool.find(n);
  if (it != pool.end() && it->second->covers(lo, hi)) return it->second;
  double nlo = std::floor(lo) - 1.0, nhi = std::ceil(hi) + 1.0;
  if (it != pool.end()) {
    nlo = std::min(nlo, it->second->lo());
    nhi = std::max(nhi, it->second->hi());
  }
  auto built = std::make_shared<const AiryCache>(n, nlo, nhi);
  pool[n] = built;
  return built;
}

}  // namespace airyhier::specfun
