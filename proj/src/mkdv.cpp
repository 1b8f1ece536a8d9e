#include "airyhier/mkdv.hpp"

#include <cmath>
#include <future>
#include <map>
#include <mutex>
#include <stdexcept>

#include "airyhier/airy.hpp"
#include "airyhier/fredholm.hpp"
#include "airyhier/quadrature.hpp"

namespace airyhier::mkdv {

namespace {

// The evolution right side g of dv/dt_{2n+1} = g, compiled to doubles.
struct GTerm {
  double c;
  int order;
  std::vector<cas::Bracket> brackets;
};

const std::vector<GTerm>& mkdv_compiled(int n) {
  static std::map<int, std::vector<GTerm>> pool;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = pool.find(n);
  if (it == pool.end()) {
    const auto g = cas::mkdv_rhs(cas::mkdv_member(n));
    std::vector<GTerm> out;
    for (const auto& t : g) {
      if (!t.c.is_real() || t.tx != 0 || t.order < 0)
        throw std::logic_error("mkdv: unexpected term shape in evolution rhs");
      out.push_back({t.c.re.convert_to<double>(), t.order, t.brackets});
    }
    it = pool.emplace(n, std::move(out)).first;
  }
  return it->second;
}

double tau_power(double tau, int k) { return std::pow(tau, k); }

// d^j v / dt1^j at frame coordinate x: one 1/tau from the amplitude and one
// per t1-derivative, argument mapping x -> x/tau.
double frame_value(const idpii::FieldState& s, double tau, double x, int j) {
  return tau_power(tau, -(j + 1)) * idpii::field_derivative(s, x / tau, j);
}

double t_mkdv(double tau, int n) {
  return std::pow(tau, 2 * n + 1) / (2 * n + 1);
}

// Solver run backing the tau-frame: the underlying u-solution uses the
// *scaled* weight x -> w(tau x) (the tau-family of determinants rescales
// the weight; for Fermi this maps alpha to alpha tau), while the frame's
// own sigma rule stays that of the base weight w. Probes carry every frame
// node x_i at the u-coordinate x_i/tau so the reduction needs no
// interpolation; `extra` points are carried the same way.
idpii::FieldState frame_state(int n, double lambda, const weights::Weight& w,
                              const std::vector<double>& frame_nodes,
                              double tau, double t1,
                              const idpii::SolverOptions& opt,
                              const std::vector<double>& extra) {
  if (tau <= 0.0) throw std::invalid_argument("mkdv: tau > 0 required");
  const double t = t1 / tau;
  if (t > opt.T0)
    throw std::invalid_argument("mkdv: t1/tau beyond the seeding point T0");
  auto ws = weights::scale_weight(w, tau);
  auto grid = weights::sigma_quadrature(ws, opt.grid_m);
  std::vector<double> probes;
  for (double e : extra) probes.push_back(e / tau);
  for (double xi : frame_nodes) probes.push_back(xi / tau);
  auto s = idpii::seed(n, lambda, opt.T0, grid, opt.branch, probes);
  if (t < opt.T0) s = idpii::step_to(s, t, opt.tol, opt.blowup);
  return s;
}

double rhs_at_columns(const std::vector<GTerm>& g, const MkdvFrame& f,
                      const std::vector<double>& cols) {
  double r = 0.0;
  for (const auto& term : g) {
    double v = term.c * cols[term.order];
    for (const auto& b : term.brackets) v *= f.bracket(b[0], b[1]);
    r += v;
  }
  return r;
}

}  // namespace

double MkdvFrame::bracket(int a, int b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * v(i, a) * v(i, b);
  return s;
}

MkdvFrame scaling_reduce(const idpii::FieldState& s, double tau,
                         const std::vector<double>& x,
                         const std::vector<double>& w) {
  if (tau <= 0.0) throw std::invalid_argument("mkdv: tau > 0 required");
  MkdvFrame f;
  f.n = s.n;
  f.tau = tau;
  f.t1 = tau * s.t;
  f.t2np1 = t_mkdv(tau, s.n);
  f.x = x;
  f.w = w;
  const int cols = 2 * s.n + 2;
  f.v.resize(static_cast<Eigen::Index>(x.size()), cols);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (int j = 0; j < cols; ++j) f.v(i, j) = frame_value(s, tau, x[i], j);
  return f;
}

MkdvFrame scaling_reduce(const idpii::FieldState& s, double tau) {
  return scaling_reduce(s, tau, s.grid.nodes, s.grid.weights);
}

MkdvFrame make_frame(int n, double lambda, const weights::Weight& w,
                     double tau, double t1, const idpii::SolverOptions& opt) {
  auto base = weights::sigma_quadrature(w, opt.grid_m);
  auto s = frame_state(n, lambda, w, base.nodes, tau, t1, opt, {});
  return scaling_reduce(s, tau, base.nodes, base.weights);
}

double mkdv_residual_at(int n, double tau, double delta_tau, double t1,
                        double x, double lambda, const weights::Weight& w,
                        const idpii::SolverOptions& opt) {
  if (delta_tau <= 0.0 || tau - delta_tau <= 0.0)
    throw std::invalid_argument("mkdv: need 0 < delta_tau < tau");
  // the two tau-perturbed solves are independent; run them concurrently
  auto side = [&](double tp) {
    auto s = frame_state(n, lambda, w, {}, tp, t1, opt, {x});
    return frame_value(s, tp, x, 0);
  };
  auto plus = std::async(std::launch::async, side, tau + delta_tau);
  auto minus = std::async(std::launch::async, side, tau - delta_tau);
  auto base = weights::sigma_quadrature(w, opt.grid_m);
  auto sc = frame_state(n, lambda, w, base.nodes, tau, t1, opt, {x});
  auto f = scaling_reduce(sc, tau, base.nodes, base.weights);
  const auto& g = mkdv_compiled(n);
  std::vector<double> cols(2 * n + 2);
  for (int j = 0; j < 2 * n + 2; ++j) cols[j] = frame_value(sc, tau, x, j);
  const double rhs = rhs_at_columns(g, f, cols);
  const double dt =
      t_mkdv(tau + delta_tau, n) - t_mkdv(tau - delta_tau, n);
  const double lhs = (plus.get() - minus.get()) / dt;
  return std::abs(lhs - rhs);
}

double mkdv_residual(int n, double tau, double delta_tau, double t1,
                     double lambda, const weights::Weight& w,
                     const idpii::SolverOptions& opt) {
  if (delta_tau <= 0.0 || tau - delta_tau <= 0.0)
    throw std::invalid_argument("mkdv: need 0 < delta_tau < tau");
  auto grid = weights::sigma_quadrature(w, opt.grid_m);
  auto side = [&](double tp) {
    auto s = frame_state(n, lambda, w, grid.nodes, tp, t1, opt, {});
    std::vector<double> vals(grid.nodes.size());
    for (std::size_t i = 0; i < grid.nodes.size(); ++i)
      vals[i] = frame_value(s, tp, grid.nodes[i], 0);
    return vals;
  };
  auto plus = std::async(std::launch::async, side, tau + delta_tau);
  auto minus = std::async(std::launch::async, side, tau - delta_tau);
  auto f = make_frame(n, lambda, w, tau, t1, opt);
  const auto& g = mkdv_compiled(n);
  const double dt =
      t_mkdv(tau + delta_tau, n) - t_mkdv(tau - delta_tau, n);
  const auto vp = plus.get();
  const auto vm = minus.get();
  double worst = 0.0;
  std::vector<double> cols(2 * n + 2);
  for (std::size_t i = 0; i < f.x.size(); ++i) {
    for (int j = 0; j < 2 * n + 2; ++j) cols[j] = f.v(i, j);
    const double rhs = rhs_at_columns(g, f, cols);
    const double lhs = (vp[i] - vm[i]) / dt;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

FermiDistribution fermi_distribution(int n, double alpha, double t,
                                     const idpii::SolverOptions& opt) {
  if (alpha <= 0.0) throw std::invalid_argument("mkdv: alpha > 0 required");
  auto wa = weights::make_fermi(alpha);
  FermiDistribution r;
  r.det = fredholm::det_halfline(n, t, 1.0, wa);

  // Frame route: F = exp[-int_{alpha t}^inf (s - alpha t) I(s) ds] with
  // I(s) = int v^2(s, .|x) dsigma_1(x) and v(s|x) = (1/alpha) u(s/alpha |
  // x/alpha), u solved for the Fermi-alpha measure. Substituting s =
  // alpha*r turns this into int_t^inf (r - t) S(r) dr with
  // S(r) = sum_i w1_i u^2(r | x1_i/alpha) over the unit-Fermi sigma rule.
  auto grid_a = weights::sigma_quadrature(wa, opt.grid_m);
  auto grid_1 = weights::sigma_quadrature(weights::make_fermi(1.0), opt.grid_m);
  std::vector<double> probes(grid_1.nodes.size());
  for (std::size_t i = 0; i < probes.size(); ++i)
    probes[i] = grid_1.nodes[i] / alpha;

  double logF = 0.0;
  if (t < opt.T0) {
    auto s = idpii::seed(n, 1.0, opt.T0, grid_a, opt.branch, probes);
    const auto rule =
        quad::composite(quad::gauss_legendre(16), t, opt.T0,
                        std::max(4, static_cast<int>(std::ceil(opt.T0 - t))));
    for (std::size_t k = rule.x.size(); k-- > 0;) {
      s = idpii::step_to(s, rule.x[k], opt.tol, opt.blowup);
      double S = 0.0;
      for (std::size_t i = 0; i < probes.size(); ++i)
        S += grid_1.weights[i] * s.probe_values(i, 0) * s.probe_values(i, 0);
      logF -= rule.w[k] * (rule.x[k] - t) * S;
    }
  }
  // tail r > max(T0, t) from the squared asymptotic seed
  const double s0 = std::max(opt.T0, t);
  const double s1 = s0 + 45.0 / wa.decay_rate + 5.0;
  const double cut = fredholm::ai_cutoff(n);
  auto cache = specfun::cache_for(n, s0 + probes.front() - 1.0, cut + 1.0);
  const auto tail =
      quad::composite(quad::gauss_legendre(16), s0, s1,
                      std::max(4, static_cast<int>(std::ceil(s1 - s0))));
  for (std::size_t k = 0; k < tail.x.size(); ++k) {
    double S = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const double arg = tail.x[k] + probes[i];
      if (arg > cut) continue;
      const double a = cache->ai(arg);
      S += grid_1.weights[i] * a * a;
    }
    logF -= tail.w[k] * (tail.x[k] - t) * S;
  }
  r.frame_value = std::exp(logF);
  r.diff = r.det - r.frame_value;
  return r;
}

std::pair<cas::Rational, cas::Rational> scaling_exponents(int n) {
  if (n < 1) throw std::invalid_argument("mkdv: n >= 1 required");
  const cas::Rational den = cas::Rational(n + 1) * (2 * n + 1);
  return {cas::Rational(n) / den, cas::Rational(2 * n * n) / den};
}

}  // namespace airyhier::mkdv
