#include "airyhier/weight.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "airyhier/quadrature.hpp"

namespace airyhier::weights {

double Weight::support_lo(double eps) const {
  return -(decay_onset + (-std::log(eps)) / decay_rate);
}

double Weight::support_hi(double eps) const {
  return decay_onset + (-std::log(eps)) / decay_rate;
}

Weight make_fermi(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("make_fermi: alpha > 0 required");
  Weight w;
  w.value = [alpha](double x) {
    // stable logistic evaluation on both sides
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-alpha * x));
    const double e = std::exp(alpha * x);
    return e / (1.0 + e);
  };
  w.derivative = [alpha](double x) {
    const double e = std::exp(-alpha * std::abs(x));
    const double d = 1.0 + e;
    return alpha * e / (d * d);
  };
  // alpha e^{-alpha|x|} <= e^{-omega|x|} for |x| >= 1 with the margin below
  w.decay_rate = (alpha <= 1.0) ? alpha : alpha - std::log(alpha);
  w.decay_onset = 1.0;
  w.label = "fermi:alpha=" + std::to_string(alpha);
  return w;
}

Weight make_smoothed_step(double steepness) {
  Weight w = make_fermi(steepness);
  w.label = "step-approx:k=" + std::to_string(steepness);
  return w;
}

Weight scale_weight(const Weight& w, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("scale_weight: tau > 0 required");
  Weight s;
  auto v = w.value;
  auto d = w.derivative;
  s.value = [v, tau](double x) { return v(tau * x); };
  s.derivative = [d, tau](double x) { return tau * d(tau * x); };
  s.decay_rate = tau * w.decay_rate;
  // absorb the Jacobian factor tau into a later onset so that
  // tau w'(tau x) <= exp(-tau omega |x|) still holds beyond it
  s.decay_onset = w.decay_onset / tau +
                  std::max(0.0, std::log(tau)) / (tau * w.decay_rate);
  s.label = w.label + "@tau=" + std::to_string(tau);
  return s;
}

Weight parse_weight(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  double param = 1.0;
  if (colon != std::string::npos) {
    const std::string rest = spec.substr(colon + 1);
    const auto eq = rest.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("weight spec: expected key=value after ':'");
    const std::string key = rest.substr(0, eq);
    param = std::stod(rest.substr(eq + 1));
    if (kind == "fermi" && key != "alpha")
      throw std::invalid_argument("weight spec: fermi takes alpha=<v>");
    if (kind == "step-approx" && key != "k")
      throw std::invalid_argument("weight spec: step-approx takes k=<v>");
  }
  if (kind == "fermi") return make_fermi(param);
  if (kind == "step-approx") return make_smoothed_step(param);
  throw std::invalid_argument("unknown weight kind '" + kind + "'");
}

void validate_weight(const Weight& w) {
  if (!(w.decay_rate > 0.0) || !(w.decay_onset > 0.0))
    throw std::runtime_error("weight: positive decay data required");
  const double X = w.decay_onset + 20.0 / w.decay_rate;
  if (!(w.value(-X) < 1e-6) || !(1.0 - w.value(X) < 1e-6))
    throw std::runtime_error("weight: limits 0/1 not attained at +-"
                             + std::to_string(X));
  double prev = -1.0;
  for (int k = 0; k <= 200; ++k) {
    const double x = -X + 2.0 * X * k / 200.0;
    const double v = w.value(x);
    // strict increase is only representable away from the 0/1 saturation
    if (v > 1e-14 && v < 1.0 - 1e-14) {
      if (!(v > prev)) throw std::runtime_error("weight: not strictly increasing");
    } else if (v < prev) {
      throw std::runtime_error("weight: not nondecreasing");
    }
    prev = v;
    const double d = w.derivative(x);
    if (!(d > 0.0)) throw std::runtime_error("weight: derivative not positive");
    if (std::abs(x) >= w.decay_onset && d > std::exp(-w.decay_rate * std::abs(x)))
      throw std::runtime_error("weight: decay bound violated");
  }
  // unit mass of w' dx; panel width must resolve the w' transition scale,
  // which is of order 1/w'(peak)
  const double len = 2 * X + 40;
  const double density = std::max(2.0, 4.0 * w.derivative(0.0));
  const auto rule = quad::composite(quad::gauss_legendre(16), -X - 20.0, X + 20.0,
                                    static_cast<int>(std::ceil(len * density)));
  const double mass = rule.integrate(w.derivative);
  if (std::abs(mass - 1.0) > 1e-10)
    throw std::runtime_error("weight: total mass deviates from 1 by " +
                             std::to_string(mass - 1.0));
}

double SigmaQuadrature::bracket(const std::vector<double>& f,
                                const std::vector<double>& g) const {
  if (f.size() != nodes.size() || g.size() != nodes.size())
    throw std::invalid_argument("bracket: grid size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * f[k] * g[k];
  return s;
}

SigmaQuadrature sigma_quadrature(const Weight& w, int m) {
  if (m < 4) throw std::invalid_argument("sigma_quadrature: m >= 4 required");
  const double a = w.support_lo(1e-16), b = w.support_hi(1e-16);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);

  // Fine reference rule in the mapped variable t in [-1,1]; panel width
  // resolves the w' transition scale.
  const double scale_t = std::min(0.25, 1.0 / (w.decay_rate * half));
  const int panels = std::max(64, static_cast<int>(std::ceil(2.0 / scale_t)));
  const auto ref = quad::composite(quad::gauss_legendre(24), -1.0, 1.0, panels);
  const std::size_t N = ref.size();
  std::vector<double> mu(N);  // reference weights times the density
  for (std::size_t k = 0; k < N; ++k)
    mu[k] = ref.w[k] * w.derivative(mid + half * ref.x[k]) * half;

  // Discretized Stieltjes for monic orthogonal polynomials in t.
  std::vector<double> alpha(m), beta(m);
  std::vector<double> p_prev(N, 0.0), p_cur(N, 1.0);
  double norm_prev = 0.0;
  for (int k = 0; k < m; ++k) {
    double norm = 0.0, xnorm = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double q = mu[i] * p_cur[i] * p_cur[i];
      norm += q;
      xnorm += q * ref.x[i];
    }
    if (!(norm > 0.0))
      throw std::runtime_error("sigma_quadrature: Stieltjes breakdown (m too large)");
    alpha[k] = xnorm / norm;
    beta[k] = (k == 0) ? norm : norm / norm_prev;
    norm_prev = norm;
    std::vector<double> p_next(N);
    for (std::size_t i = 0; i < N; ++i)
      p_next[i] = (ref.x[i] - alpha[k]) * p_cur[i] - (k == 0 ? 0.0 : beta[k]) * p_prev[i];
    p_prev = std::move(p_cur);
    p_cur = std::move(p_next);
  }

  // Golub-Welsch: eigen-decompose the Jacobi matrix.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    J(k, k) = alpha[k];
    if (k + 1 < m) J(k, k + 1) = J(k + 1, k) = std::sqrt(beta[k + 1]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sigma_quadrature: Jacobi eigensolve failed");

  SigmaQuadrature q;
  q.order = m;
  q.nodes.resize(m);
  q.weights.resize(m);
  double mass = 0.0;
  for (int k = 0; k < m; ++k) {
    q.nodes[k] = mid + half * es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    q.weights[k] = beta[0] * v0 * v0;
    mass += q.weights[k];
  }
  if (std::abs(mass - 1.0) > 1e-8)
    throw std::runtime_error("sigma_quadrature: truncated mass deviates from 1 by " +
                             std::to_string(mass - 1.0));
  for (auto& wt : q.weights) wt /= mass;  // exact unit mass by normalization
  for (int k = 1; k < m; ++k)
    if (!(q.nodes[k] > q.nodes[k - 1]))
      throw std::runtime_error("sigma_quadrature: nodes not strictly increasing");
  return q;
}

}  // namespace airyhier::weights
