#pragma once

#include <functional>
#include <string>
#include <vector>

namespace airyhier::weights {

/// An admissible weight: strictly increasing smooth w with exponentially
/// decaying derivative. dsigma = w' dx is a probability measure.
struct Weight {
  std::function<double(double)> value;       // w
  std::function<double(double)> derivative;  // w'
  double decay_rate = 0.0;                   // omega: w'(x) <= exp(-omega|x|) ...
  double decay_onset = 1.0;                  // ... for |x| >= x0
  std::string label;

  /// Truncation points beyond which w' < eps (from the decay data).
  double support_lo(double eps = 1e-17) const;
  double support_hi(double eps = 1e-17) const;
};

Weight make_fermi(double alpha);
Weight make_smoothed_step(double steepness);

/// The rescaled weight x -> w(tau * x); dsigma_scaled = tau w'(tau x) dx
/// stays a probability measure. (For Fermi, scaling by tau maps alpha to
/// alpha * tau exactly.)
Weight scale_weight(const Weight& w, double tau);

/// Parse a CLI weight spec: "fermi:alpha=1.0" or "step-approx:k=200".
Weight parse_weight(const std::string& spec);

/// Sampled runtime validation of the Weight invariants (monotonicity, limits,
/// decay bound, unit mass). Throws std::runtime_error on violation.
void validate_weight(const Weight& w);

/// Gauss rule for the probability measure dsigma = w' dx (truncated where
/// w' < 1e-16), built by discretized Stieltjes + Golub-Welsch. Weights are
/// normalized to total mass exactly 1.
struct SigmaQuadrature {
  std::vector<double> nodes;    // strictly increasing
  std::vector<double> weights;  // positive, sum to 1
  int order = 0;                // number of nodes m

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * f(nodes[k]);
    return s;
  }

  /// Discretized bilinear form <f,g> for grid-sampled values.
  double bracket(const std::vector<double>& f, const std::vector<double>& g) const;
};

SigmaQuadrature sigma_quadrature(const Weight& w, int m);

}  // namespace airyhier::weights
