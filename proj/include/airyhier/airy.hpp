#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace airyhier::specfun {

/// Raised when successive contour-quadrature refinements fail to agree.
struct QuadratureError : std::runtime_error {
  double residual;
  QuadratureError(const std::string& what, double res)
      : std::runtime_error(what), residual(res) {}
};

struct ContourSpec {
  /// Asymptote angle of the right tail, in (0, pi/(2n+1)); the left tail is
  /// the mirror pi - b. 0 selects the sector bisector pi/(2(2n+1)).
  double b = 0.0;
  /// Height of the contour vertex iY; 0 selects an x-adaptive default.
  double vertex = 0.0;
  /// Exponent cap for the oscillatory (negative-x) regime; the tail angle is
  /// shrunk so the on-path integrand magnitude stays below exp(cap).
  double exponent_cap = 6.0;
};

struct QuadConfig {
  int points_per_panel = 16;
  int initial_panels = 8;
  int max_doublings = 14;
  double tol = 1e-13;
  /// Contour truncation: drop the tails where |exp(i psi)| falls below this
  /// fraction of the on-path maximum.
  double truncation = 1e-18;
};

/// Immutable evaluator of Ai_n and derivatives via the contour integral
/// representation, with asymptotic replacement beyond switch_x on the
/// positive axis. Safe for concurrent read-only use.
class HigherAiryEvaluator {
 public:
  explicit HigherAiryEvaluator(int n, ContourSpec contour = {}, QuadConfig quad = {},
                               double switch_x = 12.0);

  int n() const { return n_; }
  double switch_x() const { return switch_x_; }

  double ai(double x) const { return deriv(x, 0); }
  double deriv(double x, int j) const;

  /// All derivative orders 0..jmax in one contour pass.
  std::vector<double> derivs(double x, int jmax) const;

  /// Relative magnitude of the imaginary part of the contour integral at x
  /// (a roundoff diagnostic; exact symmetry would make it 0).
  double imag_residual(double x) const;

  /// Integrand magnitude at the truncation endpoints relative to the on-path
  /// maximum (contour-decay invariant; must be < truncation threshold-ish).
  double endpoint_decay(double x) const;

 private:
  int n_;
  ContourSpec contour_;
  QuadConfig quad_;
  double switch_x_;
};

enum class Side { positive, negative };

/// Leading-order asymptotics of Ai_n(+x) / Ai_n(-x) for x > 0.
double ai_asymptotic(int n, double x, Side side);

/// Convenience entry points using a shared default evaluator per n.
double ai(int n, double x);
double ai_deriv(int n, double x, int j);

/// Uniform-grid quintic-Hermite interpolant of Ai_n^(j), j = 0..2n, built in
/// one quadrature pass per node. Immutable after construction.
class AiryCache {
 public:
  AiryCache(int n, double lo, double hi);

  int n() const { return n_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool covers(double lo, double hi) const { return lo_ <= lo && hi <= hi_; }

  /// Interpolated Ai_n^(j)(x) inside [lo,hi]; falls back to direct
  /// quadrature/asymptotics outside.
  double deriv(double x, int j) const;
  double ai(double x) const { return deriv(x, 0); }

 private:
  int n_;
  double lo_, hi_, h_;
  std::size_t npts_;
  std::vector<std::vector<double>> vals_;  // vals_[j][k], j = 0..2n+2
  HigherAiryEvaluator eval_;
};

/// Shared cache pool keyed by n; grows ranges on demand. Thread-safe.
std::shared_ptr<const AiryCache> cache_for(int n, double lo, double hi);

}  // namespace airyhier::specfun
