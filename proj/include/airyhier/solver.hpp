#pragma once

#include <Eigen/Dense>

#include "airyhier/weight.hpp"

namespace airyhier::idpii {

/// State of the field u(t|x) on a sigma-quadrature x-grid: values(i, j) =
/// u^{(j)}(t | x_i) for j = 0..2n-1, plus the accumulated moments of
/// Q(s) = <u,u>(s) over [t, T0] needed by the Tracy-Widom representation.
struct FieldState {
  int n = 1;
  double t = 0.0;
  double lambda = 0.0;
  double lambda_sqrt = 0.0;  // chosen branch
  double T0 = 8.0;
  weights::SigmaQuadrature grid;
  Eigen::MatrixXd values;  // m x 2n
  std::vector<double> probe_x;     // zero-weight points carried alongside
  Eigen::MatrixXd probe_values;    // p x 2n
  double l1 = 0.0;         // int_t^{T0} Q(s) ds
  double l2 = 0.0;         // int_t^{T0} s Q(s) ds

  /// <u^{(a)}, u^{(b)}> on the grid (probes carry no weight).
  double bracket(int a, int b) const;
  /// u^{(j)}(t|x): exact probe value if x is a probe point, otherwise local
  /// Lagrange interpolation on the grid.
  double interpolate(double x, int j = 0) const;
};

struct SolverOptions {
  double T0 = 8.0;
  double tol = 1e-10;
  double blowup = 1e6;   // |u| guard for backward integration
  int grid_m = 160;      // sigma-quadrature nodes
  int branch = +1;       // sign of the lambda^{1/2} branch
};

/// Seed at T0 from the boundary condition u^{(j)} = lambda^{1/2} Ai_n^{(j)}.
/// Probe points are integrated alongside the grid with zero sigma-weight,
/// giving integrator-accurate off-grid values without interpolation.
FieldState seed(int n, double lambda, double T0,
                const weights::SigmaQuadrature& grid, int branch = +1,
                const std::vector<double>& probes = {0.0});

/// u^{(j)}(t|x) for j up to 2n+1: stored derivatives for j < 2n, the
/// hierarchy member's explicit top expressions for j = 2n and 2n+1.
double field_derivative(const FieldState& s, double x, int j);

/// Adaptive Dormand-Prince 5(4) integration of the localized hierarchy ODE
/// to t_target < state.t; throws on blow-up with the divergence time.
FieldState step_to(const FieldState& state, double t_target, double tol,
                   double blowup = 1e6);

struct TwResult {
  double det = 1.0;
  double logdet = 0.0;
  double tail_logdet = 0.0;  // contribution of the s > max(T0, t) tail
  double Q = 0.0;            // <u,u>(t)
  double u_ref = 0.0;        // u(t | x_ref)
  double x_ref = 0.0;        // grid node nearest 0
};

/// Eq. of Theorem 1.1: D = exp[- int_t^inf (s-t) <u,u>(s) ds], with the
/// finite part accumulated along the integration and the tail from the
/// squared asymptotic seed.
TwResult tw_representation(int n, double lambda, const weights::Weight& w,
                           double t, const SolverOptions& opt = {});

/// Max over the grid of |u - lambda^{1/2} Ai_n(t+x)| relative deviation.
double asymptotic_check(const FieldState& state);

}  // namespace airyhier::idpii
