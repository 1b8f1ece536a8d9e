#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "airyhier/cas.hpp"
#include "airyhier/solver.hpp"
#include "airyhier/weight.hpp"

namespace airyhier::mkdv {

/// The mKdV-frame view of a hierarchy solution: v(t1, t_{2n+1} | x) with
/// t1 = tau * t and t_{2n+1} = tau^{2n+1} / (2n+1). Columns of `v` are the
/// t1-derivatives d^j v / d t1^j, j = 0..2n+1 (the two top orders come from
/// the hierarchy member's explicit expressions), sampled on the frame's
/// sigma rule (x, w).
struct MkdvFrame {
  int n = 1;
  double tau = 1.0;
  double t1 = 0.0;
  double t2np1 = 0.0;  // tau^{2n+1}/(2n+1), exact by construction
  std::vector<double> x;
  std::vector<double> w;
  Eigen::MatrixXd v;  // |x| rows, 2n+2 columns

  /// <d^a v, d^b v> on the frame rule.
  double bracket(int a, int b) const;
};

/// v = (1/tau) u(t | x/tau) with d^j/dt1^j contributing one 1/tau per order.
/// The u-state must solve the hierarchy for the *scaled* weight w(tau .);
/// the frame rule (x, w) is the sigma rule of the base weight. The overload
/// without an explicit rule uses the state's own grid (the tau = 1 frame).
/// Off-grid u-values are taken from solver probes when present, Lagrange
/// interpolation otherwise.
MkdvFrame scaling_reduce(const idpii::FieldState& s, double tau);
MkdvFrame scaling_reduce(const idpii::FieldState& s, double tau,
                         const std::vector<double>& x,
                         const std::vector<double>& w);

/// Solver-backed frame at (tau, t1): solves the boundary value problem for
/// the scaled weight w(tau .) carrying probes at x_i/tau, so the reduction
/// needs no interpolation. Requires t1/tau < opt.T0.
MkdvFrame make_frame(int n, double lambda, const weights::Weight& w,
                     double tau, double t1,
                     const idpii::SolverOptions& opt = {});

/// Pointwise mKdV defect at x: centered difference of v in t_{2n+1} (two
/// solver runs at tau +- delta_tau) minus the symbolic right side
/// (L- L+)^n dv/dt1 evaluated on the tau-frame.
double mkdv_residual_at(int n, double tau, double delta_tau, double t1,
                        double x, double lambda, const weights::Weight& w,
                        const idpii::SolverOptions& opt = {});

/// Max of the pointwise defect over the frame's sigma nodes.
double mkdv_residual(int n, double tau, double delta_tau, double t1,
                     double lambda, const weights::Weight& w,
                     const idpii::SolverOptions& opt = {});

struct FermiDistribution {
  double det = 1.0;          // Fredholm determinant route
  double frame_value = 1.0;  // distribution via the tau = alpha frame
  double diff = 0.0;         // det - frame_value
};

/// F_n^alpha(t) two ways: as det(I - K_{t,n}) with the Fermi weight, and
/// through the tau = alpha mKdV frame second-log-derivative representation.
FermiDistribution fermi_distribution(int n, double alpha, double t,
                                     const idpii::SolverOptions& opt = {});

/// Exact scaling exponents (e_n, f_n) = (n, 2n^2) / ((n+1)(2n+1)).
std::pair<cas::Rational, cas::Rational> scaling_exponents(int n);

}  // namespace airyhier::mkdv
