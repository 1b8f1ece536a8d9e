#pragma once

#include <vector>

#include <Eigen/Dense>

#include "airyhier/weight.hpp"

namespace airyhier::fredholm {

/// Nystrom discretization of lambda * K_{t,n} on one side of the
/// factorization, symmetrized so `matrix` is symmetric positive
/// semidefinite by construction.
struct KernelDiscretization {
  int n = 1;
  double t = 0.0;
  double lambda = 1.0;
  std::vector<double> x_nodes, x_weights;  // outer (matrix) side rule
  std::vector<double> z_nodes, z_weights;  // contraction side rule
  Eigen::MatrixXd matrix;       // lambda * sqrt(w_i) K(x_i,x_j) sqrt(w_j)
  Eigen::VectorXd eigenvalues;  // of `matrix`, ascending

  double logdet() const;  // log det(I - matrix)
  double det() const;
};

/// Pointwise kernel K_{t,n}(x,y) = int Ai_n(x+z+t) Ai_n(z+y+t) w(z) dz.
double kernel_value(int n, double t, const weights::Weight& w, double x,
                    double y);

/// Route 1: matrix lives on the half-line x-side; the z-integral against w
/// is the contraction. m_x / m_z are node counts (0 = default density).
KernelDiscretization assemble_halfline(int n, double t, double lambda,
                                       const weights::Weight& w, int m_x = 0,
                                       int m_z = 0);

/// Route 2: matrix lives on the z-side (kernel sqrt(w(z)) J(z,z') sqrt(w(z'))
/// with J the y-integral over R+). m_z / m_y node counts (0 = default).
KernelDiscretization assemble_sigma(int n, double t, double lambda,
                                    const weights::Weight& w, int m_z = 0,
                                    int m_y = 0);

double det_halfline(int n, double t, double lambda, const weights::Weight& w,
                    int m_x = 0, int m_z = 0);
double det_sigma(int n, double t, double lambda, const weights::Weight& w,
                 int m_z = 0, int m_y = 0);

/// Exact step weight w = indicator of R+ (not an admissible Weight): both
/// sides of the factorization become half-lines. For n=1 this is the
/// classical GUE Tracy-Widom determinant.
double det_step(int n, double t, double lambda, int m = 0);

/// tr K_{t,n} = int_0^inf K(x,x) dx.
double trace_kernel(int n, double t, const weights::Weight& w);

/// Argument beyond which Ai_n is treated as 0 in kernel assembly (decay
/// envelope below eps).
double ai_cutoff(int n, double eps = 1e-20);

}  // namespace airyhier::fredholm
