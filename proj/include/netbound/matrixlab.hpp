#pragma once

#include <limits>

#include "netbound/dense_matrix.hpp"
#include "netbound/tolerances.hpp"

namespace netbound {

/// Weights of the leader Lyapunov function W(x) = sum_i v_i V_i(x_i).
struct LeaderLyapunovData {
  Vector v;           // left null vector of L_leader, v^T 1 = 1, v > 0
  DenseMatrix V;      // diag(v)
  DenseMatrix Q;      // V L + L^T V
  double lambda2_Q;   // +infinity when the leader set is a single node
};

/// Weights of the follower Lyapunov function Z(x) = sum_i p_i V_i(x_i).
struct FollowerLyapunovData {
  DenseMatrix P;      // diag(M^-T 1) * diag(M^-1 1)^-1
  DenseMatrix S;      // P M + M^T P
  double lambda1_S;
};

/// Off-diagonal entries nonpositive. Throws PreconditionError if not square.
bool is_z_matrix(const DenseMatrix& m, const Tolerances& tol = default_tolerances());

/// Z-matrix whose eigenvalues all have real part above
/// tol.m_matrix_rel * ||M||_inf. Writes M = s I - B with s = max_i m_ii and
/// B >= 0, so that min Re(lambda) = s - rho(B); rho(B) is bracketed with
/// Collatz-Wielandt bounds along a power iteration on B + I.
/// Throws ConvergenceError if the bracket does not resolve the verdict.
bool is_nonsingular_m_matrix(const DenseMatrix& m,
                             const Tolerances& tol = default_tolerances());

/// Positive vector v with v^T L = 0 and sum(v) = 1, for the Laplacian of a
/// strongly connected digraph. Throws AssumptionError when the kernel is
/// not one-dimensional or v is not strictly positive.
Vector left_null_eigenvector(const DenseMatrix& laplacian,
                             const Tolerances& tol = default_tolerances());

LeaderLyapunovData leader_lyapunov(const DenseMatrix& laplacian,
                                   const Tolerances& tol = default_tolerances());

FollowerLyapunovData follower_lyapunov(const DenseMatrix& m,
                                       const Tolerances& tol = default_tolerances());

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
Vector symmetric_eigenvalues(const DenseMatrix& m,
                             const Tolerances& tol = default_tolerances());

/// Largest singular value, sqrt(lambda_max(M^T M)). Zero for empty input.
double spectral_norm(const DenseMatrix& m, const Tolerances& tol = default_tolerances());

/// Solves A x = b by LU with partial pivoting. Throws AssumptionError when A
/// is numerically singular.
Vector solve(const DenseMatrix& a, std::span<const double> b);

DenseMatrix inverse(const DenseMatrix& a);

inline constexpr double kInfiniteEigenvalue = std::numeric_limits<double>::infinity();

}  // namespace netbound
