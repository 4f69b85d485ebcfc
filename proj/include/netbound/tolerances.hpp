#pragma once

#include <cstddef>

namespace netbound {

/// Every numerical threshold used by the analysis, in one place.
struct Tolerances {
  // matrix classes
  double zero_entry = 1e-12;        // |m_ij| below this counts as zero
  double m_matrix_rel = 1e-9;       // min Re(lambda) > m_matrix_rel * ||M||_inf
  std::size_t power_max_iter = 200000;

  // symmetric eigenproblems (cyclic Jacobi)
  double symmetry = 1e-10;
  double jacobi_offdiag_rel = 1e-12;
  std::size_t jacobi_max_sweeps = 100;

  // Laplacian spectra
  double null_residual_rel = 1e-10;  // ||v^T L|| <= null_residual_rel * ||L||
  double kernel_eig = 1e-9;          // lambda_1(Q_o) within +-kernel_eig of 0
  double positive_eig = 1e-9;        // lambda_2(Q_o), lambda_1(S) must exceed

  // node verification
  double dissipation = 1e-9;    // 2x f(x) + H(x) <= dissipation * max(1,|H(x)|)
  double storage_slope_rel = 1e-4;
  double fd_step_rel = 1e-6;

  // class-K-infinity inversion
  double kinf_rel = 1e-10;
  double kinf_bracket_cap = 1e12;

  // compact-set maximisation
  std::size_t grid_points = 10000;
  double closed_form_rel = 1e-6;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t{};
  return t;
}

}  // namespace netbound
