#include "netbound/matrixlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "netbound/digraph.hpp"
#include "netbound/errors.hpp"

namespace netbound {
namespace {

void require_square(const DenseMatrix& m, const char* who) {
  if (!m.is_square())
    throw PreconditionError(std::string(who) + ": matrix is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected square");
}

double frobenius(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double offdiag_frobenius(const DenseMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

struct LU {
  DenseMatrix a;
  std::vector<std::size_t> piv;
};

LU lu_factor(const DenseMatrix& m) {
  require_square(m, "solve");
  const std::size_t n = m.rows();
  LU f{m, std::vector<std::size_t>(n)};
  std::iota(f.piv.begin(), f.piv.end(), 0);
  const double tiny = 1e-12 * std::max(m.max_abs(), 1e-300);
  DenseMatrix& a = f.a;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (std::abs(a(p, k)) <= tiny)
      throw AssumptionError("solve: matrix is numerically singular (pivot " +
                            std::to_string(a(p, k)) + " at column " + std::to_string(k) + ")");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(f.piv[k], f.piv[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = a(i, k) / a(k, k);
      a(i, k) = l;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
    }
  }
  return f;
}

Vector lu_solve(const LU& f, std::span<const double> b) {
  const std::size_t n = f.a.rows();
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.piv[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.a(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.a(i, j) * x[j];
    x[i] /= f.a(i, i);
  }
  return x;
}

// Collatz-Wielandt bracket of rho(B) for an irreducible nonnegative block,
// iterating on B + I (primitive, same Perron vector).
struct PerronBracket {
  DenseMatrix c;  // B + I
  Vector x;
  double lo = 0.0;  // bounds on rho(B)
  double hi = INFINITY;

  explicit PerronBracket(DenseMatrix block) : c(std::move(block)), x(c.rows(), 1.0) {
    for (std::size_t i = 0; i < c.rows(); ++i) c(i, i) += 1.0;
    step();
  }

  void step() {
    Vector y = c * x;
    double rmin = INFINITY, rmax = 0.0, ymax = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double r = y[i] / x[i];
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      ymax = std::max(ymax, y[i]);
    }
    lo = std::max(lo, rmin - 1.0);
    hi = std::min(hi, rmax - 1.0);
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] / ymax;
  }
};

}  // namespace

bool is_z_matrix(const DenseMatrix& m, const Tolerances& tol) {
  require_square(m, "is_z_matrix");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) > tol.zero_entry) return false;
  return true;
}

bool is_nonsingular_m_matrix(const DenseMatrix& m, const Tolerances& tol) {
  require_square(m, "is_nonsingular_m_matrix");
  const std::size_t n = m.rows();
  if (n == 0) return true;
  if (!is_z_matrix(m, tol)) return false;
  const double scale = m.norm_inf();
  if (scale == 0.0) return false;
  const double threshold = tol.m_matrix_rel * scale;

  double s = m(0, 0);
  for (std::size_t i = 1; i < n; ++i) s = std::max(s, m(i, i));

  // B = s I - M >= 0. Its spectral radius is the largest over the
  // irreducible diagonal blocks, i.e. the strongly connected components of
  // the off-diagonal pattern.
  DenseMatrix pattern(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && -m(i, j) > tol.zero_entry) pattern(i, j) = 1.0;
  const auto blocks = strongly_connected_components(DiGraph(pattern));

  std::vector<PerronBracket> brackets;
  brackets.reserve(blocks.size());
  for (const auto& comp : blocks) {
    DenseMatrix b(comp.size(), comp.size());
    for (std::size_t a = 0; a < comp.size(); ++a)
      for (std::size_t c = 0; c < comp.size(); ++c)
        b(a, c) = a == c ? s - m(comp[a], comp[a]) : std::max(0.0, -m(comp[a], comp[c]));
    brackets.emplace_back(std::move(b));
  }

  for (std::size_t it = 0; it < tol.power_max_iter; ++it) {
    double rho_lo = 0.0, rho_hi = 0.0;
    for (const auto& br : brackets) {
      rho_lo = std::max(rho_lo, br.lo);
      rho_hi = std::max(rho_hi, br.hi);
    }
    // min Re(lambda(M)) = s - rho(B) lies in [s - rho_hi, s - rho_lo].
    if (s - rho_hi > threshold) return true;
    if (s - rho_lo <= threshold) return false;
    for (auto& br : brackets)
      if (br.hi - br.lo > 0.0) br.step();
  }
  throw ConvergenceError("is_nonsingular_m_matrix: Perron bracket did not separate from the "
                         "threshold within the iteration cap");
}

Vector symmetric_eigenvalues(const DenseMatrix& m, const Tolerances& tol) {
  require_square(m, "symmetric_eigenvalues");
  const std::size_t n = m.rows();
  const double scale = std::max(1.0, m.max_abs());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol.symmetry * scale)
        throw PreconditionError("symmetric_eigenvalues: matrix is not symmetric at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
  DenseMatrix a = m;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));

  const double target = tol.jacobi_offdiag_rel * frobenius(a);
  std::size_t sweep = 0;
  while (offdiag_frobenius(a) > target) {
    if (sweep++ == tol.jacobi_max_sweeps)
      throw ConvergenceError("symmetric_eigenvalues: Jacobi sweep cap exceeded");
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
      }
  }
  Vector ev = a.diagonal_entries();
  std::sort(ev.begin(), ev.end());
  return ev;
}

double spectral_norm(const DenseMatrix& m, const Tolerances& tol) {
  if (m.empty()) return 0.0;
  const DenseMatrix mt = m.transpose();
  const DenseMatrix g = m.rows() < m.cols() ? m * mt : mt * m;
  const Vector ev = symmetric_eigenvalues(g, tol);
  return std::sqrt(std::max(0.0, ev.back()));
}

Vector solve(const DenseMatrix& a, std::span<const double> b) {
  if (b.size() != a.rows()) throw PreconditionError("solve: right-hand side size mismatch");
  return lu_solve(lu_factor(a), b);
}

DenseMatrix inverse(const DenseMatrix& a) {
  const LU f = lu_factor(a);
  const std::size_t n = a.rows();
  DenseMatrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    const Vector col = lu_solve(f, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

Vector left_null_eigenvector(const DenseMatrix& laplacian, const Tolerances& tol) {
  require_square(laplacian, "left_null_eigenvector");
  const std::size_t n = laplacian.rows();
  if (n == 0) throw PreconditionError("left_null_eigenvector: empty matrix");
  const double scale = std::max(laplacian.norm_inf(), 1e-300);
  if (n == 1) {
    if (std::abs(laplacian(0, 0)) > tol.zero_entry)
      throw AssumptionError("left_null_eigenvector: 1x1 Laplacian must be zero");
    return {1.0};
  }
  // L^T v = 0 with the last equation replaced by sum(v) = 1. The bordered
  // system is nonsingular exactly when the kernel is one-dimensional.
  DenseMatrix sys = laplacian.transpose();
  for (std::size_t j = 0; j < n; ++j) sys(n - 1, j) = 1.0;
  Vector rhs(n, 0.0);
  rhs[n - 1] = 1.0;
  Vector v;
  try {
    v = solve(sys, rhs);
  } catch (const AssumptionError&) {
    throw AssumptionError(
        "left_null_eigenvector: kernel of L^T is not one-dimensional (graph not strongly "
        "connected)");
  }
  const Vector residual = laplacian.transpose() * v;
  if (euclidean_norm(residual) > tol.null_residual_rel * scale)
    throw AssumptionError("left_null_eigenvector: residual ||v^T L|| = " +
                          std::to_string(euclidean_norm(residual)) + " too large");
  for (std::size_t i = 0; i < n; ++i)
    if (!(v[i] > 0.0))
      throw AssumptionError("left_null_eigenvector: entry " + std::to_string(i) +
                            " is not positive (graph not strongly connected)");
  return v;
}

LeaderLyapunovData leader_lyapunov(const DenseMatrix& laplacian, const Tolerances& tol) {
  LeaderLyapunovData d;
  d.v = left_null_eigenvector(laplacian, tol);
  d.V = DenseMatrix::diagonal(d.v);
  d.Q = d.V * laplacian + laplacian.transpose() * d.V;
  if (d.v.size() == 1) {
    d.lambda2_Q = kInfiniteEigenvalue;
    return d;
  }
  const Vector ev = symmetric_eigenvalues(d.Q, tol);
  const double scale = std::max(1.0, d.Q.norm_inf());
  if (std::abs(ev[0]) > tol.kernel_eig * scale)
    throw AssumptionError("leader_lyapunov: smallest eigenvalue of Q_o is " +
                          std::to_string(ev[0]) + ", expected 0");
  if (!(ev[1] > tol.positive_eig))
    throw AssumptionError("leader_lyapunov: lambda_2(Q_o) = " + std::to_string(ev[1]) +
                          " is not positive (graph not strongly connected)");
  d.lambda2_Q = ev[1];
  return d;
}

FollowerLyapunovData follower_lyapunov(const DenseMatrix& m, const Tolerances& tol) {
  require_square(m, "follower_lyapunov");
  const std::size_t n = m.rows();
  if (n == 0) throw PreconditionError("follower_lyapunov: empty matrix");
  const Vector ones(n, 1.0);
  const Vector right = solve(m, ones);              // M^-1 1
  const Vector left = solve(m.transpose(), ones);   // M^-T 1
  Vector p(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(right[i] > 0.0) || !(left[i] > 0.0))
      throw AssumptionError("follower_lyapunov: M^-1 1 or M^-T 1 has a nonpositive entry at " +
                            std::to_string(i) + " (not a nonsingular M-matrix)");
    p[i] = left[i] / right[i];
  }
  FollowerLyapunovData d;
  d.P = DenseMatrix::diagonal(p);
  d.S = d.P * m + m.transpose() * d.P;
  d.lambda1_S = symmetric_eigenvalues(d.S, tol).front();
  if (!(d.lambda1_S > tol.positive_eig))
    throw AssumptionError("follower_lyapunov: lambda_1(S) = " + std::to_string(d.lambda1_S) +
                          " is not positive");
  return d;
}

}  // namespace netbound
