#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netbound/tolerances.hpp"

namespace netbound {

using ScalarFn = std::function<double(double)>;

/// Continuous, strictly increasing, unbounded, zero at zero.
struct KInfFunction {
  ScalarFn eval;
  std::string description;

  double operator()(double s) const { return eval(s); }
};

KInfFunction quadratic_kinf(double c = 1.0);
/// s -> min_i phi_i(s).
KInfFunction pointwise_min(const std::vector<KInfFunction>& phis);
/// s -> c * phi(s), c > 0.
KInfFunction scaled(const KInfFunction& phi, double c);

/// Smallest s >= 0 with phi(s) = target, by doubling bracket and bisection.
/// Throws AssumptionError when the bracket passes tol.kinf_bracket_cap.
double invert_kinf(const KInfFunction& phi, double target,
                   const Tolerances& tol = default_tolerances());

/// Scalar node x' = f(x) + u with storage V satisfying
///   alpha(|x|) <= V(x),   V'(x) (f(x) + u) <= 2 u x - H(x)   for all u,
/// and H(x) >= psi(|x|) for |x| >= rho. Uniformity in u forces V'(x) = 2x,
/// so storages are V(x) = x^2.
struct SemiPassiveNode {
  std::string name;
  ScalarFn f;
  ScalarFn V;
  KInfFunction alpha;
  ScalarFn H;
  ScalarFn psi;
  double rho = 1.0;
};

struct SemiPassivityVerdict {
  bool ok = true;
  std::optional<double> witness;  // first violating x
  std::string reason;

  explicit operator bool() const { return ok; }
};

/// Grid falsifier for the semi-passivity data over [-x_max, x_max]:
/// V >= alpha, V'(x) = 2x (central differences), 2x f(x) + H(x) <= 0 and
/// H >= psi beyond rho. Throws NonFiniteError on NaN/inf evaluations.
SemiPassivityVerdict verify_semipassive(const SemiPassiveNode& node, double x_max,
                                        std::size_t grid,
                                        const Tolerances& tol = default_tolerances());

/// mis_signed_linear is not semi-passive: f = +k x paired with the
/// linear_stable(k) claims. It exists to exercise rejection.
enum class BuiltinModel { linear_stable, bistable, saturated_drift, mis_signed_linear };

std::optional<BuiltinModel> parse_builtin_model(const std::string& tag);
std::string to_string(BuiltinModel m);

/// Catalogue of certified nodes.
///   linear_stable(k): f = -k x, H = 2k x^2, psi(s) = k s^2, rho = 1
///   bistable:         f = x - x^3, H = 2x^4 - 2x^2, psi(s) = s^4, rho = 2
///   saturated_drift:  f = tanh x - x, H = 2x^2 - 2x tanh x, psi(s) = s^2, rho = 2
/// All use V(x) = x^2, alpha(s) = s^2. `params` may carry "k" (linear_stable).
/// A positive rho_override replaces the default rho.
SemiPassiveNode builtin_node(BuiltinModel model, const std::map<std::string, double>& params = {},
                             std::optional<double> rho_override = std::nullopt);
SemiPassiveNode builtin_node(const std::string& tag,
                             const std::map<std::string, double>& params = {},
                             std::optional<double> rho_override = std::nullopt);

}  // namespace netbound
