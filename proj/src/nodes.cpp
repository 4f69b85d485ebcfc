#include "netbound/nodes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "netbound/errors.hpp"

namespace netbound {

KInfFunction quadratic_kinf(double c) {
  if (!(c > 0.0)) throw PreconditionError("quadratic_kinf: coefficient must be positive");
  std::ostringstream d;
  d << c << "*s^2";
  return {[c](double s) { return c * s * s; }, d.str()};
}

KInfFunction pointwise_min(const std::vector<KInfFunction>& phis) {
  if (phis.empty()) throw PreconditionError("pointwise_min: no functions given");
  std::string desc = "min(";
  for (std::size_t i = 0; i < phis.size(); ++i) desc += (i ? ", " : "") + phis[i].description;
  desc += ")";
  return {[phis](double s) {
            double m = phis.front()(s);
            for (std::size_t i = 1; i < phis.size(); ++i) m = std::min(m, phis[i](s));
            return m;
          },
          desc};
}

KInfFunction scaled(const KInfFunction& phi, double c) {
  if (!(c > 0.0)) throw PreconditionError("scaled: factor must be positive");
  std::ostringstream d;
  d << c << "*" << phi.description;
  return {[phi, c](double s) { return c * phi(s); }, d.str()};
}

double invert_kinf(const KInfFunction& phi, double target, const Tolerances& tol) {
  if (!(target >= 0.0) || !std::isfinite(target))
    throw PreconditionError("invert_kinf: target must be finite and nonnegative");
  if (target == 0.0) return 0.0;
  const double accept = tol.kinf_rel * std::max(1.0, target);

  // Invariant: phi(lo) < target <= phi(hi); the returned point never
  // undershoots the target.
  double lo = 0.0, hi = 1.0;
  while (phi(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > tol.kinf_bracket_cap)
      throw AssumptionError("invert_kinf: " + phi.description + " stays below " +
                            std::to_string(target) + " up to s = 1e12 (not unbounded?)");
  }
  while (phi(hi) - target > accept && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi) {
    const double mid = 0.5 * (lo + hi);
    const double v = phi(mid);
    if (!std::isfinite(v)) throw NonFiniteError("invert_kinf: non-finite value", mid);
    if (v < target)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

SemiPassivityVerdict verify_semipassive(const SemiPassiveNode& node, double x_max,
                                        std::size_t grid, const Tolerances& tol) {
  if (!(x_max > node.rho))
    throw PreconditionError("verify_semipassive: x_max must exceed rho");
  if (grid < 100) throw PreconditionError("verify_semipassive: grid must have >= 100 cells");

  auto finite = [&](double v, const char* what, double x) {
    if (!std::isfinite(v))
      throw NonFiniteError("verify_semipassive(" + node.name + "): " + what +
                               " is not finite at x = " + std::to_string(x),
                           x);
    return v;
  };
  auto fail = [](double x, std::string reason) {
    return SemiPassivityVerdict{false, x, std::move(reason)};
  };

  for (std::size_t k = 0; k <= grid; ++k) {
    const double x = -x_max + 2.0 * x_max * static_cast<double>(k) / static_cast<double>(grid);
    const double s = std::abs(x);
    const double v = finite(node.V(x), "V", x);
    const double a = finite(node.alpha(s), "alpha", x);
    const double fx = finite(node.f(x), "f", x);
    const double h = finite(node.H(x), "H", x);

    if (v < a - 1e-12 * std::max(1.0, std::abs(v)))
      return fail(x, "storage below its K-infinity lower bound: V = " + std::to_string(v) +
                         " < alpha = " + std::to_string(a));

    const double step = tol.fd_step_rel * std::max(1.0, s);
    const double slope = (finite(node.V(x + step), "V", x) - finite(node.V(x - step), "V", x)) /
                         (2.0 * step);
    if (std::abs(slope - 2.0 * x) > tol.storage_slope_rel * std::max(1.0, std::abs(2.0 * x)))
      return fail(x, "storage slope V'(x) = " + std::to_string(slope) + " differs from 2x");

    const double supply = 2.0 * x * fx + h;
    if (supply > tol.dissipation * std::max({1.0, std::abs(h), std::abs(2.0 * x * fx)}))
      return fail(x, "dissipation inequality violated: 2x f(x) + H(x) = " + std::to_string(supply));

    if (s >= node.rho) {
      const double p = finite(node.psi(s), "psi", x);
      if (h < p - 1e-12 * std::max(1.0, std::abs(p)))
        return fail(x, "H(x) = " + std::to_string(h) + " < psi(|x|) = " + std::to_string(p) +
                           " beyond rho");
    }
  }
  return {};
}

std::optional<BuiltinModel> parse_builtin_model(const std::string& tag) {
  if (tag == "linear_stable") return BuiltinModel::linear_stable;
  if (tag == "bistable") return BuiltinModel::bistable;
  if (tag == "saturated_drift") return BuiltinModel::saturated_drift;
  if (tag == "mis_signed_linear") return BuiltinModel::mis_signed_linear;
  return std::nullopt;
}

std::string to_string(BuiltinModel m) {
  switch (m) {
    case BuiltinModel::linear_stable:
      return "linear_stable";
    case BuiltinModel::bistable:
      return "bistable";
    case BuiltinModel::saturated_drift:
      return "saturated_drift";
    case BuiltinModel::mis_signed_linear:
      return "mis_signed_linear";
  }
  return "unknown";
}

SemiPassiveNode builtin_node(BuiltinModel model, const std::map<std::string, double>& params,
                             std::optional<double> rho_override) {
  auto allow_only = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, _] : params)
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        throw PreconditionError("builtin_node(" + to_string(model) + "): unknown parameter '" +
                                k + "'");
  };
  SemiPassiveNode n;
  n.V = [](double x) { return x * x; };
  n.alpha = quadratic_kinf(1.0);
  switch (model) {
    case BuiltinModel::linear_stable: {
      allow_only({"k"});
      const auto it = params.find("k");
      const double k = it == params.end() ? 1.0 : it->second;
      if (!(k > 0.0) || !std::isfinite(k))
        throw PreconditionError("builtin_node(linear_stable): k must be positive");
      std::ostringstream name;
      name << "linear_stable(" << k << ")";
      n.name = name.str();
      n.f = [k](double x) { return -k * x; };
      n.H = [k](double x) { return 2.0 * k * x * x; };
      n.psi = [k](double s) { return k * s * s; };
      n.rho = 1.0;
      break;
    }
    case BuiltinModel::bistable:
      allow_only({});
      n.name = "bistable";
      n.f = [](double x) { return x - x * x * x; };
      n.H = [](double x) { return 2.0 * x * x * x * x - 2.0 * x * x; };
      n.psi = [](double s) { return s * s * s * s; };
      n.rho = 2.0;
      break;
    case BuiltinModel::saturated_drift:
      allow_only({});
      n.name = "saturated_drift";
      n.f = [](double x) { return std::tanh(x) - x; };
      n.H = [](double x) { return 2.0 * x * x - 2.0 * x * std::tanh(x); };
      n.psi = [](double s) { return s * s; };
      n.rho = 2.0;
      break;
    case BuiltinModel::mis_signed_linear: {
      allow_only({"k"});
      const auto it = params.find("k");
      const double k = it == params.end() ? 1.0 : it->second;
      if (!(k > 0.0) || !std::isfinite(k))
        throw PreconditionError("builtin_node(mis_signed_linear): k must be positive");
      std::ostringstream name;
      name << "mis_signed_linear(" << k << ")";
      n.name = name.str();
      n.f = [k](double x) { return k * x; };
      n.H = [k](double x) { return 2.0 * k * x * x; };
      n.psi = [k](double s) { return k * s * s; };
      n.rho = 1.0;
      break;
    }
  }
  if (rho_override) {
    if (!(*rho_override > 0.0) || !std::isfinite(*rho_override))
      throw PreconditionError("builtin_node: rho must be positive");
    n.rho = *rho_override;
  }
  return n;
}

SemiPassiveNode builtin_node(const std::string& tag, const std::map<std::string, double>& params,
                             std::optional<double> rho_override) {
  const auto model = parse_builtin_model(tag);
  if (!model) throw PreconditionError("unknown node model '" + tag + "'");
  return builtin_node(*model, params, rho_override);
}

}  // namespace netbound
