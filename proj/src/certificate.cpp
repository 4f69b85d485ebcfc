#include "netbound/certificate.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "netbound/parallel.hpp"

namespace netbound {
namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0)
    throw AssumptionError(std::string("certificate: ") + name + " = " + std::to_string(v) +
                          " is not a finite nonnegative number");
}

// Grid over [a, b] with both endpoints, then one refinement pass on the two
// cells around the best point. Returns the extreme value of g.
template <class Better>
double grid_extremum(const ScalarFn& g, double a, double b, std::size_t cells, Better better) {
  auto scan = [&](double lo, double hi, double& best_x) {
    double best = g(lo);
    best_x = lo;
    for (std::size_t k = 1; k <= cells; ++k) {
      const double x = k == cells ? hi : lo + (hi - lo) * static_cast<double>(k) / cells;
      const double v = g(x);
      if (!std::isfinite(v)) throw NonFiniteError("grid search: non-finite value", x);
      if (better(v, best)) {
        best = v;
        best_x = x;
      }
    }
    return best;
  };
  double x0 = a;
  const double coarse = scan(a, b, x0);
  if (b <= a) return coarse;
  const double h = (b - a) / static_cast<double>(cells);
  double x1 = x0;
  const double fine = scan(std::max(a, x0 - h), std::min(b, x0 + h), x1);
  return better(fine, coarse) ? fine : coarse;
}

double grid_max(const ScalarFn& g, double a, double b, std::size_t cells) {
  return grid_extremum(g, a, b, cells, [](double v, double best) { return v > best; });
}

double grid_min(const ScalarFn& g, double a, double b, std::size_t cells) {
  return grid_extremum(g, a, b, cells, [](double v, double best) { return v < best; });
}

KInfFunction level_function(std::span<const SemiPassiveNode> nodes, double weight) {
  std::vector<KInfFunction> alphas;
  for (const auto& n : nodes) alphas.push_back(n.alpha);
  return scaled(pointwise_min(alphas), weight);
}

std::span<const SemiPassiveNode> leader_nodes(const CertificateInputs& in) {
  return std::span<const SemiPassiveNode>(in.nodes).first(in.decomposition.n_leaders());
}

std::span<const SemiPassiveNode> follower_nodes(const CertificateInputs& in) {
  return std::span<const SemiPassiveNode>(in.nodes).subspan(in.decomposition.n_leaders());
}

// Lower bound of min { min(Psi(y), eps) : |y| >= beta, W(y) <= sigma_o }
// with Psi(y) = sum_i v_i psi_i(|y_i|). The largest coordinate of y satisfies
// |y_i| >= beta / sqrt(n) and v_i y_i^2 <= W(y) <= sigma_o, and Psi(y) is at
// least its own term.
double shell_rate_lower_bound(std::span<const double> v, std::span<const SemiPassiveNode> nodes,
                              double beta, double sigma_o, double eps, std::size_t cells) {
  const double n = static_cast<double>(v.size());
  double best = eps;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = beta / std::sqrt(n);
    const double b = std::max(a, std::sqrt(sigma_o / v[i]));
    const auto& psi = nodes[i].psi;
    const double vi = v[i];
    best = std::min(best, grid_min([&](double s) { return vi * psi(s); }, a, b, cells));
  }
  return best;
}

// Seeded samples of the same shell; their minimum can only sit above the
// lower bound.
double shell_rate_sampled(std::span<const double> v, std::span<const SemiPassiveNode> nodes,
                          double beta, double sigma_o, double eps, std::size_t samples) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const std::size_t n = v.size();
  Vector u(n);
  double best = eps;
  for (std::size_t k = 0; k < samples; ++k) {
    double norm = 0.0;
    for (double& c : u) {
      c = normal(rng);
      norm += c * c;
    }
    norm = std::sqrt(norm);
    double w_unit = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] /= norm;
      w_unit += v[i] * u[i] * u[i];
    }
    const double t_max = std::sqrt(sigma_o / w_unit);
    if (t_max < beta) continue;
    const double t = beta + (t_max - beta) * (k % 4 == 0 ? 0.0 : unit(rng));
    double psi_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) psi_sum += v[i] * nodes[i].psi(std::abs(t * u[i]));
    best = std::min(best, psi_sum);
  }
  return best;
}

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

NodeRejected::NodeRejected(std::size_t node, std::string name, SemiPassivityVerdict verdict)
    : AssumptionError("node " + std::to_string(node + 1) + " (" + name +
                      ") fails semi-passivity at x = " +
                      (verdict.witness ? std::to_string(*verdict.witness) : std::string("?")) +
                      ": " + verdict.reason),
      node_(node),
      verdict_(std::move(verdict)) {}

CertificateInputs make_certificate_inputs(const DiGraph& g,
                                          const std::vector<SemiPassiveNode>& nodes,
                                          const CertificateParams& params,
                                          const Tolerances& tol) {
  if (nodes.size() != g.size())
    throw PreconditionError("make_certificate_inputs: node count differs from graph size");
  if (!(params.gamma_o > 0.0) || !(params.r_o > 0.0) || !(params.epsilon > 0.0))
    throw PreconditionError("make_certificate_inputs: gamma_o, r_o and epsilon must be positive");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto verdict = verify_semipassive(nodes[i], 10.0 * nodes[i].rho, tol.grid_points, tol);
    if (!verdict) throw NodeRejected(i, nodes[i].name, std::move(verdict));
  }
  CertificateInputs in;
  in.params = params;
  in.decomposition = decompose(g);
  in.leader_lyap = leader_lyapunov(in.decomposition.L_leader, tol);
  if (in.decomposition.n_followers() > 0)
    in.follower_lyap = follower_lyapunov(in.decomposition.M_f, tol);
  for (std::size_t k : in.decomposition.permutation) in.nodes.push_back(nodes[k]);
  return in;
}

double dissipation_deficit(const SemiPassiveNode& node, const Tolerances& tol) {
  const auto& h = node.H;
  return std::max(0.0, grid_max([&](double x) { return -h(x); }, -node.rho, node.rho,
                                tol.grid_points));
}

double max_weighted_storage_on_ball(std::span<const double> weights,
                                    std::span<const SemiPassiveNode> nodes, double radius,
                                    const Tolerances& tol) {
  const std::size_t n = weights.size();
  const double closed = *std::max_element(weights.begin(), weights.end()) * radius * radius;

  Vector at_zero(n);
  double base = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    at_zero[i] = weights[i] * nodes[i].V(0.0);
    base += at_zero[i];
  }
  auto W_plane = [&](std::size_t i, std::size_t j, double yi, double yj) {
    double w = base - at_zero[i] + weights[i] * nodes[i].V(yi);
    if (j != i) w += -at_zero[j] + weights[j] * nodes[j].V(yj);
    return w;
  };
  double grid = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    grid = std::max({grid, W_plane(i, i, radius, 0), W_plane(i, i, -radius, 0)});
  constexpr int angles = 64;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n && (n <= 16 || j == i + 1); ++j)
      for (int a = 0; a < angles; ++a) {
        const double th = 2.0 * std::numbers::pi * a / angles;
        grid = std::max(grid, W_plane(i, j, radius * std::cos(th), radius * std::sin(th)));
      }
  if (std::abs(grid - closed) > tol.closed_form_rel * std::max(closed, 1e-300) &&
      std::abs(grid - closed) > 1e-300)
    throw std::logic_error("max_weighted_storage_on_ball: closed form " + fmt(closed) +
                           " disagrees with grid maximum " + fmt(grid));
  return closed;
}

LeaderBounds leader_constants(const CertificateInputs& in, const Tolerances& tol) {
  const auto nodes = leader_nodes(in);
  const Vector& v = in.leader_lyap.v;
  const auto& p = in.params;
  const double nl = static_cast<double>(v.size());

  LeaderBounds b;
  for (std::size_t i = 0; i < v.size(); ++i) b.H_ell += v[i] * dissipation_deficit(nodes[i], tol);
  b.R_e = v.size() == 1 ? 0.0
                        : std::sqrt((p.epsilon + b.H_ell) / (p.gamma_o * in.leader_lyap.lambda2_Q));
  for (const auto& n : nodes) b.rho_bar = std::max(b.rho_bar, n.rho);
  b.beta = std::sqrt(nl) * (b.rho_bar + 2.0 * b.R_e);
  b.sigma = max_weighted_storage_on_ball(v, nodes, b.beta, tol);

  // W(x) = sum v_i x_i^2 >= min_i v_i |x|^2 >= min_i v_i * min_i alpha_i(|x|).
  b.level_weight = *std::min_element(v.begin(), v.end());
  const KInfFunction level = level_function(nodes, b.level_weight);
  b.r_ell = invert_kinf(level, b.sigma, tol);

  b.sigma_o = max_weighted_storage_on_ball(v, nodes, std::max(p.r_o, b.beta), tol);
  b.eps_ro = shell_rate_lower_bound(v, nodes, b.beta, b.sigma_o, p.epsilon, tol.grid_points);
  if (!(b.eps_ro > 0.0))
    throw AssumptionError("leader_constants: decrease rate eps_ro = " + fmt(b.eps_ro) +
                          " is not positive");
  const double sampled = shell_rate_sampled(v, nodes, b.beta, b.sigma_o, p.epsilon, 4000);
  if (sampled < b.eps_ro * (1.0 - 1e-9))
    throw std::logic_error("leader_constants: sampled shell minimum " + fmt(sampled) +
                           " below the lower bound " + fmt(b.eps_ro));
  b.T_ell = b.sigma_o / b.eps_ro;

  for (double x : {b.H_ell, b.R_e, b.beta, b.sigma, b.r_ell, b.sigma_o, b.T_ell})
    require_finite(x, "leader constant");
  return b;
}

FollowerBounds follower_constants(const CertificateInputs& in, const LeaderBounds& leader,
                                  const Tolerances& tol) {
  if (!in.follower_lyap || in.decomposition.n_followers() == 0)
    throw PreconditionError("follower_constants: network has no followers");
  const auto& fl = *in.follower_lyap;
  if (!(fl.lambda1_S > 0.0))
    throw AssumptionError("follower_constants: lambda_1(S) is not positive");
  const auto nodes = follower_nodes(in);
  const auto& prm = in.params;
  const Vector p = fl.P.diagonal_entries();
  const double lam = fl.lambda1_S;

  FollowerBounds b;
  for (std::size_t i = 0; i < p.size(); ++i) b.H_f += p[i] * dissipation_deficit(nodes[i], tol);

  const DenseMatrix pa = fl.P * in.decomposition.A_lf;
  b.p_bar = spectral_norm(pa, tol);
  DenseMatrix c = pa.transpose() * inverse(fl.S) * pa;
  c = 0.5 * (c + c.transpose());
  b.coupling_norm = spectral_norm(c, tol);

  const KInfFunction leader_level = level_function(leader_nodes(in), leader.level_weight);
  b.R_ell_guub = invert_kinf(leader_level, leader.H_ell * leader.T_ell + leader.sigma_o, tol);
  b.d_f = std::sqrt(4.0 * b.coupling_norm * b.R_ell_guub * b.R_ell_guub / lam +
                    8.0 * b.H_f / (lam * prm.gamma_o));
  b.sigma_f = max_weighted_storage_on_ball(p, nodes, b.d_f, tol);
  b.sigma_fo = max_weighted_storage_on_ball(p, nodes, prm.r_o, tol);

  // Z(x) = sum p_i x_i^2 >= min_i p_i * min_i alpha_i(|x|).
  b.level_weight = *std::min_element(p.begin(), p.end());
  const KInfFunction level = level_function(nodes, b.level_weight);
  b.r_bar_o = invert_kinf(level, std::max(b.sigma_fo, b.sigma_f), tol);
  b.beta_1 = 1.0 + 2.0 * b.p_bar * leader.r_ell / lam +
             std::sqrt((prm.epsilon + b.H_f) / (prm.gamma_o * lam));
  b.sigma_1 = max_weighted_storage_on_ball(p, nodes, b.beta_1, tol);
  b.r_f = invert_kinf(level, b.sigma_1, tol);
  b.T_f = leader.T_ell + std::max(b.sigma_fo, b.sigma_f) / prm.epsilon;

  for (double x : {b.H_f, b.p_bar, b.coupling_norm, b.R_ell_guub, b.d_f, b.sigma_f, b.sigma_fo,
                   b.r_bar_o, b.beta_1, b.sigma_1, b.r_f, b.T_f})
    require_finite(x, "follower constant");
  return b;
}

CorollaryBounds corollary_constants(const CertificateInputs& in, const LeaderBounds& leader,
                                    const std::optional<FollowerBounds>& follower,
                                    const Tolerances& tol) {
  const auto lnodes = leader_nodes(in);
  CorollaryBounds b;
  b.sigma_ell = max_weighted_storage_on_ball(in.leader_lyap.v, lnodes, in.params.r_o, tol);
  const KInfFunction leader_level = level_function(lnodes, leader.level_weight);
  b.R_ell_gub =
      invert_kinf(leader_level, b.sigma_ell + leader.H_ell * leader.T_ell + leader.r_ell, tol);
  require_finite(b.R_ell_gub, "R_ell_gub");

  if (follower) {
    const auto fnodes = follower_nodes(in);
    const double lam = in.follower_lyap->lambda1_S;
    const Vector p = in.follower_lyap->P.diagonal_entries();
    b.d_f_gub = std::sqrt(4.0 * follower->coupling_norm * b.R_ell_gub * b.R_ell_gub / lam +
                          8.0 * follower->H_f / (lam * in.params.gamma_o));
    b.sigma_f_gub = max_weighted_storage_on_ball(p, fnodes, *b.d_f_gub, tol);
    const KInfFunction level = level_function(fnodes, follower->level_weight);
    b.R_f_gub = invert_kinf(level, std::max(follower->sigma_fo, *b.sigma_f_gub), tol);
    require_finite(*b.R_f_gub, "R_f_gub");
  }
  return b;
}

BoundCertificate certify(const CertificateInputs& in, const Tolerances& tol) {
  BoundCertificate c;
  c.params = in.params;
  c.n_leaders = in.decomposition.n_leaders();
  c.n_followers = in.decomposition.n_followers();
  c.leader = leader_constants(in, tol);
  if (c.n_followers > 0) c.follower = follower_constants(in, c.leader, tol);
  c.corollary = corollary_constants(in, c.leader, c.follower, tol);
  return c;
}

UniformityReport check_uniformity(const CertificateInputs& in, const Tolerances& tol) {
  UniformityReport rep;
  auto check = [&](bool ok, std::string line) {
    rep.ok = rep.ok && ok;
    rep.lines.push_back((ok ? "pass: " : "FAIL: ") + std::move(line));
  };

  // The constants depend on gamma_o only; any gain gamma >= gamma_o reuses them.
  const std::array<double, 3> gains{in.params.gamma_o, 10.0 * in.params.gamma_o,
                                    100.0 * in.params.gamma_o};
  std::array<BoundCertificate, 3> certs;
  for_each_index(gains.size(), Execution::parallel, [&](std::size_t k) { certs[k] = certify(in, tol); });
  const auto& base = certs[0];
  for (std::size_t k = 1; k < gains.size(); ++k) {
    const auto& c = certs[k];
    const bool same = c.leader.r_ell == base.leader.r_ell && c.leader.T_ell == base.leader.T_ell &&
                      (!base.follower || (c.follower->r_f == base.follower->r_f &&
                                          c.follower->T_f == base.follower->T_f));
    check(same, "gamma = " + fmt(gains[k]) + ": r_ell, r_f, T_ell, T_f unchanged");
  }

  CertificateInputs doubled = in;
  doubled.params.r_o *= 2.0;
  const BoundCertificate c2 = certify(doubled, tol);
  check(c2.leader.r_ell == base.leader.r_ell, "r_o -> 2 r_o: r_ell unchanged (" +
                                                  fmt(base.leader.r_ell) + ")");
  if (base.follower)
    check(c2.follower->r_f == base.follower->r_f,
          "r_o -> 2 r_o: r_f unchanged (" + fmt(base.follower->r_f) + ")");
  check(c2.leader.sigma_o >= base.leader.sigma_o, "r_o -> 2 r_o: sigma_o nondecreasing (" +
                                                      fmt(base.leader.sigma_o) + " -> " +
                                                      fmt(c2.leader.sigma_o) + ")");
  rep.lines.push_back("info: r_o -> 2 r_o: T_ell " + fmt(base.leader.T_ell) + " -> " +
                      fmt(c2.leader.T_ell));
  return rep;
}

namespace {

using Fields = std::vector<std::pair<std::string, double*>>;

Fields leader_fields(LeaderBounds& b) {
  return {{"H_ell", &b.H_ell},   {"R_e", &b.R_e},           {"rho_bar", &b.rho_bar},
          {"beta", &b.beta},     {"sigma", &b.sigma},       {"leader_level_weight", &b.level_weight},
          {"r_ell", &b.r_ell},   {"sigma_o", &b.sigma_o},   {"eps_ro", &b.eps_ro},
          {"T_ell", &b.T_ell}};
}

Fields follower_fields(FollowerBounds& b) {
  return {{"H_f", &b.H_f},
          {"p_bar", &b.p_bar},
          {"coupling_norm", &b.coupling_norm},
          {"R_ell_guub", &b.R_ell_guub},
          {"d_f", &b.d_f},
          {"sigma_f", &b.sigma_f},
          {"sigma_fo", &b.sigma_fo},
          {"follower_level_weight", &b.level_weight},
          {"r_bar_o", &b.r_bar_o},
          {"beta_1", &b.beta_1},
          {"sigma_1", &b.sigma_1},
          {"r_f", &b.r_f},
          {"T_f", &b.T_f}};
}

}  // namespace

std::string to_key_value(const BoundCertificate& cert) {
  BoundCertificate c = cert;
  std::ostringstream os;
  os << "# bound certificate\n";
  os << "gamma_o = " << fmt(c.params.gamma_o) << "\n";
  os << "r_o = " << fmt(c.params.r_o) << "\n";
  os << "epsilon = " << fmt(c.params.epsilon) << "\n";
  os << "n_leaders = " << c.n_leaders << "\n";
  os << "n_followers = " << c.n_followers << "\n";
  for (auto& [k, p] : leader_fields(c.leader)) os << k << " = " << fmt(*p) << "\n";
  if (c.follower) {
    os << "follower_dissipation_weights = p\n";
    for (auto& [k, p] : follower_fields(*c.follower)) os << k << " = " << fmt(*p) << "\n";
  }
  os << "sigma_ell = " << fmt(c.corollary.sigma_ell) << "\n";
  os << "R_ell_gub = " << fmt(c.corollary.R_ell_gub) << "\n";
  if (c.corollary.R_f_gub) {
    os << "d_f_gub = " << fmt(*c.corollary.d_f_gub) << "\n";
    os << "sigma_f_gub = " << fmt(*c.corollary.sigma_f_gub) << "\n";
    os << "R_f_gub = " << fmt(*c.corollary.R_f_gub) << "\n";
  }
  return os.str();
}

BoundCertificate parse_key_value(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw PreconditionError("certificate document line " + std::to_string(lineno) +
                              ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto num = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw PreconditionError("certificate document: missing key '" + key + "'");
    double v = 0.0;
    const auto* first = it->second.data();
    const auto res = std::from_chars(first, first + it->second.size(), v);
    if (res.ec != std::errc() || res.ptr != first + it->second.size())
      throw PreconditionError("certificate document: bad number for '" + key + "'");
    return v;
  };
  BoundCertificate c;
  c.params = {num("gamma_o"), num("r_o"), num("epsilon")};
  c.n_leaders = static_cast<std::size_t>(num("n_leaders"));
  c.n_followers = static_cast<std::size_t>(num("n_followers"));
  for (auto& [k, p] : leader_fields(c.leader)) *p = num(k);
  if (c.n_followers > 0) {
    c.follower.emplace();
    for (auto& [k, p] : follower_fields(*c.follower)) *p = num(k);
    c.corollary.d_f_gub = num("d_f_gub");
    c.corollary.sigma_f_gub = num("sigma_f_gub");
    c.corollary.R_f_gub = num("R_f_gub");
  }
  c.corollary.sigma_ell = num("sigma_ell");
  c.corollary.R_ell_gub = num("R_ell_gub");
  return c;
}

std::string to_summary(const BoundCertificate& c) {
  std::ostringstream os;
  os << "Bound certificate (gamma >= " << c.params.gamma_o << ", |x(0)| <= " << c.params.r_o
     << ", epsilon = " << c.params.epsilon << ")\n";
  os << "  leaders: " << c.n_leaders << "   followers: " << c.n_followers << "\n\n";
  os << "  ultimate bounds (valid for every gamma >= gamma_o)\n";
  os << "    |x_leader(t)|   <= r_ell     = " << c.leader.r_ell << "   for t >= T_ell = "
     << c.leader.T_ell << "\n";
  if (c.follower)
    os << "    |x_follower(t)| <= r_f       = " << c.follower->r_f << "   for t >= T_f   = "
       << c.follower->T_f << "\n";
  os << "  uniform bounds (all t >= 0)\n";
  os << "    |x_leader(t)|   <= R_ell_gub = " << c.corollary.R_ell_gub << "\n";
  if (c.corollary.R_f_gub)
    os << "    |x_follower(t)| <= R_f_gub   = " << *c.corollary.R_f_gub << "\n";
  os << "\n  leader constants: H_ell = " << c.leader.H_ell << ", R_e = " << c.leader.R_e
     << ", beta = " << c.leader.beta << ", sigma = " << c.leader.sigma
     << ", sigma_o = " << c.leader.sigma_o << ", eps_ro = " << c.leader.eps_ro << "\n";
  if (c.follower)
    os << "  follower constants: H_f = " << c.follower->H_f << " (weights p_i), p_bar = "
       << c.follower->p_bar << ", d_f = " << c.follower->d_f << ", beta_1 = " << c.follower->beta_1
       << ", r_bar_o = " << c.follower->r_bar_o << "\n";
  return os.str();
}

}  // namespace netbound
