// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "netbound/certificate.hpp"
#include "netbound/matrixlab.hpp"
#include "netbound/network_spec.hpp"
#include "netbound/simulator.hpp"
#include "test_graphs.hpp"

using namespace netbound;
using testing_support::to_eigen;
using testing_support::unit_edges;

namespace {

// Pinned tolerances and limits.
constexpr double kLemmaTol = 1e-9;
constexpr double kConservationTol = 1e-9;
constexpr double kConsensusTol = 1e-6;
constexpr double kRk4RatioMin = 14.0;
constexpr double kRk4AbsTol = 1e-8;
constexpr double kLemmaSeconds = 5.0;
constexpr double kConsensusSeconds = 10.0;
constexpr double kTheoremSeconds = 60.0;

const std::string kDemoDir = NETBOUND_DEMO_DIR;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body,
            double time_limit = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit > 0.0 && secs >= time_limit) {
    out.ok = false;
    out.detail = "runtime " + std::to_string(secs) + " s exceeds " + std::to_string(time_limit) + " s";
  }
  if (!out.ok) ++failures;
  std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", out.ok ? "PASS" : "FAIL", id, title, secs,
              out.detail.empty() ? "" : " -- ", out.detail.c_str());
  std::fflush(stdout);
}

Outcome lemma1() {
  Outcome o;
  std::mt19937_64 rng(1001);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const DenseMatrix lap = build_laplacian(testing_support::random_strongly_connected(n, rng));
    const auto d = leader_lyapunov(lap);
    o.require((d.Q - d.Q.transpose()).max_abs() == 0.0, "Q_o not symmetric");
    for (double x : d.Q * Vector(n, 1.0)) o.require(std::abs(x) <= kLemmaTol, "Q_o 1 != 0");
    const auto ev = to_eigen(d.Q).selfadjointView<Eigen::Lower>().eigenvalues();
    o.require(std::abs(ev(0)) <= kLemmaTol, "lambda_1(Q_o) not zero");
    o.require(ev(1) > kLemmaTol && d.lambda2_Q > kLemmaTol, "lambda_2(Q_o) not positive");
    for (double v : d.v) o.require(v > 0.0, "v_o not positive");
  }
  return o;
}

Outcome lemma2() {
  Outcome o;
  std::mt19937_64 rng(2002);
  for (int trial = 0; trial < 200; ++trial) {
    const DenseMatrix m = testing_support::random_m_matrix(1 + trial % 8, rng);
    o.require(is_nonsingular_m_matrix(m), "generator produced a matrix rejected as M-matrix");
    const auto d = follower_lyapunov(m);
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.rows(); ++j)
        o.require(i == j ? d.P(i, j) > 0.0 : d.P(i, j) == 0.0, "P not diagonal positive");
    const auto ev = to_eigen(d.S).selfadjointView<Eigen::Lower>().eigenvalues();
    o.require(ev(0) > kLemmaTol && d.lambda1_S > kLemmaTol, "lambda_1(S) not positive");
  }
  return o;
}

void check_decomposition(const DiGraph& g, Outcome& o) {
  const std::size_t n = g.size();
  const auto reach = testing_support::reachability(g);
  const auto comps = strongly_connected_components(g);
  std::vector<std::size_t> comp_of(n);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (std::size_t v : comps[c]) comp_of[v] = c;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      o.require((comp_of[i] == comp_of[j]) == (reach[i][j] && reach[j][i]), "SCC mismatch");

  std::vector<std::size_t> roots;  // nodes that reach every node
  for (std::size_t i = 0; i < n; ++i) {
    bool all = true;
    for (std::size_t j = 0; j < n; ++j) all = all && reach[i][j];
    if (all) roots.push_back(i);
  }
  const bool ok = check_connectivity(g) == ConnectivityVerdict::ok;
  o.require(ok == !roots.empty(), "root-SCC verdict mismatch");
  if (ok) {
    const auto d = decompose(g);
    o.require(d.leaders == roots, "leader set mismatch");
    o.require(d.assemble() == permute_symmetric(build_laplacian(g), d.permutation),
              "reassembled Laplacian mismatch");
  }
}

Outcome decomposition_oracle() {
  Outcome o;
  for (std::size_t n = 1; n <= 4; ++n) {
    const std::size_t slots = n * (n - 1);
    for (std::size_t mask = 0; mask < (std::size_t{1} << slots); ++mask) {
      DenseMatrix a(n, n);
      std::size_t bit = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) a(i, j) = (mask >> bit++) & 1u ? 1.0 : 0.0;
      check_decomposition(DiGraph(a), o);
    }
  }
  std::mt19937_64 rng(3003);
  std::bernoulli_distribution edge(0.3);
  std::uniform_real_distribution<double> w(0.1, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + trial % 6;
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && edge(rng)) a(i, j) = w(rng);
    check_decomposition(DiGraph(a), o);
  }
  return o;
}

Outcome linear_consensus() {
  Outcome o;
  struct Case {
    DiGraph g;
    Vector x0;
  };
  const std::vector<Case> cases{{DiGraph(3, unit_edges({{0, 1}, {1, 2}, {2, 0}})), {1.0, 0.0, -1.0}},
                                {DiGraph(3, unit_edges({{0, 1}, {1, 2}})), {1.5, -2.0, 0.5}}};
  for (const auto& c : cases) {
    const auto rep = linear_consensus_suite(c.g, 1.0, c.x0, 40.0, 1e-3);
    o.require(rep.conservation_drift <= kConservationTol, "v_o^T x drifted");
    o.require(rep.max_Z_increase <= 0.0, "Z increased between samples");
    o.require(rep.final_error <= kConsensusTol, "consensus limit mismatch");
    if (decompose(c.g).n_followers() > 0)
      o.require(rep.follower_decay_rate && *rep.follower_decay_rate > 0.0,
                "follower decay exponent not positive");
    o.require(rep.ok, rep.lines.empty() ? "suite failed" : rep.lines.back());
  }
  return o;
}

struct DemoRuns {
  BoundCertificate cert;
  ValidationReport report;
  UniformityReport uniformity;
};

DemoRuns run_demo() {
  const NetworkSpec spec = load_network_spec(kDemoDir + "/bistable_network.json");
  const Network net = build_network(spec);
  const auto in = make_certificate_inputs(net.graph, net.nodes, certificate_params(spec));
  DemoRuns d;
  d.cert = certify(in);
  d.uniformity = check_uniformity(in);
  const auto x0 = sample_ball(net.graph.size(), spec.analysis.r_o,
                              spec.analysis.num_initial_conditions, spec.analysis.seed);
  ValidationOptions opt;
  opt.dt = spec.analysis.dt;
  d.report = validate_certificate(d.cert, net, spec.analysis.gamma_list, x0, opt);
  return d;
}

Outcome theorem1(const DemoRuns& d) {
  Outcome o;
  o.require(d.report.runs.size() == 30, "expected 3 gains x 10 initial conditions");
  o.require(d.report.horizon > d.report.required_horizon, "horizon does not exceed T_f");
  for (const auto& r : d.report.runs) {
    o.require(r.guub == Verdict::holds, "ultimate bound refuted or inconclusive at gamma = " +
                                            std::to_string(r.gamma));
    o.require(r.leader_tail_sup <= d.cert.leader.r_ell, "leader tail above r_ell");
    o.require(r.follower_tail_sup <= d.cert.follower->r_f, "follower tail above r_f");
  }
  o.require(d.uniformity.ok, "certificate not uniform in gamma");
  return o;
}

Outcome corollary(const DemoRuns& d) {
  Outcome o;
  for (const auto& r : d.report.runs) {
    o.require(r.gub == Verdict::holds, "uniform bound refuted at gamma = " + std::to_string(r.gamma));
    o.require(r.leader_sup <= d.cert.corollary.R_ell_gub, "leader above R_ell_gub");
    o.require(r.follower_sup <= *d.cert.corollary.R_f_gub, "follower above R_f_gub");
  }
  return o;
}

double rk4_error(double dt) {
  const Network net{DiGraph(1), {builtin_node("linear_stable")}};
  SimulationOptions opt;
  opt.horizon = 1.0;
  opt.dt = dt;
  const auto traj = simulate(net, Vector{1.0}, opt);
  return std::abs(traj.states.back()[0] - std::exp(-1.0));
}

Outcome rk4_order() {
  Outcome o;
  const double ratio = rk4_error(0.1) / rk4_error(0.05);
  o.require(ratio >= kRk4RatioMin, "error ratio " + std::to_string(ratio));
  const double e = rk4_error(1e-3);
  o.require(e <= kRk4AbsTol, "error at dt = 1e-3 is " + std::to_string(e));
  return o;
}

Outcome determinism() {
  Outcome o;
  for (const char* file : {"bistable_network.json", "linear_chain.json"}) {
    const NetworkSpec spec = load_network_spec(kDemoDir + "/" + file);
    const Network net = build_network(spec);
    const auto in = make_certificate_inputs(net.graph, net.nodes, certificate_params(spec));
    const auto a = certify(in), b = certify(in);
    o.require(to_key_value(a) == to_key_value(b), std::string(file) + ": recomputation differs");
    const auto u = check_uniformity(in);
    o.require(u.ok, std::string(file) + ": uniformity check failed");
    const double T_f = a.follower ? a.follower->T_f : a.leader.T_ell;
    o.require(std::isfinite(a.leader.T_ell) && a.leader.T_ell > 0.0 && std::isfinite(T_f) &&
                  T_f > 0.0,
              std::string(file) + ": settling times not finite and positive");
  }
  return o;
}

Outcome gatekeeping() {
  Outcome o;
  SemiPassiveNode plus_x = builtin_node("linear_stable");
  plus_x.name = "f = +x";
  plus_x.f = [](double x) { return x; };
  plus_x.H = [](double x) { return -2.0 * x * x; };
  const auto v = verify_semipassive(plus_x, 10.0, 10000);
  o.require(!v.ok && v.witness.has_value(), "f = +x accepted");
  if (v.witness)
    o.require(2.0 * *v.witness * plus_x.f(*v.witness) + plus_x.H(*v.witness) > 0.0 ||
                  plus_x.H(*v.witness) < plus_x.psi(std::abs(*v.witness)),
              "witness does not violate the inequality");
  const auto mis = builtin_node("mis_signed_linear");
  const auto vm = verify_semipassive(mis, 10.0 * mis.rho, 10000);
  o.require(!vm.ok && vm.witness.has_value(), "mis-signed model accepted");
  for (const char* tag : {"linear_stable", "bistable", "saturated_drift"}) {
    const auto n = builtin_node(tag);
    o.require(verify_semipassive(n, 10.0 * n.rho, 10000).ok, std::string(tag) + " rejected");
  }
  return o;
}

}  // namespace

int main() {
  report(1, "Lemma 1 on 200 random strongly connected digraphs", lemma1, kLemmaSeconds);
  report(2, "Lemma 2 on 200 random nonsingular M-matrices", lemma2, kLemmaSeconds);
  report(3, "decomposition vs reachability oracle (all n <= 4, 500 random n <= 6)",
         decomposition_oracle);
  report(4, "linear consensus on 3-cycle and chain", linear_consensus, kConsensusSeconds);

  DemoRuns demo;
  bool demo_ok = false;
  report(5, "ultimate bounds on the bistable demo, gamma in {1, 10, 100}", [&] {
    demo = run_demo();
    demo_ok = true;
    return theorem1(demo);
  }, kTheoremSeconds);
  report(6, "uniform bounds on the same runs", [&] {
    if (!demo_ok) return Outcome{false, "demo runs unavailable"};
    return corollary(demo);
  });
  report(7, "RK4 order and accuracy", rk4_order);
  report(8, "certificate determinism and uniformity", determinism);
  report(9, "semi-passivity gatekeeping", gatekeeping);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
