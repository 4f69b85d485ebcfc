#include <doctest.h>

#include <cmath>
#include <random>

#include "netbound/certificate.hpp"
#include "netbound/errors.hpp"
#include "test_graphs.hpp"

using namespace netbound;
using doctest::Approx;
using testing_support::to_eigen;
using testing_support::unit_edges;

namespace {

CertificateInputs chain2_inputs(double r_o = 1.0, double gamma_o = 1.0) {
  const DiGraph g(2, unit_edges({{0, 1}}));
  const std::vector<SemiPassiveNode> nodes(2, builtin_node("linear_stable"));
  return make_certificate_inputs(g, nodes, {gamma_o, r_o, 1.0});
}

DiGraph demo_graph() { return DiGraph(4, unit_edges({{0, 1}, {1, 0}, {1, 2}, {2, 3}})); }

CertificateInputs demo_inputs(double r_o = 5.0, double gamma_o = 1.0) {
  const std::vector<SemiPassiveNode> nodes(4, builtin_node("bistable"));
  return make_certificate_inputs(demo_graph(), nodes, {gamma_o, r_o, 1.0});
}

void check_rel(double got, double want, double rel = 1e-9) {
  CHECK(std::abs(got - want) <= rel * std::max(1.0, std::abs(want)));
}

}  // namespace

TEST_CASE("2-node chain golden values") {
  const BoundCertificate c = certify(chain2_inputs());
  const auto& l = c.leader;
  CHECK(l.H_ell == 0.0);
  CHECK(l.R_e == 0.0);
  check_rel(l.beta, 1.0);
  check_rel(l.sigma, 1.0);
  check_rel(l.r_ell, 1.0);
  check_rel(l.sigma_o, 1.0);
  check_rel(l.eps_ro, 1.0);
  check_rel(l.T_ell, 1.0);
  REQUIRE(c.follower);
  const auto& f = *c.follower;
  CHECK(f.H_f == 0.0);
  check_rel(f.p_bar, 1.0);
  check_rel(f.coupling_norm, 0.5);
  check_rel(f.R_ell_guub, 1.0);
  check_rel(f.d_f, 1.0);
  check_rel(f.sigma_f, 1.0);
  check_rel(f.sigma_fo, 1.0);
  check_rel(f.r_bar_o, 1.0);
  check_rel(f.beta_1, 2.0 + std::sqrt(2.0) / 2.0);
  check_rel(f.sigma_1, std::pow(2.0 + std::sqrt(2.0) / 2.0, 2));
  check_rel(f.r_f, 2.0 + std::sqrt(2.0) / 2.0);
  check_rel(f.T_f, 2.0);
  // with H_f = 0, d_f = 2 R_ell_guub sqrt(c / lambda_1(S))
  check_rel(f.d_f, 2.0 * f.R_ell_guub * std::sqrt(f.coupling_norm / 2.0));
  const auto& k = c.corollary;
  check_rel(k.sigma_ell, 1.0);
  check_rel(k.R_ell_gub, std::sqrt(2.0));
  check_rel(*k.d_f_gub, std::sqrt(2.0));
  check_rel(*k.sigma_f_gub, 2.0);
  check_rel(*k.R_f_gub, std::sqrt(2.0));
}

TEST_CASE("bistable demo matches an independent formula evaluation") {
  const BoundCertificate c = certify(demo_inputs());
  // leaders {1,2}: v = (1/2, 1/2), lambda_2(Q_o) = 2; bistable: max_{|x|<=2} -H = 1/2, rho = 2
  const double H_ell = 0.5, R_e = std::sqrt(3.0) / 2.0, beta = std::sqrt(2.0) * (2.0 + std::sqrt(3.0));
  const double sigma = 0.5 * beta * beta;
  const double r_ell = std::sqrt(sigma / 0.5);
  const double sigma_o = 0.5 * std::pow(std::max(5.0, beta), 2);
  const double T_ell = sigma_o / 1.0;
  check_rel(c.leader.H_ell, H_ell, 1e-8);
  check_rel(c.leader.R_e, R_e, 1e-8);
  check_rel(c.leader.beta, beta, 1e-8);
  check_rel(c.leader.sigma, sigma, 1e-8);
  check_rel(c.leader.r_ell, r_ell, 1e-8);
  check_rel(c.leader.sigma_o, sigma_o, 1e-8);
  check_rel(c.leader.eps_ro, 1.0);
  check_rel(c.leader.T_ell, T_ell, 1e-8);

  // followers (3, 4): M_f = [[1,0],[-1,1]], P = diag(2, 1/2), A_lf = [[0,1],[0,0]]
  Eigen::Matrix2d P = Eigen::Vector2d(2.0, 0.5).asDiagonal();
  Eigen::Matrix2d M{{1, 0}, {-1, 1}};
  Eigen::Matrix2d A{{0, 1}, {0, 0}};
  const Eigen::Matrix2d S = P * M + M.transpose() * P;
  const double lam1 = S.selfadjointView<Eigen::Lower>().eigenvalues()(0);
  const double p_bar = (P * A).jacobiSvd().singularValues()(0);
  const double cn = (A.transpose() * P * S.inverse() * P * A).jacobiSvd().singularValues()(0);
  const double H_f = (2.0 + 0.5) * 0.5;
  const double R_l = std::sqrt((H_ell * T_ell + sigma_o) / 0.5);
  const double d_f = std::sqrt(4 * cn * R_l * R_l / lam1 + 8 * H_f / lam1);
  const double sigma_f = 2.0 * d_f * d_f, sigma_fo = 2.0 * 25.0;
  const double beta_1 = 1 + 2 * p_bar * r_ell / lam1 + std::sqrt((1 + H_f) / lam1);
  REQUIRE(c.follower);
  const auto& f = *c.follower;
  check_rel(f.H_f, H_f, 1e-8);
  check_rel(f.p_bar, p_bar, 1e-8);
  check_rel(f.coupling_norm, cn, 1e-8);
  check_rel(f.R_ell_guub, R_l, 1e-8);
  check_rel(f.d_f, d_f, 1e-8);
  check_rel(f.sigma_f, sigma_f, 1e-8);
  check_rel(f.sigma_fo, sigma_fo, 1e-8);
  check_rel(f.r_bar_o, std::sqrt(std::max(sigma_f, sigma_fo) / 0.5), 1e-8);
  check_rel(f.beta_1, beta_1, 1e-8);
  check_rel(f.r_f, std::sqrt(2.0 * beta_1 * beta_1 / 0.5), 1e-8);
  check_rel(f.T_f, T_ell + std::max(sigma_f, sigma_fo), 1e-8);

  const double sigma_ell = 0.5 * 25.0;
  const double R_ell_gub = std::sqrt((sigma_ell + H_ell * T_ell + r_ell) / 0.5);
  const double d_gub = std::sqrt(4 * cn * R_ell_gub * R_ell_gub / lam1 + 8 * H_f / lam1);
  check_rel(c.corollary.sigma_ell, sigma_ell, 1e-8);
  check_rel(c.corollary.R_ell_gub, R_ell_gub, 1e-8);
  check_rel(*c.corollary.d_f_gub, d_gub, 1e-8);
  check_rel(*c.corollary.R_f_gub, std::sqrt(std::max(2.0 * d_gub * d_gub, sigma_fo) / 0.5), 1e-8);
}

TEST_CASE("leader-only network has no follower section") {
  const DiGraph g(3, unit_edges({{0, 1}, {1, 2}, {2, 0}}));
  const std::vector<SemiPassiveNode> nodes(3, builtin_node("bistable"));
  const auto c = certify(make_certificate_inputs(g, nodes, {1.0, 2.0, 1.0}));
  CHECK_FALSE(c.follower);
  CHECK_FALSE(c.corollary.R_f_gub);
  CHECK(c.settling_time() == c.leader.T_ell);
  CHECK(c.n_followers == 0);
}

TEST_CASE("single node") {
  const std::vector<SemiPassiveNode> nodes{builtin_node("linear_stable")};
  const auto c = certify(make_certificate_inputs(DiGraph(1), nodes, {1.0, 3.0, 1.0}));
  CHECK(c.leader.R_e == 0.0);
  CHECK(c.corollary.R_ell_gub >= 3.0);
}

TEST_CASE("node gatekeeping names node and witness") {
  const DiGraph g(2, unit_edges({{0, 1}}));
  const std::vector<SemiPassiveNode> nodes{builtin_node("linear_stable"),
                                           builtin_node("mis_signed_linear")};
  try {
    make_certificate_inputs(g, nodes, {1.0, 1.0, 1.0});
    FAIL("expected NodeRejected");
  } catch (const NodeRejected& e) {
    CHECK(e.node() == 1);
    CHECK(e.verdict().witness.has_value());
    CHECK(std::string(e.what()).find("node 2") != std::string::npos);
  }
}

TEST_CASE("parameter validation") {
  const DiGraph g(2, unit_edges({{0, 1}}));
  const std::vector<SemiPassiveNode> nodes(2, builtin_node("linear_stable"));
  CHECK_THROWS_AS(make_certificate_inputs(g, nodes, {0.0, 1.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(make_certificate_inputs(g, nodes, {1.0, -1.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(make_certificate_inputs(g, {builtin_node("bistable")}, {1.0, 1.0, 1.0}),
                  PreconditionError);
  CHECK_THROWS_AS(make_certificate_inputs(DiGraph(2), nodes, {1.0, 1.0, 1.0}), AssumptionError);
}

TEST_CASE("uniformity and determinism") {
  for (const auto& in : {chain2_inputs(), demo_inputs()}) {
    const auto rep = check_uniformity(in);
    CHECK(rep.ok);
    CHECK(to_key_value(certify(in)) == to_key_value(certify(in)));
  }
  const auto a = certify(demo_inputs(5.0)), b = certify(demo_inputs(10.0));
  CHECK(a.leader.r_ell == b.leader.r_ell);
  CHECK(a.follower->r_f == b.follower->r_f);
  CHECK(b.leader.sigma_o >= a.leader.sigma_o);
}

TEST_CASE("monotone in gamma_o") {
  const auto lo = certify(demo_inputs(5.0, 1.0)), hi = certify(demo_inputs(5.0, 4.0));
  CHECK(hi.leader.R_e < lo.leader.R_e);
  CHECK(hi.leader.beta <= lo.leader.beta);
  CHECK(hi.follower->d_f <= lo.follower->d_f);
  CHECK(hi.follower->beta_1 <= lo.follower->beta_1);
  CHECK(lo.leader.H_ell >= 0.0);
  CHECK(lo.leader.beta >= std::sqrt(2.0) * lo.leader.rho_bar);
}

TEST_CASE("key-value round trip") {
  for (const auto& in : {chain2_inputs(), demo_inputs()}) {
    const auto c = certify(in);
    const std::string kv = to_key_value(c);
    CHECK(to_key_value(parse_key_value(kv)) == kv);
    CHECK(kv.find("follower_dissipation_weights = p") != std::string::npos);
  }
  CHECK_THROWS(parse_key_value("r_ell = banana\n"));
}

TEST_CASE("closed form and grid maximisation agree") {
  const std::vector<SemiPassiveNode> nodes(3, builtin_node("bistable"));
  const Vector w{1.0, 3.0, 2.0};
  CHECK(max_weighted_storage_on_ball(w, nodes, 2.0) == Approx(12.0));
  CHECK(dissipation_deficit(builtin_node("bistable")) == Approx(0.5).epsilon(1e-9));
  CHECK(dissipation_deficit(builtin_node("linear_stable")) == 0.0);
  CHECK(dissipation_deficit(builtin_node("saturated_drift")) == 0.0);
}

TEST_CASE("property: the W level set sigma lies inside the r_ell ball") {
  // Points on {W = sigma} have |x| <= r_ell only if the inversion uses the
  // smallest weight; the demo's diagonal point is the tight case.
  const auto c = certify(demo_inputs());
  const double s = c.leader.sigma;
  const double diag = std::sqrt(s / 0.5 / 2.0);
  CHECK(std::hypot(diag, diag) <= c.leader.r_ell * (1 + 1e-12));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const DiGraph g = testing_support::random_strongly_connected(n, rng);
    const std::vector<SemiPassiveNode> nodes(n, builtin_node("bistable"));
    const auto in = make_certificate_inputs(g, nodes, {u(rng), u(rng), 1.0});
    const auto lb = leader_constants(in);
    for (int k = 0; k < 20; ++k) {
      Vector x(n);
      double w = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = nd(rng);
        w += in.leader_lyap.v[i] * x[i] * x[i];
      }
      const double scale = std::sqrt(lb.sigma / w);
      for (double& xi : x) xi *= scale;
      CHECK(euclidean_norm(x) <= lb.r_ell * (1 + 1e-9));
    }
  }
}
