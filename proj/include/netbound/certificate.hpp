#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netbound/digraph.hpp"
#include "netbound/errors.hpp"
#include "netbound/matrixlab.hpp"
#include "netbound/nodes.hpp"

namespace netbound {

struct CertificateParams {
  double gamma_o = 1.0;  // smallest coupling gain covered
  double r_o = 1.0;      // radius of the initial-condition ball
  double epsilon = 1.0;  // decrease rate demanded outside the absorbing sets
};

struct CertificateInputs {
  LaplacianDecomposition decomposition;
  LeaderLyapunovData leader_lyap;
  std::optional<FollowerLyapunovData> follower_lyap;  // absent when n_f = 0
  std::vector<SemiPassiveNode> nodes;                 // permuted: leaders first
  CertificateParams params;
};

/// Decomposes the graph, builds both Lyapunov weightings and reorders the
/// nodes. Every node is first run through verify_semipassive on
/// [-10 rho, 10 rho]; a failure throws NodeRejected.
CertificateInputs make_certificate_inputs(const DiGraph& g,
                                          const std::vector<SemiPassiveNode>& nodes,
                                          const CertificateParams& params,
                                          const Tolerances& tol = default_tolerances());

class NodeRejected : public AssumptionError {
 public:
  NodeRejected(std::size_t node, std::string name, SemiPassivityVerdict verdict);
  std::size_t node() const { return node_; }
  const SemiPassivityVerdict& verdict() const { return verdict_; }

 private:
  std::size_t node_;
  SemiPassivityVerdict verdict_;
};

struct LeaderBounds {
  double H_ell = 0;         // dissipation offset sum_i v_i max(0, sup_{|x|<=rho_i} -H_i)
  double R_e = 0;
  double rho_bar = 0;
  double beta = 0;
  double sigma = 0;         // max W over the ball of radius beta
  double level_weight = 0;  // min_i v_i
  double r_ell = 0;         // ultimate bound on |x_leader|
  double sigma_o = 0;       // max W over the ball of radius max(r_o, beta)
  double eps_ro = 0;
  double T_ell = 0;
};

struct FollowerBounds {
  double H_f = 0;
  double p_bar = 0;            // ||P A_lf||_2
  double coupling_norm = 0;    // ||A_lf^T P S^-1 P A_lf||_2
  double R_ell_guub = 0;       // bound on |x_leader| over [0, T_ell]
  double d_f = 0;
  double sigma_f = 0;
  double sigma_fo = 0;
  double level_weight = 0;     // min_i p_i
  double r_bar_o = 0;          // bound on |x_follower| over [0, T_ell]
  double beta_1 = 0;
  double sigma_1 = 0;
  double r_f = 0;              // ultimate bound on |x_follower|
  double T_f = 0;
};

struct CorollaryBounds {
  double sigma_ell = 0;
  double R_ell_gub = 0;                 // bound on |x_leader| for all t >= 0
  std::optional<double> d_f_gub;
  std::optional<double> sigma_f_gub;
  std::optional<double> R_f_gub;        // bound on |x_follower| for all t >= 0
};

struct BoundCertificate {
  CertificateParams params;
  std::size_t n_leaders = 0;
  std::size_t n_followers = 0;
  LeaderBounds leader;
  std::optional<FollowerBounds> follower;
  CorollaryBounds corollary;

  /// Time after which both ultimate bounds apply.
  double settling_time() const { return follower ? follower->T_f : leader.T_ell; }
};

LeaderBounds leader_constants(const CertificateInputs& in,
                              const Tolerances& tol = default_tolerances());

/// Requires n_f >= 1.
FollowerBounds follower_constants(const CertificateInputs& in, const LeaderBounds& leader,
                                  const Tolerances& tol = default_tolerances());

CorollaryBounds corollary_constants(const CertificateInputs& in, const LeaderBounds& leader,
                                    const std::optional<FollowerBounds>& follower,
                                    const Tolerances& tol = default_tolerances());

BoundCertificate certify(const CertificateInputs& in,
                         const Tolerances& tol = default_tolerances());

struct UniformityReport {
  bool ok = true;
  std::vector<std::string> lines;
};

/// Recomputes the certificate for gains gamma_o, 10 gamma_o, 100 gamma_o
/// (gamma_o held fixed) and for 2 r_o, checking that the ultimate bounds do
/// not move.
UniformityReport check_uniformity(const CertificateInputs& in,
                                  const Tolerances& tol = default_tolerances());

/// `key = value` document, one BoundCertificate field per line.
std::string to_key_value(const BoundCertificate& cert);
BoundCertificate parse_key_value(const std::string& text);

/// Human-readable summary with the headline bounds.
std::string to_summary(const BoundCertificate& cert);

// Building blocks shared with the tests.

/// max over |x| <= radius of -H(x), clamped below at 0.
double dissipation_deficit(const SemiPassiveNode& node, const Tolerances& tol = default_tolerances());

/// max { sum_i w_i V_i(y_i) : |y| <= radius } for storages V_i(x) = x^2:
/// max_i w_i * radius^2, cross-checked against a grid of the coordinate
/// planes. Throws std::logic_error if they disagree.
double max_weighted_storage_on_ball(std::span<const double> weights,
                                    std::span<const SemiPassiveNode> nodes, double radius,
                                    const Tolerances& tol = default_tolerances());

}  // namespace netbound
