#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netbound/certificate.hpp"
#include "netbound/digraph.hpp"
#include "netbound/errors.hpp"
#include "netbound/nodes.hpp"
#include "netbound/parallel.hpp"

namespace netbound {

/// Nodes listed in graph order (not permuted).
struct Network {
  DiGraph graph;
  std::vector<SemiPassiveNode> nodes;
};

class SimulationDiverged : public Error {
 public:
  SimulationDiverged(double time);
  double time() const { return time_; }

 private:
  double time_;
};

/// Right-hand side dx = rhs(x); dx has the size of x.
using VectorField = std::function<void(std::span<const double> x, std::span<double> dx)>;
/// Called with (t, x) at t = 0 and after every step.
using StepObserver = std::function<void(double t, std::span<const double> x)>;

/// Classical fixed-step RK4 over [0, steps * dt] with steps = ceil(horizon/dt).
/// Throws SimulationDiverged on the first non-finite state.
void integrate_rk4(const VectorField& rhs, std::span<const double> x0, double horizon,
                   double dt, const StepObserver& observer);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  double gamma = 0;
  double dt = 0;                 // integration step
  std::size_t record_stride = 1; // samples are record_stride * dt apart

  std::size_t dimension() const { return states.empty() ? 0 : states.front().size(); }
};

struct SimulationOptions {
  double gamma = 1.0;
  double horizon = 10.0;
  double dt = 1e-3;
  std::size_t record_stride = 1;
  std::size_t crosscheck_every = 100;
};

/// Largest step accepted by simulate(): 0.1 / (gamma ||L||_2).
double max_stable_step(const DiGraph& g, double gamma);

/// Integrates x' = F(x) - gamma L x. Every crosscheck_every steps the
/// node-wise coupling -gamma sum_j a_ij (x_i - x_j) is compared against the
/// matrix form (std::logic_error on mismatch). Rejects dt above
/// max_stable_step() before integrating.
void simulate_streaming(const Network& net, std::span<const double> x0,
                        const SimulationOptions& opt, const StepObserver& observer);

Trajectory simulate(const Network& net, std::span<const double> x0, const SimulationOptions& opt);

struct BoundednessMetrics {
  double sup_norm = 0;
  double tail_sup = 0;
  std::optional<double> entry_time;
};

/// Metrics of |x(t)|; the tail is the final tail_fraction of the horizon.
BoundednessMetrics measure(const Trajectory& traj, double r, double tail_fraction = 0.2);

void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

/// `count` points uniform in the ball of radius r in R^n.
std::vector<Vector> sample_ball(std::size_t n, double r, std::size_t count, std::uint64_t seed);

enum class Verdict { holds, refuted, inconclusive };
std::string_view to_string(Verdict v);

struct BoundViolation {
  std::string bound;  // "R_ell_gub", "R_f_gub", "r_ell", "r_f"
  double time = 0;
  double value = 0;
  double limit = 0;
};

struct RunResult {
  double gamma = 0;
  std::size_t index = 0;
  double dt = 0;
  double leader_sup = 0;
  double follower_sup = 0;
  double leader_tail_sup = 0;    // sup over t >= T_ell
  double follower_tail_sup = 0;  // sup over t >= T_f
  Verdict gub = Verdict::holds;
  Verdict guub = Verdict::holds;
  std::optional<BoundViolation> violation;
  std::optional<Trajectory> trajectory;
};

struct ValidationOptions {
  double horizon = 0;   // <= 0 selects 2 T_f + 10
  double dt = 1e-3;     // shrunk per gain to max_stable_step()
  Execution execution = Execution::parallel;
  std::size_t max_recorded_samples = 0;  // 0: do not keep trajectories
};

struct ValidationReport {
  std::vector<RunResult> runs;
  Verdict verdict = Verdict::holds;
  double horizon = 0;
  double required_horizon = 0;  // the GUUB phase needs horizon > settling time

  std::string to_text(const BoundCertificate& cert) const;
  std::string to_key_value() const;
};

double default_horizon(const BoundCertificate& cert);

/// Simulates every (gamma, x0) pair and checks the GUB bounds at every step
/// and the GUUB bounds after T_ell / T_f. Throws PreconditionError when a
/// gain is below gamma_o or an initial state lies outside the r_o ball.
ValidationReport validate_certificate(const BoundCertificate& cert, const Network& net,
                                      std::span<const double> gammas,
                                      std::span<const Vector> initial_states,
                                      const ValidationOptions& opt = {});

struct ConsensusReport {
  bool ok = true;
  double consensus_value = 0;       // v_o^T x_leader(0)
  double conservation_drift = 0;    // max_t |v_o^T x_leader(t) - v_o^T x_leader(0)|
  double max_Z_increase = 0;        // max over samples of Z(t_{k+1}) - Z(t_k)
  double z_lower = 0;
  double z_upper = 0;
  double sandwich_slack = 0;        // most negative slack of z_lo |x|_A^2 <= Z <= z_up |x|_A^2
  double final_error = 0;           // max_i |x_i(T) - consensus_value|
  std::optional<double> follower_decay_rate;  // fitted for x_f' = -gamma M_f x_f
  double max_Y_increase = 0;
  std::vector<std::string> lines;
};

/// Single integrators under the consensus protocol: checks the Lyapunov
/// functions Z (leaders) and Y (followers, leaders pinned at 0).
ConsensusReport linear_consensus_suite(const DiGraph& g, double gamma,
                                       std::span<const double> x0, double horizon, double dt);

}  // namespace netbound
