#include "netbound/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "netbound/matrixlab.hpp"

namespace netbound {
namespace {

std::size_t step_count(double horizon, double dt) {
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double sub_norm(std::span<const double> x, std::span<const std::size_t> idx) {
  double s = 0.0;
  for (std::size_t i : idx) s += x[i] * x[i];
  return std::sqrt(s);
}

}  // namespace

SimulationDiverged::SimulationDiverged(double time)
    : Error("simulation diverged (non-finite state) at t = " + std::to_string(time)), time_(time) {}

void integrate_rk4(const VectorField& rhs, std::span<const double> x0, double horizon, double dt,
                   const StepObserver& observer) {
  if (!(dt > 0.0)) throw PreconditionError("integrate_rk4: dt must be positive");
  if (!(horizon >= dt)) throw PreconditionError("integrate_rk4: horizon must be at least dt");
  const std::size_t n = x0.size();
  Vector x(x0.begin(), x0.end()), tmp(n), k1(n), k2(n), k3(n), k4(n);
  const double h2 = dt / 2.0, h6 = dt / 6.0;
  observer(0.0, x);
  const std::size_t steps = step_count(horizon, dt);
  for (std::size_t k = 0; k < steps; ++k) {
    rhs(x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h2 * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h2 * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    rhs(tmp, k4);
    const double t = static_cast<double>(k + 1) * dt;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(x[i])) throw SimulationDiverged(t);
    }
    observer(t, x);
  }
}

double max_stable_step(const DiGraph& g, double gamma) {
  const double norm = spectral_norm(build_laplacian(g));
  if (norm == 0.0) return std::numeric_limits<double>::infinity();
  return 0.1 / (gamma * norm);
}

void simulate_streaming(const Network& net, std::span<const double> x0,
                        const SimulationOptions& opt, const StepObserver& observer) {
  const std::size_t n = net.graph.size();
  if (net.nodes.size() != n) throw PreconditionError("simulate: node count differs from graph");
  if (x0.size() != n) throw PreconditionError("simulate: initial state has wrong dimension");
  if (!(opt.gamma > 0.0)) throw PreconditionError("simulate: gamma must be positive");
  if (!(opt.dt > 0.0)) throw PreconditionError("simulate: dt must be positive");
  if (!(opt.horizon >= opt.dt)) throw PreconditionError("simulate: horizon must be at least dt");
  const double limit = max_stable_step(net.graph, opt.gamma);
  if (opt.dt > limit * (1.0 + 1e-12))
    throw PreconditionError("simulate: dt = " + fmt(opt.dt) + " exceeds the stability limit " +
                            fmt(limit) + " = 0.1 / (gamma ||L||)");

  const DenseMatrix lap = build_laplacian(net.graph);
  std::vector<std::vector<std::size_t>> in_nb(n);
  for (std::size_t i = 0; i < n; ++i) in_nb[i] = net.graph.in_neighbors(i);
  const double gamma = opt.gamma;
  Vector lx(n);

  const VectorField rhs = [&](std::span<const double> x, std::span<double> dx) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      const auto row = lap.row(i);
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
      dx[i] = net.nodes[i].f(x[i]) - gamma * acc;
    }
  };

  std::size_t step = 0;
  const std::size_t every = std::max<std::size_t>(1, opt.crosscheck_every);
  integrate_rk4(rhs, x0, opt.horizon, opt.dt, [&](double t, std::span<const double> x) {
    if (step++ % every == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        double matrix_form = 0.0, node_form = 0.0, scale = 1.0;
        const auto row = lap.row(i);
        for (std::size_t j = 0; j < n; ++j) matrix_form += row[j] * x[j];
        for (std::size_t j : in_nb[i]) {
          node_form += net.graph.weight(i, j) * (x[i] - x[j]);
          scale += net.graph.weight(i, j) * (std::abs(x[i]) + std::abs(x[j]));
        }
        if (std::abs(matrix_form - node_form) > 1e-12 * scale)
          throw std::logic_error("simulate: node-wise coupling disagrees with L x at t = " +
                                 fmt(t));
      }
    }
    observer(t, x);
  });
}

Trajectory simulate(const Network& net, std::span<const double> x0, const SimulationOptions& opt) {
  Trajectory traj;
  traj.gamma = opt.gamma;
  traj.dt = opt.dt;
  traj.record_stride = std::max<std::size_t>(1, opt.record_stride);
  std::size_t step = 0;
  simulate_streaming(net, x0, opt, [&](double t, std::span<const double> x) {
    if (step++ % traj.record_stride == 0) {
      traj.times.push_back(t);
      traj.states.emplace_back(x.begin(), x.end());
    }
  });
  return traj;
}

BoundednessMetrics measure(const Trajectory& traj, double r, double tail_fraction) {
  if (traj.times.empty()) throw PreconditionError("measure: empty trajectory");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw PreconditionError("measure: tail fraction must be in (0, 1]");
  const std::size_t m = traj.times.size();
  Vector norms(m);
  for (std::size_t k = 0; k < m; ++k) norms[k] = euclidean_norm(traj.states[k]);

  BoundednessMetrics out;
  const double t0 = traj.times.front(), t1 = traj.times.back();
  const double tail_start = t1 - tail_fraction * (t1 - t0);
  for (std::size_t k = 0; k < m; ++k) {
    out.sup_norm = std::max(out.sup_norm, norms[k]);
    if (traj.times[k] >= tail_start) out.tail_sup = std::max(out.tail_sup, norms[k]);
  }
  if (norms.back() <= r) {
    std::size_t k = m - 1;
    while (k > 0 && norms[k - 1] <= r) --k;
    out.entry_time = traj.times[k];
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "t";
  for (std::size_t i = 0; i < traj.dimension(); ++i) os << ",x" << (i + 1);
  os << "\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << fmt(traj.times[k]);
    for (double v : traj.states[k]) os << "," << fmt(v);
    os << "\n";
  }
}

std::vector<Vector> sample_ball(std::size_t n, double r, std::size_t count, std::uint64_t seed) {
  if (n == 0 || !(r >= 0.0)) throw PreconditionError("sample_ball: bad dimension or radius");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  std::vector<Vector> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Vector x(n);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& c : x) {
        c = normal(rng);
        norm += c * c;
      }
    } while (norm == 0.0);
    const double radius = r * std::pow(unit(rng), 1.0 / static_cast<double>(n)) / std::sqrt(norm);
    for (double& c : x) c *= radius;
    pts.push_back(std::move(x));
  }
  return pts;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::holds:
      return "holds";
    case Verdict::refuted:
      return "refuted";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

double default_horizon(const BoundCertificate& cert) { return 2.0 * cert.settling_time() + 10.0; }

ValidationReport validate_certificate(const BoundCertificate& cert, const Network& net,
                                      std::span<const double> gammas,
                                      std::span<const Vector> initial_states,
                                      const ValidationOptions& opt) {
  const std::size_t n = net.graph.size();
  if (cert.n_leaders + cert.n_followers != n)
    throw PreconditionError("validate_certificate: certificate does not match the network size");
  for (double g : gammas)
    if (!(g >= cert.params.gamma_o))
      throw PreconditionError("validate_certificate: gamma = " + fmt(g) + " is below gamma_o = " +
                              fmt(cert.params.gamma_o));
  for (const Vector& x0 : initial_states) {
    if (x0.size() != n) throw PreconditionError("validate_certificate: initial state dimension");
    if (euclidean_norm(x0) > cert.params.r_o * (1.0 + 1e-12))
      throw PreconditionError("validate_certificate: |x0| = " + fmt(euclidean_norm(x0)) +
                              " exceeds r_o = " + fmt(cert.params.r_o));
  }
  if (!(opt.dt > 0.0)) throw PreconditionError("validate_certificate: dt must be positive");

  const LaplacianDecomposition dec = decompose(net.graph);
  if (dec.n_leaders() != cert.n_leaders)
    throw PreconditionError("validate_certificate: leader count differs from the certificate");

  ValidationReport rep;
  rep.horizon = opt.horizon > 0.0 ? opt.horizon : default_horizon(cert);
  rep.required_horizon = cert.settling_time();

  const double T_ell = cert.leader.T_ell;
  const double r_ell = cert.leader.r_ell;
  const double R_ell = cert.corollary.R_ell_gub;
  const bool has_f = cert.follower.has_value();
  const double T_f = has_f ? cert.follower->T_f : 0.0;
  const double r_f = has_f ? cert.follower->r_f : 0.0;
  const double R_f = has_f ? *cert.corollary.R_f_gub : 0.0;

  rep.runs.resize(gammas.size() * initial_states.size());
  for_each_index(rep.runs.size(), opt.execution, [&](std::size_t job) {
    RunResult& run = rep.runs[job];
    run.gamma = gammas[job / initial_states.size()];
    run.index = job % initial_states.size();
    run.dt = std::min(opt.dt, max_stable_step(net.graph, run.gamma));
    const Vector& x0 = initial_states[run.index];

    std::size_t stride = 0;
    if (opt.max_recorded_samples > 0) {
      const std::size_t steps = step_count(rep.horizon, run.dt);
      stride = std::max<std::size_t>(1, (steps + opt.max_recorded_samples - 1) /
                                            opt.max_recorded_samples);
      run.trajectory.emplace();
      run.trajectory->gamma = run.gamma;
      run.trajectory->dt = run.dt;
      run.trajectory->record_stride = stride;
    }
    auto violate = [&](const char* bound, double t, double value, double limit) {
      if (!run.violation) run.violation = BoundViolation{bound, t, value, limit};
    };

    SimulationOptions so;
    so.gamma = run.gamma;
    so.horizon = rep.horizon;
    so.dt = run.dt;
    std::size_t step = 0;
    try {
      simulate_streaming(net, x0, so, [&](double t, std::span<const double> x) {
        if (stride && step % stride == 0) {
          run.trajectory->times.push_back(t);
          run.trajectory->states.emplace_back(x.begin(), x.end());
        }
        ++step;
        const double xl = sub_norm(x, dec.leaders);
        const double xf = sub_norm(x, dec.followers);
        run.leader_sup = std::max(run.leader_sup, xl);
        run.follower_sup = std::max(run.follower_sup, xf);
        if (xl > R_ell) {
          run.gub = Verdict::refuted;
          violate("R_ell_gub", t, xl, R_ell);
        }
        if (has_f && xf > R_f) {
          run.gub = Verdict::refuted;
          violate("R_f_gub", t, xf, R_f);
        }
        if (t >= T_ell) {
          run.leader_tail_sup = std::max(run.leader_tail_sup, xl);
          if (xl > r_ell) {
            run.guub = Verdict::refuted;
            violate("r_ell", t, xl, r_ell);
          }
        }
        if (has_f && t >= T_f) {
          run.follower_tail_sup = std::max(run.follower_tail_sup, xf);
          if (xf > r_f) {
            run.guub = Verdict::refuted;
            violate("r_f", t, xf, r_f);
          }
        }
      });
    } catch (const SimulationDiverged& e) {
      run.gub = run.guub = Verdict::refuted;
      violate("divergence", e.time(), std::numeric_limits<double>::infinity(), R_ell);
    }
    if (run.guub != Verdict::refuted && rep.horizon <= rep.required_horizon)
      run.guub = Verdict::inconclusive;
  });

  for (const auto& run : rep.runs) {
    if (run.gub == Verdict::refuted || run.guub == Verdict::refuted)
      rep.verdict = Verdict::refuted;
    else if (run.guub == Verdict::inconclusive && rep.verdict == Verdict::holds)
      rep.verdict = Verdict::inconclusive;
  }
  return rep;
}

std::string ValidationReport::to_text(const BoundCertificate& cert) const {
  std::ostringstream os;
  os << "Certificate validation: " << to_string(verdict) << "\n";
  os << "  horizon = " << horizon << "   settling time (T_f or T_ell) = " << required_horizon
     << "\n";
  if (verdict == Verdict::inconclusive)
    os << "  ultimate-bound phase not observed: horizon must exceed " << required_horizon << "\n";
  os << "  bounds: R_ell_gub = " << cert.corollary.R_ell_gub << ", r_ell = " << cert.leader.r_ell;
  if (cert.follower)
    os << ", R_f_gub = " << *cert.corollary.R_f_gub << ", r_f = " << cert.follower->r_f;
  os << "\n\n";
  os << "  margins = certified bound - empirical sup\n";
  os << std::setw(10) << "gamma" << std::setw(5) << "k" << std::setw(11) << "dt"
     << std::setw(13) << "sup|x_l|" << std::setw(13) << "R_ell margin" << std::setw(13)
     << "tail|x_l|" << std::setw(13) << "r_ell margin";
  if (cert.follower)
    os << std::setw(13) << "sup|x_f|" << std::setw(13) << "R_f margin" << std::setw(13)
       << "tail|x_f|" << std::setw(13) << "r_f margin";
  os << "  verdict\n";
  os << std::setprecision(5);
  for (const auto& r : runs) {
    os << std::setw(10) << r.gamma << std::setw(5) << r.index << std::setw(11) << r.dt
       << std::setw(13) << r.leader_sup << std::setw(13) << cert.corollary.R_ell_gub - r.leader_sup
       << std::setw(13) << r.leader_tail_sup << std::setw(13) << cert.leader.r_ell - r.leader_tail_sup;
    if (cert.follower)
      os << std::setw(13) << r.follower_sup << std::setw(13)
         << *cert.corollary.R_f_gub - r.follower_sup << std::setw(13) << r.follower_tail_sup
         << std::setw(13) << cert.follower->r_f - r.follower_tail_sup;
    const Verdict v = (r.gub == Verdict::refuted || r.guub == Verdict::refuted) ? Verdict::refuted
                                                                                : r.guub;
    os << "  " << to_string(v);
    if (r.violation)
      os << " (" << r.violation->bound << " at t = " << r.violation->time << ": "
         << r.violation->value << " > " << r.violation->limit << ")";
    os << "\n";
  }
  return os.str();
}

std::string ValidationReport::to_key_value() const {
  std::ostringstream os;
  os << "# certificate validation\n";
  os << "verdict = " << to_string(verdict) << "\n";
  os << "horizon = " << fmt(horizon) << "\n";
  os << "required_horizon = " << fmt(required_horizon) << "\n";
  os << "runs = " << runs.size() << "\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    const std::string p = "run." + std::to_string(i) + ".";
    os << p << "gamma = " << fmt(r.gamma) << "\n";
    os << p << "index = " << r.index << "\n";
    os << p << "dt = " << fmt(r.dt) << "\n";
    os << p << "leader_sup = " << fmt(r.leader_sup) << "\n";
    os << p << "follower_sup = " << fmt(r.follower_sup) << "\n";
    os << p << "leader_tail_sup = " << fmt(r.leader_tail_sup) << "\n";
    os << p << "follower_tail_sup = " << fmt(r.follower_tail_sup) << "\n";
    os << p << "gub = " << to_string(r.gub) << "\n";
    os << p << "guub = " << to_string(r.guub) << "\n";
    if (r.violation) {
      os << p << "violation.bound = " << r.violation->bound << "\n";
      os << p << "violation.time = " << fmt(r.violation->time) << "\n";
      os << p << "violation.value = " << fmt(r.violation->value) << "\n";
    }
  }
  return os.str();
}

ConsensusReport linear_consensus_suite(const DiGraph& g, double gamma, std::span<const double> x0,
                                       double horizon, double dt) {
  const std::size_t n = g.size();
  if (x0.size() != n) throw PreconditionError("linear_consensus_suite: initial state dimension");
  const LaplacianDecomposition dec = decompose(g);
  const LeaderLyapunovData lead = leader_lyapunov(dec.L_leader);
  const std::size_t nl = dec.n_leaders(), nf = dec.n_followers();

  ConsensusReport rep;
  auto check = [&](bool ok, std::string line) {
    rep.ok = rep.ok && ok;
    rep.lines.push_back((ok ? "pass: " : "FAIL: ") + std::move(line));
  };

  // Z(x) = (x - 1 v^T x)^T V (x - 1 v^T x) = x^T K^T V K x with K = I - 1 v^T.
  DenseMatrix K = DenseMatrix::identity(nl);
  for (std::size_t i = 0; i < nl; ++i)
    for (std::size_t j = 0; j < nl; ++j) K(i, j) -= lead.v[j];
  const DenseMatrix G = K.transpose() * lead.V * K;
  if (nl > 1) {
    const Vector ev = symmetric_eigenvalues(0.5 * (G + G.transpose()));
    rep.z_lower = ev[1];
    rep.z_upper = ev.back();
  } else {
    rep.z_lower = rep.z_upper = 1.0;
  }

  Network net{g, {}};
  for (std::size_t i = 0; i < n; ++i) {
    SemiPassiveNode node;
    node.name = "integrator";
    node.f = [](double) { return 0.0; };
    net.nodes.push_back(node);
  }

  Vector xl(nl);
  auto leader_state = [&](std::span<const double> x) {
    for (std::size_t i = 0; i < nl; ++i) xl[i] = x[dec.leaders[i]];
  };
  auto Z_of = [&](double c) {
    double z = 0.0;
    for (std::size_t i = 0; i < nl; ++i) z += lead.v[i] * (xl[i] - c) * (xl[i] - c);
    return z;
  };
  leader_state(x0);
  rep.consensus_value = dot(lead.v, xl);
  double z_prev = Z_of(rep.consensus_value);
  const double z0 = z_prev;
  rep.sandwich_slack = std::numeric_limits<double>::infinity();
  Vector last(x0.begin(), x0.end());

  SimulationOptions so;
  so.gamma = gamma;
  so.horizon = horizon;
  so.dt = dt;
  simulate_streaming(net, x0, so, [&](double, std::span<const double> x) {
    leader_state(x);
    const double c = dot(lead.v, xl);
    rep.conservation_drift = std::max(rep.conservation_drift, std::abs(c - rep.consensus_value));
    const double z = Z_of(c);
    rep.max_Z_increase = std::max(rep.max_Z_increase, z - z_prev);
    z_prev = z;
    double mean = 0.0;
    for (double v : xl) mean += v;
    mean /= static_cast<double>(nl);
    double dist2 = 0.0;
    for (double v : xl) dist2 += (v - mean) * (v - mean);
    rep.sandwich_slack =
        std::min({rep.sandwich_slack, z - rep.z_lower * dist2, rep.z_upper * dist2 - z});
    last.assign(x.begin(), x.end());
  });
  for (double v : last) rep.final_error = std::max(rep.final_error, std::abs(v - rep.consensus_value));

  const double scale = std::max(1.0, euclidean_norm(x0));
  check(rep.conservation_drift <= 1e-9 * scale,
        "v_o^T x_leader conserved (drift " + fmt(rep.conservation_drift) + ")");
  check(rep.max_Z_increase <= 1e-12 * std::max(z0, 1e-300),
        "Z(x_leader) nonincreasing (largest step increase " + fmt(rep.max_Z_increase) + ")");
  check(rep.sandwich_slack >= -1e-12 * scale * scale,
        "z_lo |x|_A^2 <= Z <= z_up |x|_A^2 with z_lo = " + fmt(rep.z_lower) +
            ", z_up = " + fmt(rep.z_upper));
  check(rep.final_error <= 1e-6, "all states reach v_o^T x_leader(0) = " +
                                     fmt(rep.consensus_value) + " (error " +
                                     fmt(rep.final_error) + ")");

  if (nf > 0) {
    // Follower error system with the leaders pinned at 0: x_f' = -gamma M_f x_f.
    const FollowerLyapunovData fol = follower_lyapunov(dec.M_f);
    Vector xf0(nf);
    for (std::size_t i = 0; i < nf; ++i) xf0[i] = x0[dec.followers[i]];
    if (euclidean_norm(xf0) == 0.0) std::fill(xf0.begin(), xf0.end(), 1.0);
    const DenseMatrix& M = dec.M_f;
    const Vector p = fol.P.diagonal_entries();
    auto Y = [&](std::span<const double> x) {
      double y = 0.0;
      for (std::size_t i = 0; i < nf; ++i) y += p[i] * x[i] * x[i];
      return y;
    };
    double y_prev = Y(xf0);
    const double y0 = y_prev;
    const double norm0 = euclidean_norm(xf0);
    double st = 0, sl = 0, stt = 0, stl = 0, cnt = 0;
    const std::size_t every = std::max<std::size_t>(1, step_count(horizon, dt) / 2000);
    std::size_t step = 0;
    integrate_rk4(
        [&](std::span<const double> x, std::span<double> dx) {
          const Vector mx = M * x;
          for (std::size_t i = 0; i < nf; ++i) dx[i] = -gamma * mx[i];
        },
        xf0, horizon, dt,
        [&](double t, std::span<const double> x) {
          const double y = Y(x);
          rep.max_Y_increase = std::max(rep.max_Y_increase, y - y_prev);
          y_prev = y;
          const double nx = euclidean_norm(x);
          if (step++ % every == 0 && nx > 1e-10 * norm0) {
            const double l = std::log(nx);
            st += t;
            sl += l;
            stt += t * t;
            stl += t * l;
            cnt += 1;
          }
        });
    if (cnt >= 2) rep.follower_decay_rate = -(cnt * stl - st * sl) / (cnt * stt - st * st);
    check(rep.max_Y_increase <= 1e-12 * y0,
          "Y(x_f) nonincreasing for x_f' = -gamma M_f x_f (largest step increase " +
              fmt(rep.max_Y_increase) + ")");
    check(rep.follower_decay_rate && *rep.follower_decay_rate > 0.0,
          "fitted follower decay exponent " +
              (rep.follower_decay_rate ? fmt(*rep.follower_decay_rate) : std::string("n/a")) +
              " > 0");
  }
  return rep;
}

}  // namespace netbound
