#include "netbound/commands.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "netbound/certificate.hpp"
#include "netbound/matrixlab.hpp"
#include "netbound/network_spec.hpp"
#include "netbound/simulator.hpp"

namespace netbound::cli {
namespace {

namespace fs = std::filesystem;

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_file(const std::string& dir, const std::string& name, const std::string& body) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name);
  if (!out) throw PreconditionError("cannot write '" + (fs::path(dir) / name).string() + "'");
  out << body;
}

NetworkSpec load_with_overrides(const CommandOptions& opt) {
  NetworkSpec spec = load_network_spec(opt.spec_path);
  if (opt.seed) spec.analysis.seed = *opt.seed;
  if (opt.dt) {
    if (!(*opt.dt > 0.0)) throw PreconditionError("--dt must be positive");
    spec.analysis.dt = *opt.dt;
  }
  if (opt.horizon) {
    if (!(*opt.horizon > 0.0)) throw PreconditionError("--horizon must be positive");
    spec.analysis.horizon = *opt.horizon;
  }
  return spec;
}

std::string one_based(const std::vector<std::size_t>& idx) {
  std::string s = "{";
  for (std::size_t k = 0; k < idx.size(); ++k) s += (k ? ", " : "") + std::to_string(idx[k] + 1);
  return s + "}";
}

std::string vector_text(const Vector& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? ", " : "") << v[k];
  os << ")";
  return os.str();
}

std::string analysis_text(const Network& net) {
  const LaplacianDecomposition dec = decompose(net.graph);
  const LeaderLyapunovData lead = leader_lyapunov(dec.L_leader);
  std::ostringstream os;
  os << "Network: " << net.graph.size() << " nodes, connectivity "
     << to_string(check_connectivity(net.graph)) << "\n";
  os << "  leaders   " << one_based(dec.leaders) << "\n";
  os << "  followers " << one_based(dec.followers) << "\n";
  os << "  permutation (new position -> node) " << one_based(dec.permutation) << "\n";
  os << "  n_leaders = " << dec.n_leaders() << ", n_followers = " << dec.n_followers() << "\n\n";
  os << "L_leader =\n" << dec.L_leader;
  os << "v_o = " << vector_text(lead.v) << "\n";
  os << "lambda_2(Q_o) = " << lead.lambda2_Q
     << (dec.n_leaders() == 1 ? "  (single leader, no disagreement)" : "") << "\n";
  if (dec.n_followers() > 0) {
    const FollowerLyapunovData fol = follower_lyapunov(dec.M_f);
    os << "\nA_lf =\n" << dec.A_lf;
    os << "M_f =\n" << dec.M_f;
    os << "P = diag" << vector_text(fol.P.diagonal_entries()) << "\n";
    os << "lambda_1(S) = " << fol.lambda1_S << "\n";
  } else {
    os << "\nno followers\n";
  }
  return os.str();
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

BoundCertificate certify_spec(const NetworkSpec& spec, const Network& net) {
  return certify(make_certificate_inputs(net.graph, net.nodes, certificate_params(spec)));
}

std::string gnuplot_script(const ValidationReport& rep, const BoundCertificate& cert,
                           std::size_t n) {
  std::ostringstream os;
  os << "# gnuplot script: state norms against the certified bounds\n";
  os << "set xlabel 't'\nset ylabel 'x_i(t)'\nset key outside\n";
  os << "R_ell_gub = " << shortest(cert.corollary.R_ell_gub) << "\n";
  os << "r_ell = " << shortest(cert.leader.r_ell) << "\n";
  if (cert.follower) {
    os << "R_f_gub = " << shortest(*cert.corollary.R_f_gub) << "\n";
    os << "r_f = " << shortest(cert.follower->r_f) << "\n";
  }
  for (const RunResult& r : rep.runs) {
    const std::string file = "traj_" + shortest(r.gamma) + "_" + std::to_string(r.index) + ".csv";
    os << "set title 'gamma = " << shortest(r.gamma) << ", run " << r.index << "'\n";
    os << "plot ";
    for (std::size_t i = 0; i < n; ++i)
      os << (i ? ", " : "") << "'" << file << "' using 1:" << i + 2
         << " with lines title 'x" << i + 1 << "' noenhanced";
    os << ", R_ell_gub with lines dt 2 title 'R_ell_gub' noenhanced";
    os << "\npause -1\n";
  }
  return os.str();
}

}  // namespace

int cmd_analyze(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkSpec spec = load_with_overrides(opt);
    const Network net = build_network(spec);
    const ConnectivityVerdict verdict = check_connectivity(net.graph);
    if (verdict != ConnectivityVerdict::ok) {
      err << "error: graph has no directed spanning tree: " << to_string(verdict) << "\n";
      return kExitFailure;
    }
    const std::string text = analysis_text(net);
    out << text;
    write_file(opt.out_dir, "analysis.txt", text);
    return kExitOk;
  });
}

int cmd_certify(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkSpec spec = load_with_overrides(opt);
    const Network net = build_network(spec);
    const BoundCertificate cert = certify_spec(spec, net);
    const std::string summary = to_summary(cert);
    out << summary;
    write_file(opt.out_dir, "certificate.txt", summary);
    write_file(opt.out_dir, "certificate.kv", to_key_value(cert));
    return kExitOk;
  });
}

int cmd_validate(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const NetworkSpec spec = load_with_overrides(opt);
    const Network net = build_network(spec);
    const BoundCertificate cert = certify_spec(spec, net);
    const std::size_t n = net.graph.size();
    const auto x0s = sample_ball(n, spec.analysis.r_o, spec.analysis.num_initial_conditions,
                                 spec.analysis.seed);
    ValidationOptions vo;
    vo.horizon = spec.analysis.horizon.value_or(0.0);
    vo.dt = spec.analysis.dt;
    vo.max_recorded_samples = opt.out_dir.empty() ? 0 : 2000;
    const ValidationReport rep =
        validate_certificate(cert, net, spec.analysis.gamma_list, x0s, vo);

    const std::string text = to_summary(cert) + "\n" + rep.to_text(cert);
    out << text;
    write_file(opt.out_dir, "certificate.txt", to_summary(cert));
    write_file(opt.out_dir, "certificate.kv", to_key_value(cert));
    write_file(opt.out_dir, "report.txt", text);
    write_file(opt.out_dir, "report.kv", rep.to_key_value());
    if (!opt.out_dir.empty()) {
      for (const RunResult& r : rep.runs) {
        if (!r.trajectory) continue;
        std::ostringstream csv;
        write_trajectory_csv(*r.trajectory, csv);
        write_file(opt.out_dir,
                   "traj_" + shortest(r.gamma) + "_" + std::to_string(r.index) + ".csv",
                   csv.str());
      }
      write_file(opt.out_dir, "plot.gp", gnuplot_script(rep, cert, n));
    }
    if (rep.verdict == Verdict::refuted) {
      err << "certificate refuted\n";
      return kExitRefuted;
    }
    return kExitOk;
  });
}

}  // namespace netbound::cli
