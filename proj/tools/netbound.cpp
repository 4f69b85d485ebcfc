#include <CLI11.hpp>

#include <iostream>

#include "netbound/commands.hpp"

int main(int argc, char** argv) {
  using namespace netbound::cli;

  CLI::App app{"Boundedness certificates for diffusively coupled semi-passive networks"};
  app.require_subcommand(1);

  CommandOptions opt;
  std::uint64_t seed = 0;
  double dt = 0, horizon = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("spec", opt.spec_path, "network specification (JSON)")->required();
    sub->add_option("--out", opt.out_dir, "directory for report files");
    sub->add_option("--seed", seed, "override analysis.seed");
    sub->add_option("--dt", dt, "override analysis.dt");
    sub->add_option("--horizon", horizon, "override analysis.horizon");
  };
  auto* analyze = app.add_subcommand("analyze", "decomposition and Lyapunov weights");
  auto* certify = app.add_subcommand("certify", "evaluate every bound constant");
  auto* validate = app.add_subcommand("validate", "simulate and check the certificate");
  for (auto* sub : {analyze, certify, validate}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFailure;
  }

  for (auto* sub : {analyze, certify, validate}) {
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--dt")) opt.dt = dt;
    if (sub->count("--horizon")) opt.horizon = horizon;
  }

  if (*analyze) return cmd_analyze(opt, std::cout, std::cerr);
  if (*certify) return cmd_certify(opt, std::cout, std::cerr);
  return cmd_validate(opt, std::cout, std::cerr);
}
