#include <benchmark/benchmark.h>

#include <vector>

#include "netbound/certificate.hpp"
#include "netbound/simulator.hpp"

namespace {

using namespace netbound;

struct Fixture {
  Network net;
  BoundCertificate cert;
  std::vector<Vector> x0s;
};

const Fixture& demo() {
  static const Fixture fx = [] {
    const std::vector<Edge> edges{{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}};
    Network net{DiGraph(4, edges), std::vector<SemiPassiveNode>(4, builtin_node("bistable"))};
    const CertificateParams params{1.0, 5.0, 1.0};
    BoundCertificate cert = certify(make_certificate_inputs(net.graph, net.nodes, params));
    return Fixture{net, cert, sample_ball(4, 5.0, 16, 42)};
  }();
  return fx;
}

void run(benchmark::State& state, Execution exec) {
  const Fixture& fx = demo();
  const std::vector<double> gammas{1.0, 10.0};
  ValidationOptions opt;
  opt.horizon = static_cast<double>(state.range(0));
  opt.dt = 1e-3;
  opt.execution = exec;
  for (auto _ : state) {
    auto rep = validate_certificate(fx.cert, fx.net, gammas, fx.x0s, opt);
    benchmark::DoNotOptimize(rep.verdict);
  }
  state.counters["threads"] = exec == Execution::parallel ? available_threads() : 1;
}

void BM_ValidationSerial(benchmark::State& s) { run(s, Execution::serial); }
void BM_ValidationParallel(benchmark::State& s) { run(s, Execution::parallel); }

BENCHMARK(BM_ValidationSerial)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ValidationParallel)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
