// Serial vs OpenMP kernels: wall time and bitwise agreement.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "qsampler/kernels.hpp"
#include "qsampler/rng.hpp"
#include "qsampler/samplers.hpp"
#include "qsampler/topology.hpp"

using namespace qs;

namespace {

template <typename F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

net::NetworkParams random_net(int nv, int m, std::uint64_t seed) {
  auto p = net::init_params(net::build_topology(net::TopologyKind::restricted, nv, {m}), seed,
                            {net::InitScheme::Kind::uniform, 0.5});
  Rng rng(seed);
  for (double& x : p.d) x = uniform01(rng) - 0.5;
  for (double& x : p.b) x = uniform01(rng) - 0.5;
  return p;
}

void row(const char* name, double ts, double tp, bool same) {
  std::printf("%-14s %10.4f %10.4f %8.2fx  %s\n", name, ts, tp, ts / tp, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t s = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 200000;
  const auto params = random_net(8, 64, 7);
  const auto csr = kernels::CsrNet::from(params);
  sampling::GibbsConfig cfg;
  cfg.chains = 8;
  const auto plans = kernels::plan_chains(s, cfg.chains, 11);
  const int words = (params.topology.n_units() + 63) / 64;

  std::printf("threads: %d, samples: %zu, units: %d\n", kernels::omp::max_threads(), s, params.topology.n_units());
  std::printf("%-14s %10s %10s %9s\n", "kernel", "serial_s", "omp_s", "speedup");

  std::vector<std::uint64_t> a(s * static_cast<std::size_t>(words)), b(a.size());
  const double g1 = seconds([&] { kernels::serial::gibbs_chains(csr, plans, cfg, words, a.data()); });
  const double g2 = seconds([&] { kernels::omp::gibbs_chains(csr, plans, cfg, words, b.data()); });
  row("gibbs_chains", g1, g2, a == b);

  sampling::SampleBatch batch(params.topology.n_units(), sampling::Backend::gibbs, 11);
  batch.words() = a;
  batch.set_size(s);
  kernels::BatchCounts c1, c2;
  const double k1 = seconds([&] { c1 = kernels::serial::count_batch(batch, params.topology); });
  const double k2 = seconds([&] { c2 = kernels::omp::count_batch(batch, params.topology); });
  row("count_batch", k1, k2, c1.visible == c2.visible && c1.units == c2.units && c1.edges == c2.edges);

  const auto big = random_net(16, 128, 5);
  kernels::LayeredNet layered;
  kernels::LayeredNet::build(big, layered);
  const std::size_t states = std::size_t{1} << layered.n_visible;
  std::vector<double> u1(states * static_cast<std::size_t>(layered.n_units())), u2(u1.size());
  std::vector<double> e1(states * layered.edges.size()), e2(e1.size());
  std::vector<double> l1, l2;
  const double x1 = seconds([&] { l1 = kernels::serial::exact_layered(layered, u1, e1); });
  const double x2 = seconds([&] { l2 = kernels::omp::exact_layered(layered, u2, e2); });
  row("exact_layered", x1, x2, l1 == l2 && u1 == u2 && e1 == e2);
  return 0;
}
