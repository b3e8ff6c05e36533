#include "qsampler/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qsampler/rng.hpp"
#include "qsampler/samplers.hpp"

namespace qs::bench {

void CostModel::validate() const {
  if (!(clock_hz > 0.0)) throw std::invalid_argument("clock_hz must be set to a positive value");
  if (!(ops_per_flop > 0.0)) throw std::invalid_argument("ops_per_flop must be positive");
  if (!(hardware_sample_time_s > 0.0)) throw std::invalid_argument("hardware sample time must be positive");
}

namespace {

void check_sizes(int n_spins, int m_hidden) {
  if (n_spins < 1 || m_hidden < 1) throw std::invalid_argument("need n_spins >= 1 and m_hidden >= 1");
}

}  // namespace

std::uint64_t ops_per_state(int n_spins, int m_hidden) {
  check_sizes(n_spins, m_hidden);
  const auto nv = static_cast<std::uint64_t>(2 * n_spins);
  const auto m = static_cast<std::uint64_t>(m_hidden);
  return 2 * nv * m + 2 * (nv + m);
}

double model_seconds(int n_spins, int m_hidden, std::size_t s, const CostModel& model) {
  model.validate();
  return static_cast<double>(s) * static_cast<double>(ops_per_state(n_spins, m_hidden)) * model.ops_per_flop /
         model.clock_hz;
}

double hardware_seconds(int n_spins, int m_hidden, std::size_t s, const CostModel& model) {
  model.validate();
  check_sizes(n_spins, m_hidden);
  if (s == 0) throw std::invalid_argument("hardware_seconds: need s > 0");
  if (2 * n_spins + m_hidden > model.hardware_capacity) {
    throw std::length_error("network of " + std::to_string(2 * n_spins + m_hidden) +
                            " neurons exceeds the " + std::to_string(model.hardware_capacity) +
                            "-neuron hardware capacity");
  }
  return static_cast<double>(s) * model.hardware_sample_time_s;
}

BenchResult measure_throughput(int n_spins, int m_hidden, std::size_t s, std::uint64_t seed,
                               const CostModel& model, net::TopologyKind kind) {
  check_sizes(n_spins, m_hidden);
  if (s < 10000) throw std::invalid_argument("measure_throughput: need s >= 1e4 to amortize setup");
  std::vector<int> hidden{m_hidden};
  if (kind == net::TopologyKind::deep) hidden.push_back(m_hidden);
  const auto topo = net::build_topology(kind, 2 * n_spins, hidden);
  auto params = net::init_params(topo, seed, {net::InitScheme::Kind::uniform, 0.5});
  Rng rng(derive_seed(seed, "bench-bias"));
  for (double& x : params.d) x = uniform01(rng) - 0.5;
  for (double& x : params.b) x = uniform01(rng) - 0.5;

  sampling::GibbsConfig cfg;
  cfg.chains = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const auto batch = sampling::gibbs_sample(params, s, cfg, derive_seed(seed, "bench"));
  const auto t1 = std::chrono::steady_clock::now();
  BenchResult r;
  r.n_spins = n_spins;
  r.m_hidden = m_hidden;
  r.s_samples = batch.size();
  r.measured_seconds = std::chrono::duration<double>(t1 - t0).count();
  r.modeled_seconds = model_seconds(n_spins, m_hidden, s, model);
  r.samples_per_second = static_cast<double>(s) / r.measured_seconds;
  return r;
}

std::optional<int> crossover(int n_spins, const CostModel& model, std::size_t s) {
  model.validate();
  for (int m = 1; 2 * n_spins + m <= model.hardware_capacity; ++m) {
    if (model_seconds(n_spins, m, s, model) > hardware_seconds(n_spins, m, s, model)) return m;
  }
  return std::nullopt;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

}  // namespace qs::bench
