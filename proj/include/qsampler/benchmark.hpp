#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qsampler/topology.hpp"

namespace qs::bench {

/// Idealized costs: one operation per clock cycle on the CPU, a fixed time
/// per sample on the neuromorphic system.
struct CostModel {
  double clock_hz = 0.0;  // must be set by the caller
  double ops_per_flop = 1.0;
  double hardware_sample_time_s = 5e-6;
  int hardware_capacity = 256;

  void validate() const;
};

struct BenchResult {
  int n_spins = 0;
  int m_hidden = 0;
  std::size_t s_samples = 0;
  double measured_seconds = 0.0;
  double modeled_seconds = 0.0;
  double samples_per_second = 0.0;
};

/// 2 (2N) M + 2 ((2N) + M): one multiply-add per weight term and per unit.
std::uint64_t ops_per_state(int n_spins, int m_hidden);

double model_seconds(int n_spins, int m_hidden, std::size_t s, const CostModel& model);

/// Throws std::length_error when (2N) + M exceeds the 256-neuron capacity.
double hardware_seconds(int n_spins, int m_hidden, std::size_t s, const CostModel& model);

/// Times gibbs_sample (single chain) on a random restricted net.
BenchResult measure_throughput(int n_spins, int m_hidden, std::size_t s, std::uint64_t seed,
                               const CostModel& model, net::TopologyKind kind = net::TopologyKind::restricted);

/// Smallest M at which the modeled CPU time exceeds the hardware time, or
/// nothing when the capacity limit is reached first.
std::optional<int> crossover(int n_spins, const CostModel& model, std::size_t s);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace qs::bench
