#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsampler/kernels.hpp"
#include "qsampler/lif.hpp"
#include "qsampler/quantum.hpp"
#include "qsampler/samplers.hpp"
#include "qsampler/topology.hpp"

namespace qs::train {

struct TargetSpec {
  enum class Kind { bell, werner, ghz };
  Kind kind = Kind::bell;
  double r = 1.0;    // werner only
  int n_qubits = 2;  // ghz only; 2 otherwise

  static TargetSpec bell() { return {}; }
  static TargetSpec werner(double r) { return {Kind::werner, r, 2}; }
  static TargetSpec ghz(int n) { return {Kind::ghz, 1.0, n}; }

  quantum::DensityMatrix density() const;
  std::string label() const;
};

struct TopologySpec {
  net::TopologyKind kind = net::TopologyKind::restricted;
  std::vector<int> hidden_sizes{20};
};

struct TrainConfig {
  TargetSpec target;
  TopologySpec topology;
  sampling::Backend backend = sampling::Backend::gibbs;
  /// 0 selects 125000, or 225000 for GHZ targets with three or more qubits.
  std::size_t samples_per_epoch = 0;
  int epochs = 1000;
  double eta_init = 1.0;
  double eta_min = 0.001;
  double eta_decay = 0.001;
  /// Logical parameter change of an Adam step at eta = 1.
  double step_scale = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool quantized = false;
  net::QuantSpec quant;
  net::InitScheme init;
  sampling::GibbsConfig gibbs;
  lif::LifConfig lif;
  /// Epochs between history records; also the checkpoint cadence when
  /// checkpoint_interval is 0.
  int eval_interval = 10;
  int checkpoint_interval = 0;
  std::uint64_t seed = 1;

  std::size_t effective_samples() const;
  void validate() const;
};

struct GradientEstimate {
  std::vector<double> dW;  // per edge
  std::vector<double> dd;  // per visible unit
  std::vector<double> db;  // per hidden unit

  double norm() const;
  bool finite() const;
};

/// p*(v) over visible configurations: the Born distribution of the target
/// with outcome a_q = 2 v_{2q} + v_{2q+1}.
std::vector<double> target_distribution(const TargetSpec& target, const quantum::TetrahedralPovm& povm);

/// Batch mean of [1 - p*(v)/p_hat(v)] s_a s_b, with p_hat the batch's own
/// visible histogram.
GradientEstimate estimate_gradient(const sampling::SampleBatch& batch, std::span<const double> p_star,
                                   const net::NetworkParams& params);
GradientEstimate estimate_gradient(const kernels::BatchCounts& counts, std::span<const double> p_star,
                                   const net::NetworkParams& params);

/// sum_v [p(v) - p*(v)] E[s_a s_b | v] from the exact model.
GradientEstimate exact_gradient(const sampling::ExactModel& model, std::span<const double> p_star,
                                const net::NetworkParams& params);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

/// eta(t) = max(eta_init * exp(-eta_decay * t), eta_min).
double learning_rate(int t, const TrainConfig& cfg);

/// One Adam update at step t >= 1, scaled by step_scale * eta(t); returns the
/// updated parameters.
net::NetworkParams adam_step(const net::NetworkParams& params, AdamState& state, const GradientEstimate& grad,
                             int t, const TrainConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  double dkl = 0.0;
  double fidelity = 0.0;
  double bell_witness = 0.0;  // B(pi/4); NaN for targets other than two qubits
  double eta = 0.0;
  double grad_norm = 0.0;
  std::size_t saturation_count = 0;
  bool rho_psd = true;
};

struct Checkpoint {
  int epoch;
  net::NetworkParams params;
};

struct TrainReport {
  std::vector<EpochRecord> records;
  /// Parameters seen by the sampler (quantized in quantized mode).
  net::NetworkParams final_params;
  /// Continuous shadow parameters; equal to final_params without quantization.
  net::NetworkParams shadow_params;
  std::vector<Checkpoint> checkpoints;

  /// Means over the last `window` records.
  double mean_fidelity(std::size_t window) const;
  double mean_witness(std::size_t window) const;
  double mean_dkl(std::size_t window) const;
};

using EpochObserver = std::function<void(const EpochRecord&, const net::NetworkParams&)>;

/// Metrics of one model distribution against a target.
struct Metrics {
  double dkl = 0.0;
  double fidelity = 0.0;
  std::vector<double> thetas;
  std::vector<double> witness;  // B(theta) per entry of thetas (two qubits only)
  std::vector<double> p_model;
  quantum::DensityMatrix rho;
};

Metrics compute_metrics(std::span<const double> p_model, const TargetSpec& target,
                        std::span<const double> thetas);

TrainReport train(const TrainConfig& cfg, const EpochObserver& observer = {});

struct EvalOptions {
  sampling::Backend backend = sampling::Backend::gibbs;
  std::size_t samples = 125000;
  std::vector<double> thetas;
  sampling::GibbsConfig gibbs;
  lif::LifConfig lif;
  std::uint64_t seed = 1;
};

/// Draws one sample set and evaluates every metric on it. The exact backend
/// uses the analytic marginal and ignores `samples`.
Metrics evaluate(const net::NetworkParams& params, const TargetSpec& target, const EvalOptions& opts);

/// Visible marginal of one draw from the chosen backend.
std::vector<double> sample_marginal(const net::NetworkParams& params, sampling::Backend backend, std::size_t s,
                                    const sampling::GibbsConfig& gibbs, const lif::LifConfig& lif,
                                    std::uint64_t seed);

}  // namespace qs::train
