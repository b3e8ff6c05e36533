#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qsampler/samplers.hpp"
#include "qsampler/topology.hpp"

namespace qs::lif {

/// Logistic fit of the measured activation p(z=1) against leak potential,
/// plus the resulting logical -> analog parameter map.
struct Calibration {
  std::vector<double> leak;   // swept leak potentials
  std::vector<double> p_on;   // measured fraction of readouts with z = 1
  double u0 = 0.0;            // leak potential where p = 1/2
  double alpha = 1.0;         // logistic width (potential per logical unit)
  double residual_rms = 0.0;
  /// Mean of a unit-weight PSP over one refractory window; logical weight W
  /// maps to synaptic weight alpha * W / psp_mean.
  double psp_mean = 1.0;

  double leak_for_bias(double bias) const { return u0 + alpha * bias; }
  double synaptic_weight(double w) const { return alpha * w / psp_mean; }
  double logistic(double leak_potential) const;
};

/// Times are in microseconds of model time, potentials in millivolt-like units.
struct LifConfig {
  double tau_m = 1.0;
  double tau_syn = 6.0;
  double tau_ref = 10.0;
  double threshold = -50.0;
  double reset = -50.2;
  double leak_base = -50.0;
  int n_noise_exc = 5;
  int n_noise_inh = 5;
  /// Events per microsecond per noise source.
  double noise_rate = 1.0;
  double noise_weight_exc = 0.5;
  double noise_weight_inh = 0.5;
  /// A spike resets the outgoing synaptic trace to 1 instead of adding 1, so
  /// bursts do not pile up postsynaptic current.
  bool renewing_synapses = true;
  /// Time constant of the noise synapses.
  double noise_tau_syn = 10.0;
  double readout_dt = 2.0;
  double dt = 0.1;
  double burn_in = 100.0;
  /// Draw each neuron's noise sources from a shared pool instead of private ones.
  bool shared_noise = false;
  int noise_pool_size = 32;
  /// Relative per-neuron spread of tau_ref (0 = identical neurons).
  double tau_ref_jitter = 0.0;
  /// Independent simulations whose readouts are concatenated.
  int chains = 1;
  std::optional<Calibration> calibration;

  void validate() const;
};

struct Spike {
  double time_us;
  int unit;
};

struct LifRun {
  sampling::SampleBatch batch;
  std::vector<Spike> spikes;
};

/// Simulates LIF neurons with exponential current synapses under Poisson
/// noise. A unit reads as 1 at a readout time iff it spiked within the
/// preceding tau_ref. Requires cfg.calibration.
LifRun lif_sample(const net::NetworkParams& params, const LifConfig& cfg, double duration_us,
                  std::uint64_t seed, bool keep_spikes = true);

/// Sweeps the leak potential of an isolated neuron, measures the activation
/// and fits a logistic. Throws if the RMS residual exceeds `max_residual`.
Calibration lif_calibrate(const LifConfig& cfg, int n_points, std::uint64_t seed,
                          double duration_us = 20000.0, double max_residual = 0.02);

/// Sweep range used by lif_calibrate: leak_base +- half_width.
double calibration_half_width(const LifConfig& cfg);

/// Mean over [0, tau_ref] of the current of one unit-weight synaptic event.
/// With tau_m much shorter than tau_syn the membrane follows this current.
double psp_window_mean(const LifConfig& cfg);

struct NyquistRow {
  double dt;
  double dkl;
};

/// For each readout interval, draws `s` readouts and compares the visible
/// histogram against `reference`.
std::vector<NyquistRow> nyquist_scan(const net::NetworkParams& params, const LifConfig& cfg,
                                     std::span<const double> dts, std::size_t s,
                                     std::span<const double> reference, std::uint64_t seed);

}  // namespace qs::lif
