#include "qsampler/lif.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "qsampler/quantum.hpp"
#include "qsampler/rng.hpp"

namespace qs::lif {
namespace {

// Everything the integrator needs, already in analog units.
struct AnalogNet {
  int n = 0;
  std::vector<double> leak;
  std::vector<int> offsets;
  std::vector<int> neighbors;
  std::vector<double> weights;
};

struct NoiseSource {
  double next = 0.0;
  double sign = 1.0;
  std::vector<int> subscribers;
};

// Simulates one chain and appends `n_readouts` rows to `batch`.
void simulate(const AnalogNet& net, const LifConfig& cfg, std::size_t n_readouts, std::uint64_t seed,
              sampling::SampleBatch& batch, std::vector<Spike>* spikes, double time_offset) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(net.n);
  const double dt = cfg.dt;
  const auto steps_of = [dt](double t) { return static_cast<std::int64_t>(std::llround(t / dt)); };
  const std::int64_t readout_steps = std::max<std::int64_t>(1, steps_of(cfg.readout_dt));
  const std::int64_t readout_window = std::max<std::int64_t>(1, steps_of(cfg.tau_ref));
  const std::int64_t burn_steps = steps_of(cfg.burn_in);
  const std::int64_t total_steps = burn_steps + static_cast<std::int64_t>(n_readouts) * readout_steps;

  std::vector<std::int64_t> ref_steps(n, readout_window);
  if (cfg.tau_ref_jitter > 0.0) {
    std::normal_distribution<double> jitter(1.0, cfg.tau_ref_jitter);
    for (auto& r : ref_steps) r = std::max<std::int64_t>(1, steps_of(cfg.tau_ref * std::max(0.1, jitter(rng))));
  }

  // Noise sources: private ones merge into one exc and one inh stream per
  // neuron; shared ones fan out to randomly chosen subscribers.
  std::vector<NoiseSource> sources;
  const double w_exc = cfg.noise_weight_exc, w_inh = cfg.noise_weight_inh;
  if (!cfg.shared_noise) {
    sources.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      sources[2 * i] = {exponential(rng, cfg.noise_rate * cfg.n_noise_exc), w_exc, {static_cast<int>(i)}};
      sources[2 * i + 1] = {exponential(rng, cfg.noise_rate * cfg.n_noise_inh), -w_inh, {static_cast<int>(i)}};
    }
  } else {
    const auto pool = static_cast<std::size_t>(cfg.noise_pool_size);
    sources.resize(2 * pool);
    for (std::size_t k = 0; k < 2 * pool; ++k) {
      sources[k].next = exponential(rng, cfg.noise_rate);
      sources[k].sign = k < pool ? w_exc : -w_inh;
    }
    std::vector<int> idx(pool);
    for (std::size_t i = 0; i < n; ++i) {
      for (int half = 0; half < 2; ++half) {
        std::iota(idx.begin(), idx.end(), 0);
        const int want = half == 0 ? cfg.n_noise_exc : cfg.n_noise_inh;
        for (int c = 0; c < want; ++c) {
          const auto pick = static_cast<std::size_t>(c) +
                            static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool - static_cast<std::size_t>(c)));
          std::swap(idx[static_cast<std::size_t>(c)], idx[pick]);
          sources[static_cast<std::size_t>(half) * pool + static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])]
              .subscribers.push_back(static_cast<int>(i));
        }
      }
    }
  }
  const double source_rate_private_exc = cfg.noise_rate * cfg.n_noise_exc;
  const double source_rate_private_inh = cfg.noise_rate * cfg.n_noise_inh;

  const double syn_decay = std::exp(-dt / cfg.tau_syn);
  const double noise_decay = std::exp(-dt / cfg.noise_tau_syn);
  const double gain = dt / cfg.tau_m;

  // Synaptic current of neuron i is sum_j w_ij trace_j; a presynaptic spike
  // sets (renewing) or increments (additive) its trace.
  std::vector<double> v(n), trace(n, 0.0), i_noise(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i] = net.leak[i];
  std::vector<std::int64_t> last_spike(n, std::numeric_limits<std::int64_t>::min() / 2);
  std::vector<int> fired;
  std::vector<std::uint8_t> z(n);

  for (std::int64_t step = 1; step <= total_steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    for (std::size_t k = 0; k < sources.size(); ++k) {
      auto& src = sources[k];
      while (src.next <= t) {
        for (int target : src.subscribers) i_noise[static_cast<std::size_t>(target)] += src.sign;
        const double rate = cfg.shared_noise ? cfg.noise_rate
                                             : (k % 2 == 0 ? source_rate_private_exc : source_rate_private_inh);
        src.next += exponential(rng, rate);
      }
    }
    fired.clear();
    for (std::size_t i = 0; i < n; ++i) trace[i] *= syn_decay;
    for (std::size_t i = 0; i < n; ++i) {
      i_noise[i] *= noise_decay;
      if (step - last_spike[i] < ref_steps[i]) {
        v[i] = cfg.reset;
        continue;
      }
      double i_syn = 0.0;
      for (int k = net.offsets[i]; k < net.offsets[i + 1]; ++k) {
        i_syn += net.weights[static_cast<std::size_t>(k)] * trace[static_cast<std::size_t>(net.neighbors[static_cast<std::size_t>(k)])];
      }
      v[i] += gain * (net.leak[i] - v[i] + i_syn + i_noise[i]);
      if (v[i] >= cfg.threshold) {
        v[i] = cfg.reset;
        last_spike[i] = step;
        fired.push_back(static_cast<int>(i));
      }
    }
    for (int src : fired) {
      const auto s = static_cast<std::size_t>(src);
      trace[s] = cfg.renewing_synapses ? 1.0 : trace[s] + 1.0;
      if (spikes) spikes->push_back({time_offset + t, src});
    }
    if (step > burn_steps && (step - burn_steps) % readout_steps == 0) {
      for (std::size_t i = 0; i < n; ++i) z[i] = step - last_spike[i] < readout_window ? 1 : 0;
      batch.append(z);
    }
  }
}

AnalogNet analog_net(const net::NetworkParams& params, const Calibration& cal) {
  params.validate();
  AnalogNet net;
  net.n = params.topology.n_units();
  const auto n = static_cast<std::size_t>(net.n);
  net.leak.resize(n);
  for (std::size_t u = 0; u < n; ++u) net.leak[u] = cal.leak_for_bias(params.bias(static_cast<int>(u)));
  std::vector<std::vector<std::pair<int, double>>> out(n);
  const auto& edges = params.topology.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (params.weights[e] == 0.0) continue;
    const double w = cal.synaptic_weight(params.weights[e]);
    out[static_cast<std::size_t>(edges[e].a)].emplace_back(edges[e].b, w);
    out[static_cast<std::size_t>(edges[e].b)].emplace_back(edges[e].a, w);
  }
  net.offsets.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) {
    net.offsets[u + 1] = net.offsets[u] + static_cast<int>(out[u].size());
    for (const auto& [t, w] : out[u]) {
      net.neighbors.push_back(t);
      net.weights.push_back(w);
    }
  }
  return net;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LogisticResidual : Eigen::DenseFunctor<double> {
  std::span<const double> u, p;
  LogisticResidual(std::span<const double> u_, std::span<const double> p_)
      : Eigen::DenseFunctor<double>(2, static_cast<int>(u_.size())), u(u_), p(p_) {}

  // x = (u0, alpha)
  int operator()(const InputType& x, ValueType& r) const {
    for (std::size_t k = 0; k < u.size(); ++k) r(static_cast<Eigen::Index>(k)) = logistic((u[k] - x(0)) / x(1)) - p[k];
    return 0;
  }
  int df(const InputType& x, JacobianType& j) const {
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double z = (u[k] - x(0)) / x(1);
      const double ds = logistic(z) * (1.0 - logistic(z));
      j(static_cast<Eigen::Index>(k), 0) = -ds / x(1);
      j(static_cast<Eigen::Index>(k), 1) = -ds * z / x(1);
    }
    return 0;
  }
};

// Fit of p = logistic((u - u0) / alpha), started from the half-crossing.
void fit_logistic(std::span<const double> u, std::span<const double> p, double& u0, double& alpha) {
  std::size_t mid = 0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    if (p[k] <= 0.5 && p[k + 1] > 0.5) mid = k;
  }
  const double du = u[mid + 1] - u[mid];
  const double dp = std::max(1e-6, p[mid + 1] - p[mid]);
  Eigen::VectorXd x(2);
  x << u[mid] + (0.5 - p[mid]) * du / dp, std::max(1e-3, du / dp / 4.0);
  LogisticResidual f(u, p);
  Eigen::LevenbergMarquardt<LogisticResidual> lm(f);
  lm.minimize(x);
  u0 = x(0);
  alpha = std::abs(x(1));
}

}  // namespace

double Calibration::logistic(double leak_potential) const {
  return lif::logistic((leak_potential - u0) / alpha);
}

void LifConfig::validate() const {
  if (!(tau_m > 0 && tau_syn > 0 && tau_ref > 0 && noise_tau_syn > 0 && dt > 0 && readout_dt > 0)) {
    throw std::invalid_argument("LIF time constants and steps must be positive");
  }
  if (dt > tau_m) throw std::invalid_argument("LIF integration step must not exceed tau_m");
  if (n_noise_exc < 0 || n_noise_inh < 0 || !(noise_rate >= 0)) {
    throw std::invalid_argument("LIF noise parameters must be non-negative");
  }
  if (shared_noise && (noise_pool_size < std::max(n_noise_exc, n_noise_inh))) {
    throw std::invalid_argument("shared noise pool smaller than per-neuron source count");
  }
  if (!(threshold > reset)) throw std::invalid_argument("LIF threshold must lie above reset");
  if (chains < 1) throw std::invalid_argument("LIF needs at least one chain");
  if (burn_in < 0) throw std::invalid_argument("LIF burn-in must be non-negative");
}

double psp_window_mean(const LifConfig& cfg) {
  return cfg.tau_syn / cfg.tau_ref * (1.0 - std::exp(-cfg.tau_ref / cfg.tau_syn));
}

double calibration_half_width(const LifConfig& cfg) {
  // Stationary spread of the free membrane under the noise current.
  const double var_i = (cfg.n_noise_exc * cfg.noise_weight_exc * cfg.noise_weight_exc +
                        cfg.n_noise_inh * cfg.noise_weight_inh * cfg.noise_weight_inh) *
                       cfg.noise_rate * cfg.noise_tau_syn / 2.0;
  const double var_v = var_i * cfg.noise_tau_syn / (cfg.noise_tau_syn + cfg.tau_m);
  return 3.5 * std::sqrt(std::max(var_v, 1e-6));
}

LifRun lif_sample(const net::NetworkParams& params, const LifConfig& cfg, double duration_us,
                  std::uint64_t seed, bool keep_spikes) {
  cfg.validate();
  if (!cfg.calibration) throw std::invalid_argument("lif_sample: configuration is not calibrated");
  if (duration_us < 10.0 * cfg.tau_ref) {
    throw std::invalid_argument("lif_sample: duration must be at least 10 tau_ref");
  }
  const AnalogNet net = analog_net(params, *cfg.calibration);
  const auto n_readouts = static_cast<std::size_t>(std::floor(duration_us / cfg.readout_dt + 1e-9));
  LifRun run{sampling::SampleBatch(net.n, sampling::Backend::lif, seed), {}};
  run.batch.reserve(n_readouts);
  const auto chains = static_cast<std::size_t>(cfg.chains);
  double offset = 0.0;
  for (std::size_t c = 0; c < chains; ++c) {
    const std::size_t share = n_readouts / chains + (c < n_readouts % chains ? 1 : 0);
    simulate(net, cfg, share, derive_seed(seed, static_cast<std::uint64_t>(c)), run.batch,
             keep_spikes ? &run.spikes : nullptr, offset);
    offset += cfg.burn_in + static_cast<double>(share) * cfg.readout_dt;
  }
  return run;
}

Calibration lif_calibrate(const LifConfig& cfg, int n_points, std::uint64_t seed, double duration_us,
                          double max_residual) {
  cfg.validate();
  if (n_points < 5) throw std::invalid_argument("lif_calibrate: need at least 5 sweep points");
  Calibration cal;
  const double hw = calibration_half_width(cfg);
  AnalogNet net;
  net.n = n_points;
  net.offsets.assign(static_cast<std::size_t>(n_points) + 1, 0);
  for (int k = 0; k < n_points; ++k) {
    net.leak.push_back(cfg.leak_base - hw + 2.0 * hw * k / (n_points - 1));
  }
  LifConfig single = cfg;
  single.shared_noise = false;
  sampling::SampleBatch batch(n_points, sampling::Backend::lif, seed);
  const auto n_readouts = static_cast<std::size_t>(duration_us / cfg.readout_dt);
  simulate(net, single, n_readouts, derive_seed(seed, "calibration"), batch, nullptr, 0.0);

  cal.leak = net.leak;
  cal.p_on.assign(static_cast<std::size_t>(n_points), 0.0);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    for (int k = 0; k < n_points; ++k) cal.p_on[static_cast<std::size_t>(k)] += batch.unit(s, k);
  }
  for (double& p : cal.p_on) p /= static_cast<double>(batch.size());

  if (cal.p_on.front() > 0.5 || cal.p_on.back() < 0.5) {
    throw std::runtime_error("lif_calibrate: activation does not cross 1/2 inside the sweep; adjust noise or leak_base");
  }
  fit_logistic(cal.leak, cal.p_on, cal.u0, cal.alpha);
  double sse = 0.0;
  for (std::size_t k = 0; k < cal.leak.size(); ++k) {
    const double r = cal.logistic(cal.leak[k]) - cal.p_on[k];
    sse += r * r;
  }
  cal.residual_rms = std::sqrt(sse / static_cast<double>(cal.leak.size()));
  cal.psp_mean = psp_window_mean(cfg);
  if (cal.residual_rms > max_residual) {
    throw std::runtime_error("lif_calibrate: logistic fit residual " + std::to_string(cal.residual_rms) +
                             " exceeds " + std::to_string(max_residual) + "; noise parameters give a non-sigmoidal activation");
  }
  return cal;
}

std::vector<NyquistRow> nyquist_scan(const net::NetworkParams& params, const LifConfig& cfg,
                                     std::span<const double> dts, std::size_t s,
                                     std::span<const double> reference, std::uint64_t seed) {
  std::vector<NyquistRow> rows;
  for (std::size_t k = 0; k < dts.size(); ++k) {
    if (!(dts[k] > 0.0)) throw std::invalid_argument("nyquist_scan: readout intervals must be positive");
    LifConfig c = cfg;
    c.readout_dt = dts[k];
    const double duration = std::max(static_cast<double>(s) * dts[k], 10.0 * cfg.tau_ref);
    const auto run = lif_sample(params, c, duration, derive_seed(seed, static_cast<std::uint64_t>(k)), false);
    const auto p_hat = sampling::empirical_marginal(run.batch, params.topology.n_visible(), sampling::Marginal::visible);
    rows.push_back({dts[k], quantum::dkl(reference, p_hat)});
  }
  return rows;
}

}  // namespace qs::lif
