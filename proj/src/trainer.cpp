#include "qsampler/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qsampler/rng.hpp"

namespace qs::train {

quantum::DensityMatrix TargetSpec::density() const {
  switch (kind) {
    case Kind::bell: return quantum::bell_state();
    case Kind::werner: return quantum::werner_state(r);
    case Kind::ghz: return quantum::ghz_state(n_qubits);
  }
  throw std::logic_error("unknown target kind");
}

std::string TargetSpec::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::bell: os << "bell"; break;
    case Kind::werner: os << "werner(" << r << ")"; break;
    case Kind::ghz: os << "ghz(" << n_qubits << ")"; break;
  }
  return os.str();
}

std::size_t TrainConfig::effective_samples() const {
  if (samples_per_epoch > 0) return samples_per_epoch;
  return target.kind == TargetSpec::Kind::ghz && target.n_qubits >= 3 ? 225000 : 125000;
}

void TrainConfig::validate() const {
  if (target.kind == TargetSpec::Kind::werner && !(target.r >= 0.0 && target.r <= 1.0)) {
    throw std::invalid_argument("werner r must lie in [0, 1]");
  }
  if (target.kind == TargetSpec::Kind::ghz && target.n_qubits < 2) {
    throw std::invalid_argument("ghz needs at least 2 qubits");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(eta_min > 0.0 && eta_min <= eta_init)) throw std::invalid_argument("need 0 < eta_min <= eta_init");
  if (!(eta_decay >= 0.0)) throw std::invalid_argument("eta_decay must be non-negative");
  if (!(step_scale > 0.0)) throw std::invalid_argument("step_scale must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
  if (eval_interval < 1) throw std::invalid_argument("eval_interval must be >= 1");
  if (checkpoint_interval < 0) throw std::invalid_argument("checkpoint_interval must be >= 0");
  if (topology.hidden_sizes.empty()) throw std::invalid_argument("topology needs hidden sizes");
}

double GradientEstimate::norm() const {
  double s = 0.0;
  for (const auto* vec : {&dW, &dd, &db}) {
    for (double g : *vec) s += g * g;
  }
  return std::sqrt(s);
}

bool GradientEstimate::finite() const {
  for (const auto* vec : {&dW, &dd, &db}) {
    for (double g : *vec) {
      if (!std::isfinite(g)) return false;
    }
  }
  return true;
}

std::vector<double> target_distribution(const TargetSpec& target, const quantum::TetrahedralPovm& povm) {
  const auto p = quantum::born_distribution(target.density(), povm);
  // The flat outcome index already equals the visible index with v_1 first.
  return {p.probs().begin(), p.probs().end()};
}

namespace {

GradientEstimate empty_gradient(const net::NetworkParams& params) {
  return {std::vector<double>(params.weights.size(), 0.0), std::vector<double>(params.d.size(), 0.0),
          std::vector<double>(params.b.size(), 0.0)};
}

void check_target(std::span<const double> p_star, int n_visible) {
  if (p_star.size() != (std::size_t{1} << n_visible)) {
    throw std::invalid_argument("target distribution size does not match the visible layer");
  }
}

}  // namespace

GradientEstimate estimate_gradient(const kernels::BatchCounts& c, std::span<const double> p_star,
                                   const net::NetworkParams& params) {
  if (c.total == 0) throw std::invalid_argument("estimate_gradient: empty batch");
  check_target(p_star, c.n_visible);
  GradientEstimate g = empty_gradient(params);
  const double inv_s = 1.0 / static_cast<double>(c.total);
  const auto n = static_cast<std::size_t>(c.n_units);
  const auto nv = static_cast<std::size_t>(c.n_visible);
  for (std::size_t v = 0; v < c.visible.size(); ++v) {
    const std::uint64_t nv_count = c.visible[v];
    if (nv_count == 0) continue;
    // Each sample with visible state v carries weight (1 - p*(v) S / N_v) / S.
    const double w = inv_s - p_star[v] / static_cast<double>(nv_count);
    const std::uint64_t* urow = c.units.data() + v * n;
    for (std::size_t u = 0; u < n; ++u) {
      const double t = w * static_cast<double>(urow[u]);
      if (u < nv) g.dd[u] += t;
      else g.db[u - nv] += t;
    }
    const std::uint64_t* erow = c.edges.data() + v * c.n_edges;
    for (std::size_t e = 0; e < c.n_edges; ++e) g.dW[e] += w * static_cast<double>(erow[e]);
  }
  return g;
}

GradientEstimate estimate_gradient(const sampling::SampleBatch& batch, std::span<const double> p_star,
                                   const net::NetworkParams& params) {
  if (batch.size() == 0) throw std::invalid_argument("estimate_gradient: empty batch");
  return estimate_gradient(kernels::omp::count_batch(batch, params.topology), p_star, params);
}

GradientEstimate exact_gradient(const sampling::ExactModel& model, std::span<const double> p_star,
                                const net::NetworkParams& params) {
  check_target(p_star, model.n_visible);
  GradientEstimate g = empty_gradient(params);
  const auto nv = static_cast<std::size_t>(model.n_visible);
  for (std::size_t v = 0; v < model.p_visible.size(); ++v) {
    const double w = model.p_visible[v] - p_star[v];
    for (int u = 0; u < model.n_units; ++u) {
      const auto uu = static_cast<std::size_t>(u);
      const double t = w * model.unit_moment(v, u);
      if (uu < nv) g.dd[uu] += t;
      else g.db[uu - nv] += t;
    }
    for (std::size_t e = 0; e < model.n_edges; ++e) g.dW[e] += w * model.edge_moment(v, e);
  }
  return g;
}

double learning_rate(int t, const TrainConfig& cfg) {
  return std::max(cfg.eta_init * std::exp(-cfg.eta_decay * t), cfg.eta_min);
}

net::NetworkParams adam_step(const net::NetworkParams& params, AdamState& state, const GradientEstimate& grad,
                             int t, const TrainConfig& cfg) {
  if (t < 1) throw std::invalid_argument("adam_step: t must be >= 1");
  const std::size_t n = params.n_parameters();
  if (grad.dW.size() + grad.dd.size() + grad.db.size() != n) {
    throw std::invalid_argument("adam_step: gradient shape does not match parameters");
  }
  if (state.m.empty()) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  }
  net::NetworkParams out = params;
  const double eta = cfg.step_scale * learning_rate(t, cfg);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  std::size_t k = 0;
  auto update = [&](std::vector<double>& theta, const std::vector<double>& g) {
    for (std::size_t i = 0; i < theta.size(); ++i, ++k) {
      state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g[i];
      state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = state.m[k] / c1;
      const double v_hat = state.v[k] / c2;
      theta[i] -= eta * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  };
  update(out.weights, grad.dW);
  update(out.d, grad.dd);
  update(out.b, grad.db);
  return out;
}

namespace {

double mean_of(const std::vector<EpochRecord>& recs, std::size_t window, double EpochRecord::*field) {
  if (recs.empty()) return std::nan("");
  const std::size_t w = std::min(window, recs.size());
  double s = 0.0;
  for (std::size_t i = recs.size() - w; i < recs.size(); ++i) s += recs[i].*field;
  return s / static_cast<double>(w);
}

}  // namespace

double TrainReport::mean_fidelity(std::size_t window) const { return mean_of(records, window, &EpochRecord::fidelity); }
double TrainReport::mean_witness(std::size_t window) const { return mean_of(records, window, &EpochRecord::bell_witness); }
double TrainReport::mean_dkl(std::size_t window) const { return mean_of(records, window, &EpochRecord::dkl); }

Metrics compute_metrics(std::span<const double> p_model, const TargetSpec& target, std::span<const double> thetas) {
  const auto& povm = quantum::tetrahedral_povm();
  const auto p_star = target_distribution(target, povm);
  if (p_model.size() != p_star.size()) throw std::invalid_argument("model distribution size does not match target");
  const int nq = target.kind == TargetSpec::Kind::ghz ? target.n_qubits : 2;
  quantum::OutcomeDistribution p(nq, {p_model.begin(), p_model.end()});
  auto rho = quantum::reconstruct_density(p, povm);
  Metrics m{quantum::dkl(p_star, p_model),
            quantum::fidelity(target.density(), rho),
            {thetas.begin(), thetas.end()},
            {},
            {p_model.begin(), p_model.end()},
            std::move(rho)};
  if (nq == 2) {
    for (double th : thetas) m.witness.push_back(quantum::bell_witness(p, th));
  }
  return m;
}

std::vector<double> sample_marginal(const net::NetworkParams& params, sampling::Backend backend, std::size_t s,
                                    const sampling::GibbsConfig& gibbs, const lif::LifConfig& lif,
                                    std::uint64_t seed) {
  const int nv = params.topology.n_visible();
  switch (backend) {
    case sampling::Backend::exact: return sampling::exact_distribution(params).p_visible;
    case sampling::Backend::gibbs:
      return sampling::empirical_marginal(sampling::gibbs_sample(params, s, gibbs, seed), nv,
                                          sampling::Marginal::visible);
    case sampling::Backend::lif: {
      const auto run = lif::lif_sample(params, lif, static_cast<double>(s) * lif.readout_dt, seed, false);
      return sampling::empirical_marginal(run.batch, nv, sampling::Marginal::visible);
    }
  }
  throw std::logic_error("unknown backend");
}

Metrics evaluate(const net::NetworkParams& params, const TargetSpec& target, const EvalOptions& opts) {
  if (opts.samples == 0 && opts.backend != sampling::Backend::exact) {
    throw std::invalid_argument("evaluate: need samples > 0");
  }
  const auto p = sample_marginal(params, opts.backend, opts.samples, opts.gibbs, opts.lif,
                                 derive_seed(opts.seed, "eval"));
  return compute_metrics(p, target, opts.thetas);
}

TrainReport train(const TrainConfig& cfg, const EpochObserver& observer) {
  cfg.validate();
  const int nq = cfg.target.kind == TargetSpec::Kind::ghz ? cfg.target.n_qubits : 2;
  const auto topo = net::build_topology(cfg.topology.kind, 2 * nq, cfg.topology.hidden_sizes);
  const auto p_star = target_distribution(cfg.target, quantum::tetrahedral_povm());
  const std::size_t s = cfg.effective_samples();

  lif::LifConfig lif_cfg = cfg.lif;
  if (cfg.backend == sampling::Backend::lif && !lif_cfg.calibration) {
    lif_cfg.calibration = lif::lif_calibrate(lif_cfg, 11, derive_seed(cfg.seed, "calibrate"));
  }

  net::NetworkParams shadow = net::init_params(topo, derive_seed(cfg.seed, "params"), cfg.init);
  auto sampler_view = [&](const net::NetworkParams& p, std::size_t& saturated) {
    if (!cfg.quantized) {
      saturated = 0;
      return p;
    }
    auto q = net::quantize(p, cfg.quant);
    saturated = q.saturated;
    return std::move(q.params);
  };
  std::size_t saturated = 0;
  net::NetworkParams active = sampler_view(shadow, saturated);

  const double pi4 = std::numbers::pi / 4.0;
  const std::vector<double> theta{pi4};
  const int ckpt_every = cfg.checkpoint_interval > 0 ? cfg.checkpoint_interval : cfg.eval_interval;

  TrainReport report{{}, active, shadow, {}};
  report.records.reserve(static_cast<std::size_t>(cfg.epochs));
  AdamState adam;
  for (int t = 1; t <= cfg.epochs; ++t) {
    GradientEstimate grad;
    std::vector<double> p_model;
    const std::uint64_t epoch_seed = derive_seed(derive_seed(cfg.seed, "sampling"), static_cast<std::uint64_t>(t));
    switch (cfg.backend) {
      case sampling::Backend::exact: {
        const auto model = sampling::exact_distribution(active);
        grad = exact_gradient(model, p_star, active);
        p_model = model.p_visible;
        break;
      }
      case sampling::Backend::gibbs: {
        const auto batch = sampling::gibbs_sample(active, s, cfg.gibbs, epoch_seed);
        const auto counts = kernels::omp::count_batch(batch, active.topology);
        grad = estimate_gradient(counts, p_star, active);
        p_model.resize(counts.visible.size());
        for (std::size_t v = 0; v < p_model.size(); ++v) {
          p_model[v] = static_cast<double>(counts.visible[v]) / static_cast<double>(counts.total);
        }
        break;
      }
      case sampling::Backend::lif: {
        const auto run = lif::lif_sample(active, lif_cfg, static_cast<double>(s) * lif_cfg.readout_dt, epoch_seed, false);
        const auto counts = kernels::omp::count_batch(run.batch, active.topology);
        grad = estimate_gradient(counts, p_star, active);
        p_model.resize(counts.visible.size());
        for (std::size_t v = 0; v < p_model.size(); ++v) {
          p_model[v] = static_cast<double>(counts.visible[v]) / static_cast<double>(counts.total);
        }
        break;
      }
    }
    if (!grad.finite()) {
      throw std::runtime_error("non-finite gradient at epoch " + std::to_string(t) + " (backend " +
                               std::string(sampling::to_string(cfg.backend)) + ")");
    }
    const auto metrics = compute_metrics(p_model, cfg.target, nq == 2 ? std::span<const double>(theta)
                                                                      : std::span<const double>());
    EpochRecord rec;
    rec.epoch = t;
    rec.dkl = metrics.dkl;
    rec.fidelity = metrics.fidelity;
    rec.bell_witness = metrics.witness.empty() ? std::nan("") : metrics.witness.front();
    rec.eta = learning_rate(t, cfg);
    rec.grad_norm = grad.norm();
    rec.saturation_count = saturated;
    rec.rho_psd = metrics.rho.psd();
    report.records.push_back(rec);
    if (observer) observer(rec, active);

    shadow = adam_step(shadow, adam, grad, t, cfg);
    active = sampler_view(shadow, saturated);
    if (t % ckpt_every == 0 || t == cfg.epochs) report.checkpoints.push_back({t, active});
  }
  report.final_params = active;
  report.shadow_params = shadow;
  return report;
}

}  // namespace qs::train
