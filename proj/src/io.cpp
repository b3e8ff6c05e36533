#include "qsampler/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace qs::io {

namespace {

std::string key_path(std::string_view where, std::string_view key) {
  return where.empty() ? std::string(key) : std::string(where) + "." + std::string(key);
}

template <typename T>
T get_or(const json& obj, std::string_view key, T fallback, std::string_view where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key_path(where, key) + ": wrong type (" + e.what() + ")");
  }
}

template <typename T>
T get_required(const json& obj, std::string_view key, std::string_view where) {
  if (!obj.contains(key)) throw ConfigError(key_path(where, key) + ": missing required key");
  return get_or<T>(obj, key, T{}, where);
}

std::vector<double> flat_real(const quantum::CMatrix& m, bool imag) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(imag ? m(r, c).imag() : m(r, c).real());
  }
  return out;
}

}  // namespace

json parse_json_text(std::string_view text, std::string_view source_name) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    const auto pos = msg.find("; ");
    if (pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ConfigError(std::string(source_name) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": JSON syntax error: " + msg);
  }
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path.string());
}

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) {
    throw ConfigError((where.empty() ? std::string("config") : std::string(where)) + ": expected a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(key_path(where, key) + ": unknown key");
    }
  }
}

json to_json(const quantum::DensityMatrix& rho) {
  return {{"n_qubits", rho.n_qubits()},
          {"re", flat_real(rho.entries(), false)},
          {"im", flat_real(rho.entries(), true)}};
}

json to_json(const quantum::OutcomeDistribution& p) {
  return {{"n_qubits", p.n_qubits()}, {"probs", std::vector<double>(p.probs().begin(), p.probs().end())}};
}

quantum::DensityMatrix density_from_json(const json& j) {
  require_keys(j, {"n_qubits", "re", "im"}, "density");
  const int n = get_required<int>(j, "n_qubits", "density");
  const auto re = get_required<std::vector<double>>(j, "re", "density");
  const auto im = get_required<std::vector<double>>(j, "im", "density");
  if (n < 1 || n > 12) throw ConfigError("density.n_qubits out of range");
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (re.size() != static_cast<std::size_t>(dim * dim) || im.size() != re.size()) {
    throw ConfigError("density: re/im must hold 4^n_qubits entries");
  }
  quantum::CMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto k = static_cast<std::size_t>(r * dim + c);
      m(r, c) = {re[k], im[k]};
    }
  }
  return quantum::DensityMatrix::from_reconstruction(n, std::move(m));
}

quantum::OutcomeDistribution distribution_from_json(const json& j) {
  require_keys(j, {"n_qubits", "probs"}, "distribution");
  return {get_required<int>(j, "n_qubits", "distribution"),
          get_required<std::vector<double>>(j, "probs", "distribution")};
}

json to_json(const net::QuantSpec& q) {
  return {{"weight_bits", q.weight_bits},
          {"bias_bits", q.bias_bits},
          {"weight_scale", q.weight_scale},
          {"bias_scale", q.bias_scale},
          {"bias_offset", q.bias_offset}};
}

net::QuantSpec quant_from_json(const json& j) {
  require_keys(j, {"weight_bits", "bias_bits", "weight_scale", "bias_scale", "bias_offset"}, "quant");
  net::QuantSpec q;
  q.weight_bits = get_or(j, "weight_bits", q.weight_bits, "quant");
  q.bias_bits = get_or(j, "bias_bits", q.bias_bits, "quant");
  q.weight_scale = get_or(j, "weight_scale", q.weight_scale, "quant");
  q.bias_scale = get_or(j, "bias_scale", q.bias_scale, "quant");
  q.bias_offset = get_or(j, "bias_offset", q.bias_offset, "quant");
  if (q.weight_bits < 2 || q.weight_bits > 16 || q.bias_bits < 1 || q.bias_bits > 20) {
    throw ConfigError("quant: bit widths out of range");
  }
  if (!(q.weight_scale > 0.0) || !(q.bias_scale > 0.0)) throw ConfigError("quant: scales must be positive");
  return q;
}

json checkpoint_to_json(const net::NetworkParams& params, int epoch) {
  const auto& topo = params.topology;
  json weights = json::array();
  for (std::size_t e = 0; e < topo.edges().size(); ++e) {
    weights.push_back({topo.edges()[e].a, topo.edges()[e].b, params.weights[e]});
  }
  return {{"topology",
           {{"kind", std::string(net::to_string(topo.kind()))},
            {"n_visible", topo.n_visible()},
            {"hidden", topo.hidden_sizes()}}},
          {"weights", std::move(weights)},
          {"d", params.d},
          {"b", params.b},
          {"quant", params.quant ? to_json(*params.quant) : json(nullptr)},
          {"epoch", epoch}};
}

net::NetworkParams checkpoint_from_json(const json& j, int* epoch) {
  require_keys(j, {"topology", "weights", "d", "b", "quant", "epoch"}, "checkpoint");
  const json& t = j.contains("topology") ? j.at("topology") : throw ConfigError("checkpoint.topology: missing");
  require_keys(t, {"kind", "n_visible", "hidden"}, "checkpoint.topology");
  net::TopologyKind kind;
  try {
    kind = net::parse_topology_kind(get_required<std::string>(t, "kind", "checkpoint.topology"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("checkpoint.topology.kind: ") + e.what());
  }
  const int nv = get_required<int>(t, "n_visible", "checkpoint.topology");
  const auto hidden = get_required<std::vector<int>>(t, "hidden", "checkpoint.topology");
  std::optional<net::Topology> topo;
  try {
    topo = net::build_topology(kind, nv, hidden);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("checkpoint.topology: ") + e.what());
  }
  net::NetworkParams params(*topo);
  const auto w = get_required<std::vector<std::vector<double>>>(j, "weights", "checkpoint");
  if (w.size() != topo->edges().size()) {
    throw ConfigError("checkpoint.weights: expected " + std::to_string(topo->edges().size()) + " edges, got " +
                      std::to_string(w.size()));
  }
  for (std::size_t e = 0; e < w.size(); ++e) {
    const auto& edge = topo->edges()[e];
    if (w[e].size() != 3 || static_cast<int>(w[e][0]) != edge.a || static_cast<int>(w[e][1]) != edge.b) {
      throw ConfigError("checkpoint.weights[" + std::to_string(e) + "]: edge does not match topology");
    }
    params.weights[e] = w[e][2];
  }
  params.d = get_required<std::vector<double>>(j, "d", "checkpoint");
  params.b = get_required<std::vector<double>>(j, "b", "checkpoint");
  if (j.contains("quant") && !j.at("quant").is_null()) params.quant = quant_from_json(j.at("quant"));
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  if (epoch) *epoch = get_or(j, "epoch", 0, "checkpoint");
  return params;
}

void write_checkpoint(const fs::path& path, const net::NetworkParams& params, int epoch) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << checkpoint_to_json(params, epoch).dump(1) << '\n';
}

net::NetworkParams read_checkpoint(const fs::path& path, int* epoch) {
  return checkpoint_from_json(read_json_file(path), epoch);
}

void write_spike_csv(std::ostream& os, std::span<const lif::Spike> spikes) {
  os << "time_us,unit_id\n";
  os << std::setprecision(10);
  for (const auto& s : spikes) os << s.time_us << ',' << s.unit << '\n';
}

void write_batch_csv(std::ostream& os, const sampling::SampleBatch& batch) {
  for (int u = 0; u < batch.n_units(); ++u) os << (u ? "," : "") << 'z' << u;
  os << '\n';
  for (std::size_t s = 0; s < batch.size(); ++s) {
    for (int u = 0; u < batch.n_units(); ++u) os << (u ? "," : "") << (batch.unit(s, u) ? '1' : '0');
    os << '\n';
  }
}

json batch_counts_json(const sampling::SampleBatch& batch) {
  std::map<std::string, std::uint64_t> counts;
  std::string key(static_cast<std::size_t>(batch.n_units()), '0');
  for (std::size_t s = 0; s < batch.size(); ++s) {
    for (int u = 0; u < batch.n_units(); ++u) key[static_cast<std::size_t>(u)] = batch.unit(s, u) ? '1' : '0';
    ++counts[key];
  }
  return {{"n_units", batch.n_units()},
          {"backend", std::string(sampling::to_string(batch.backend()))},
          {"seed", batch.seed()},
          {"s_total", batch.size()},
          {"counts", counts}};
}

json to_json(const train::EpochRecord& rec) {
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"epoch", rec.epoch},
          {"dkl", num(rec.dkl)},
          {"fidelity", num(rec.fidelity)},
          {"bell_witness_pi_4", num(rec.bell_witness)},
          {"eta", rec.eta},
          {"grad_norm", rec.grad_norm},
          {"saturation_count", rec.saturation_count},
          {"rho_psd", rec.rho_psd}};
}

json to_json(const lif::Calibration& cal) {
  return {{"u0", cal.u0},       {"alpha", cal.alpha}, {"residual_rms", cal.residual_rms},
          {"psp_mean", cal.psp_mean}, {"leak", cal.leak}, {"p_on", cal.p_on}};
}

lif::Calibration calibration_from_json(const json& j) {
  require_keys(j, {"u0", "alpha", "residual_rms", "psp_mean", "leak", "p_on"}, "lif.calibration");
  lif::Calibration c;
  c.u0 = get_required<double>(j, "u0", "lif.calibration");
  c.alpha = get_required<double>(j, "alpha", "lif.calibration");
  c.psp_mean = get_required<double>(j, "psp_mean", "lif.calibration");
  c.residual_rms = get_or(j, "residual_rms", 0.0, "lif.calibration");
  c.leak = get_or(j, "leak", std::vector<double>{}, "lif.calibration");
  c.p_on = get_or(j, "p_on", std::vector<double>{}, "lif.calibration");
  if (!(c.alpha > 0.0) || !(c.psp_mean > 0.0)) throw ConfigError("lif.calibration: alpha and psp_mean must be positive");
  return c;
}

lif::LifConfig lif_config_from_json(const json& j) {
  constexpr std::string_view w = "lif";
  require_keys(j,
               {"tau_m", "tau_syn", "tau_ref", "threshold", "reset", "leak_base", "n_noise_exc", "n_noise_inh",
                "noise_rate", "noise_weight_exc", "noise_weight_inh", "noise_tau_syn", "readout_dt", "dt",
                "burn_in", "shared_noise", "noise_pool_size", "tau_ref_jitter", "chains", "calibration"},
               w);
  lif::LifConfig c;
  c.tau_m = get_or(j, "tau_m", c.tau_m, w);
  c.tau_syn = get_or(j, "tau_syn", c.tau_syn, w);
  c.tau_ref = get_or(j, "tau_ref", c.tau_ref, w);
  c.threshold = get_or(j, "threshold", c.threshold, w);
  c.reset = get_or(j, "reset", c.reset, w);
  c.leak_base = get_or(j, "leak_base", c.leak_base, w);
  c.n_noise_exc = get_or(j, "n_noise_exc", c.n_noise_exc, w);
  c.n_noise_inh = get_or(j, "n_noise_inh", c.n_noise_inh, w);
  c.noise_rate = get_or(j, "noise_rate", c.noise_rate, w);
  c.noise_weight_exc = get_or(j, "noise_weight_exc", c.noise_weight_exc, w);
  c.noise_weight_inh = get_or(j, "noise_weight_inh", c.noise_weight_inh, w);
  c.noise_tau_syn = get_or(j, "noise_tau_syn", c.noise_tau_syn, w);
  c.readout_dt = get_or(j, "readout_dt", c.readout_dt, w);
  c.dt = get_or(j, "dt", c.dt, w);
  c.burn_in = get_or(j, "burn_in", c.burn_in, w);
  c.shared_noise = get_or(j, "shared_noise", c.shared_noise, w);
  c.noise_pool_size = get_or(j, "noise_pool_size", c.noise_pool_size, w);
  c.tau_ref_jitter = get_or(j, "tau_ref_jitter", c.tau_ref_jitter, w);
  c.chains = get_or(j, "chains", c.chains, w);
  if (j.contains("calibration")) {
    const auto& cal = j.at("calibration");
    c.calibration = cal.is_string() ? calibration_from_json(read_json_file(cal.get<std::string>()))
                                    : calibration_from_json(cal);
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("lif: ") + e.what());
  }
  return c;
}

sampling::GibbsConfig gibbs_config_from_json(const json& j) {
  require_keys(j, {"sweeps_per_sample", "burn_in", "chains"}, "gibbs");
  sampling::GibbsConfig c;
  c.sweeps_per_sample = get_or(j, "sweeps_per_sample", c.sweeps_per_sample, "gibbs");
  c.burn_in = get_or(j, "burn_in", c.burn_in, "gibbs");
  c.chains = get_or(j, "chains", c.chains, "gibbs");
  if (c.sweeps_per_sample < 1 || c.burn_in < 0 || c.chains < 1) throw ConfigError("gibbs: values out of range");
  return c;
}

train::TargetSpec target_from_json(const json& j) {
  if (j.is_string()) return target_from_json(json{{"kind", j}});
  require_keys(j, {"kind", "r", "n"}, "target");
  const auto kind = get_required<std::string>(j, "kind", "target");
  if (kind == "bell") {
    if (j.contains("r") || j.contains("n")) throw ConfigError("target: bell takes no parameters");
    return train::TargetSpec::bell();
  }
  if (kind == "werner") {
    const double r = get_required<double>(j, "r", "target");
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("target.r: must lie in [0, 1]");
    return train::TargetSpec::werner(r);
  }
  if (kind == "ghz") {
    const int n = get_required<int>(j, "n", "target");
    if (n < 2 || n > 6) throw ConfigError("target.n: must lie in [2, 6]");
    return train::TargetSpec::ghz(n);
  }
  throw ConfigError("target.kind: unknown kind '" + kind + "' (expected bell, werner or ghz)");
}

train::TrainConfig train_config_from_json(const json& j) {
  require_keys(j,
               {"target", "topology", "backend", "samples_per_epoch", "epochs", "optimizer", "quantized", "quant",
                "init", "gibbs", "lif", "eval_interval", "checkpoint_interval", "seed"},
               "");
  train::TrainConfig c;
  if (!j.contains("target")) throw ConfigError("target: missing required key");
  c.target = target_from_json(j.at("target"));
  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    require_keys(t, {"kind", "hidden"}, "topology");
    try {
      c.topology.kind = net::parse_topology_kind(get_or<std::string>(t, "kind", "restricted", "topology"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("topology.kind: ") + e.what());
    }
    c.topology.hidden_sizes = get_or(t, "hidden", c.topology.hidden_sizes, "topology");
    const std::size_t want = c.topology.kind == net::TopologyKind::deep ? 2 : 1;
    if (c.topology.hidden_sizes.size() != want ||
        std::any_of(c.topology.hidden_sizes.begin(), c.topology.hidden_sizes.end(), [](int m) { return m < 1; })) {
      throw ConfigError("topology.hidden: expected " + std::to_string(want) + " positive layer size(s)");
    }
  }
  try {
    c.backend = sampling::parse_backend(get_or<std::string>(j, "backend", "gibbs", ""));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("backend: ") + e.what());
  }
  const auto s = get_or<std::int64_t>(j, "samples_per_epoch", 0, "");
  if (s < 0) throw ConfigError("samples_per_epoch: must be positive");
  c.samples_per_epoch = static_cast<std::size_t>(s);
  c.epochs = get_or(j, "epochs", c.epochs, "");
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    require_keys(o, {"eta_init", "eta_min", "eta_decay", "step_scale", "beta1", "beta2", "epsilon"}, "optimizer");
    c.eta_init = get_or(o, "eta_init", c.eta_init, "optimizer");
    c.eta_min = get_or(o, "eta_min", c.eta_min, "optimizer");
    c.eta_decay = get_or(o, "eta_decay", c.eta_decay, "optimizer");
    c.step_scale = get_or(o, "step_scale", c.step_scale, "optimizer");
    c.beta1 = get_or(o, "beta1", c.beta1, "optimizer");
    c.beta2 = get_or(o, "beta2", c.beta2, "optimizer");
    c.epsilon = get_or(o, "epsilon", c.epsilon, "optimizer");
  }
  c.quantized = get_or(j, "quantized", c.quantized, "");
  if (j.contains("quant")) c.quant = quant_from_json(j.at("quant"));
  if (j.contains("init")) {
    const auto& in = j.at("init");
    require_keys(in, {"scheme", "epsilon"}, "init");
    const auto scheme = get_or<std::string>(in, "scheme", "uniform", "init");
    if (scheme == "zero") c.init.kind = net::InitScheme::Kind::zero;
    else if (scheme == "uniform") c.init.kind = net::InitScheme::Kind::uniform;
    else throw ConfigError("init.scheme: expected zero or uniform");
    c.init.epsilon = get_or(in, "epsilon", c.init.epsilon, "init");
  }
  if (j.contains("gibbs")) c.gibbs = gibbs_config_from_json(j.at("gibbs"));
  if (j.contains("lif")) c.lif = lif_config_from_json(j.at("lif"));
  c.eval_interval = get_or(j, "eval_interval", c.eval_interval, "");
  c.checkpoint_interval = get_or(j, "checkpoint_interval", c.checkpoint_interval, "");
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

void write_bench_header(std::ostream& os) { os << "n_spins,m_hidden,s,measured_s,modeled_s,hardware_s\n"; }

void write_bench_row(std::ostream& os, const bench::BenchResult& r, const bench::CostModel& model) {
  os << std::setprecision(9) << r.n_spins << ',' << r.m_hidden << ',' << r.s_samples << ',' << r.measured_seconds
     << ',' << r.modeled_seconds << ',';
  if (2 * r.n_spins + r.m_hidden <= model.hardware_capacity) {
    os << bench::hardware_seconds(r.n_spins, r.m_hidden, r.s_samples, model);
  }
  os << '\n';
}

}  // namespace qs::io
