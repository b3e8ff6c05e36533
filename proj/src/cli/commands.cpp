#include "qsampler/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "qsampler/benchmark.hpp"
#include "qsampler/io.hpp"
#include "qsampler/lif.hpp"
#include "qsampler/rng.hpp"
#include "qsampler/samplers.hpp"
#include "qsampler/trainer.hpp"

namespace qs::cli {

namespace {

using io::ConfigError;
using io::json;
namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::uint64_t resolve_seed(const Invocation& inv, const json& cfg) {
  if (inv.seed) return *inv.seed;
  if (!cfg.contains("seed")) return 1;
  if (!cfg.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
  return cfg.at("seed").get<std::uint64_t>();
}

template <typename T>
T value_or(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(key) + ": wrong type");
  }
}

std::vector<double> theta_grid(const json& cfg) {
  if (!cfg.contains("thetas")) {
    std::vector<double> g;
    for (int k = 0; k <= 30; ++k) g.push_back(std::numbers::pi / 2.0 * k / 30.0);
    return g;
  }
  const auto& t = cfg.at("thetas");
  if (t.is_array()) return value_or<std::vector<double>>(cfg, "thetas", {});
  io::require_keys(t, {"start", "stop", "count"}, "thetas");
  const double a = value_or<double>(t, "start", 0.0);
  const double b = value_or<double>(t, "stop", std::numbers::pi / 2.0);
  const int n = value_or<int>(t, "count", 31);
  if (n < 1) throw ConfigError("thetas.count: must be >= 1");
  std::vector<double> g;
  for (int k = 0; k < n; ++k) g.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
  return g;
}

train::TargetSpec target_for(const json& cfg, const net::NetworkParams& params) {
  const int nv = params.topology.n_visible();
  train::TargetSpec target = cfg.contains("target") ? io::target_from_json(cfg.at("target"))
                             : nv == 4             ? train::TargetSpec::bell()
                                                   : train::TargetSpec::ghz(nv / 2);
  const int nq = target.kind == train::TargetSpec::Kind::ghz ? target.n_qubits : 2;
  if (2 * nq != nv) {
    throw ConfigError("checkpoint has " + std::to_string(nv) + " visible units but target " + target.label() +
                      " needs " + std::to_string(2 * nq));
  }
  return target;
}

lif::LifConfig calibrated(lif::LifConfig cfg, std::uint64_t seed) {
  if (!cfg.calibration) cfg.calibration = lif::lif_calibrate(cfg, 11, derive_seed(seed, "calibrate"));
  return cfg;
}

}  // namespace

int cmd_train(const Invocation& inv) {
  const json raw = io::read_json_file(inv.config);
  auto cfg = io::train_config_from_json(raw);
  cfg.seed = resolve_seed(inv, raw);

  fs::create_directories(inv.out_dir / "checkpoints");
  auto history = open_out(inv.out_dir / "history.jsonl");
  const auto report = train::train(cfg, [&](const train::EpochRecord& rec, const net::NetworkParams&) {
    if (rec.epoch % cfg.eval_interval == 0 || rec.epoch == cfg.epochs) {
      history << io::to_json(rec).dump() << '\n';
      history.flush();
    }
  });
  for (const auto& ck : report.checkpoints) {
    std::ostringstream name;
    name << "epoch_" << std::setw(6) << std::setfill('0') << ck.epoch << ".json";
    io::write_checkpoint(inv.out_dir / "checkpoints" / name.str(), ck.params, ck.epoch);
  }
  io::write_checkpoint(inv.out_dir / "final.json", report.final_params, cfg.epochs);

  const std::size_t window = std::min<std::size_t>(200, report.records.size());
  const auto& last = report.records.back();
  json summary = {{"target", cfg.target.label()},
                  {"backend", std::string(sampling::to_string(cfg.backend))},
                  {"epochs", cfg.epochs},
                  {"samples_per_epoch", cfg.effective_samples()},
                  {"seed", cfg.seed},
                  {"final", io::to_json(last)},
                  {"window", window},
                  {"mean_fidelity", report.mean_fidelity(window)},
                  {"mean_dkl", report.mean_dkl(window)}};
  if (std::isfinite(last.bell_witness)) summary["mean_bell_witness_pi_4"] = report.mean_witness(window);
  open_out(inv.out_dir / "summary.json") << summary.dump(1) << '\n';
  std::cout << "trained " << cfg.target.label() << ": fidelity " << last.fidelity << ", dkl " << last.dkl << '\n';
  return ok;
}

int cmd_eval(const Invocation& inv) {
  const json raw = io::read_json_file(inv.config);
  io::require_keys(raw, {"checkpoint", "target", "backend", "samples", "thetas", "gibbs", "lif", "seed", "save_samples"}, "");
  if (!raw.contains("checkpoint")) throw ConfigError("checkpoint: missing required key");
  const auto params = io::read_checkpoint(value_or<std::string>(raw, "checkpoint", ""));
  const auto target = target_for(raw, params);
  train::EvalOptions opts;
  try {
    opts.backend = sampling::parse_backend(value_or<std::string>(raw, "backend", "gibbs"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("backend: ") + e.what());
  }
  const auto s = value_or<std::int64_t>(raw, "samples", 125000);
  if (s < 1) throw ConfigError("samples: must be >= 1");
  opts.samples = static_cast<std::size_t>(s);
  opts.thetas = theta_grid(raw);
  if (raw.contains("gibbs")) opts.gibbs = io::gibbs_config_from_json(raw.at("gibbs"));
  if (raw.contains("lif")) opts.lif = io::lif_config_from_json(raw.at("lif"));
  opts.seed = resolve_seed(inv, raw);
  const bool save_samples = value_or<bool>(raw, "save_samples", false);

  fs::create_directories(inv.out_dir);
  const int nv = params.topology.n_visible();
  const std::uint64_t draw_seed = derive_seed(opts.seed, "eval");
  std::vector<double> p;
  std::optional<sampling::SampleBatch> batch;
  switch (opts.backend) {
    case sampling::Backend::exact: p = sampling::exact_distribution(params).p_visible; break;
    case sampling::Backend::gibbs:
      batch = sampling::gibbs_sample(params, opts.samples, opts.gibbs, draw_seed);
      p = sampling::empirical_marginal(*batch, nv, sampling::Marginal::visible);
      break;
    case sampling::Backend::lif: {
      const auto lcfg = calibrated(opts.lif, opts.seed);
      auto run = lif::lif_sample(params, lcfg, static_cast<double>(opts.samples) * lcfg.readout_dt, draw_seed, true);
      auto spikes = open_out(inv.out_dir / "spikes.csv");
      io::write_spike_csv(spikes, run.spikes);
      p = sampling::empirical_marginal(run.batch, nv, sampling::Marginal::visible);
      batch = std::move(run.batch);
      break;
    }
  }
  const auto m = train::compute_metrics(p, target, opts.thetas);

  auto csv = open_out(inv.out_dir / "witness.csv");
  csv << "theta,B\n" << std::setprecision(12);
  for (std::size_t k = 0; k < m.witness.size(); ++k) csv << m.thetas[k] << ',' << m.witness[k] << '\n';
  json metrics = {{"target", target.label()},
                  {"backend", std::string(sampling::to_string(opts.backend))},
                  {"samples", opts.backend == sampling::Backend::exact ? 0 : opts.samples},
                  {"dkl", std::isfinite(m.dkl) ? json(m.dkl) : json("inf")},
                  {"fidelity", m.fidelity},
                  {"rho_psd", m.rho.psd()},
                  {"rho_N", io::to_json(m.rho)},
                  {"p_model", m.p_model}};
  open_out(inv.out_dir / "metrics.json") << metrics.dump(1) << '\n';
  if (save_samples && batch) open_out(inv.out_dir / "samples.json") << io::batch_counts_json(*batch).dump() << '\n';
  std::cout << "eval " << target.label() << ": fidelity " << m.fidelity << ", dkl " << m.dkl << '\n';
  return ok;
}

int cmd_bench(const Invocation& inv) {
  const json raw = io::read_json_file(inv.config);
  io::require_keys(raw, {"n_spins", "m_hidden", "samples", "clock_hz", "hardware_sample_time_s", "capacity", "seed"}, "");
  const auto spins = value_or<std::vector<int>>(raw, "n_spins", {2, 4, 6, 8, 10});
  auto hidden = value_or<std::vector<int>>(raw, "m_hidden", {});
  if (hidden.empty()) {
    for (int m = 20; m <= 200; m += 20) hidden.push_back(m);
  }
  const auto s = value_or<std::int64_t>(raw, "samples", 1000000);
  if (s < 10000) throw ConfigError("samples: must be >= 10000");
  if (!raw.contains("clock_hz")) throw ConfigError("clock_hz: missing required key");
  bench::CostModel model;
  model.clock_hz = value_or<double>(raw, "clock_hz", 0.0);
  model.hardware_sample_time_s = value_or<double>(raw, "hardware_sample_time_s", model.hardware_sample_time_s);
  model.hardware_capacity = value_or<int>(raw, "capacity", model.hardware_capacity);
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (int n : spins) {
    if (n < 1) throw ConfigError("n_spins: entries must be >= 1");
  }
  for (int m : hidden) {
    if (m < 1) throw ConfigError("m_hidden: entries must be >= 1");
  }
  const std::uint64_t seed = resolve_seed(inv, raw);

  fs::create_directories(inv.out_dir);
  auto csv = open_out(inv.out_dir / "bench.csv");
  io::write_bench_header(csv);
  for (int n : spins) {
    for (int m : hidden) {
      const auto r = bench::measure_throughput(n, m, static_cast<std::size_t>(s),
                                               derive_seed(seed, static_cast<std::uint64_t>(n * 100000 + m)), model);
      io::write_bench_row(csv, r, model);
      csv.flush();
    }
  }
  json cross = json::object();
  for (int n : spins) {
    const auto m = bench::crossover(n, model, static_cast<std::size_t>(s));
    cross[std::to_string(n)] = m ? json(*m) : json(nullptr);
  }
  open_out(inv.out_dir / "crossover.json") << json{{"clock_hz", model.clock_hz}, {"m_star", cross}}.dump(1) << '\n';
  return ok;
}

int cmd_nyquist(const Invocation& inv) {
  const json raw = io::read_json_file(inv.config);
  io::require_keys(raw, {"checkpoint", "target", "reference", "lif", "dts", "samples", "seed"}, "");
  if (!raw.contains("checkpoint")) throw ConfigError("checkpoint: missing required key");
  const auto params = io::read_checkpoint(value_or<std::string>(raw, "checkpoint", ""));
  const auto dts = value_or<std::vector<double>>(raw, "dts", {1.0, 2.0, 5.0, 10.0});
  for (double dt : dts) {
    if (!(dt > 0.0)) throw ConfigError("dts: entries must be positive");
  }
  const auto s = value_or<std::int64_t>(raw, "samples", 100000);
  if (s < 1) throw ConfigError("samples: must be >= 1");
  const auto reference = value_or<std::string>(raw, "reference", "exact");
  if (reference != "exact" && reference != "target") throw ConfigError("reference: expected exact or target");
  lif::LifConfig lcfg = raw.contains("lif") ? io::lif_config_from_json(raw.at("lif")) : lif::LifConfig{};
  const std::uint64_t seed = resolve_seed(inv, raw);

  std::vector<double> ref;
  if (reference == "target") {
    ref = train::target_distribution(target_for(raw, params), quantum::tetrahedral_povm());
  } else {
    ref = sampling::exact_distribution(params).p_visible;
  }
  lcfg = calibrated(lcfg, seed);
  const auto rows = lif::nyquist_scan(params, lcfg, dts, static_cast<std::size_t>(s), ref, derive_seed(seed, "nyquist"));
  fs::create_directories(inv.out_dir);
  auto csv = open_out(inv.out_dir / "nyquist.csv");
  csv << "dt_us,dkl\n" << std::setprecision(12);
  for (const auto& r : rows) csv << r.dt << ',' << (std::isfinite(r.dkl) ? std::to_string(r.dkl) : "inf") << '\n';
  return ok;
}

int cmd_calibrate(const Invocation& inv) {
  const json raw = io::read_json_file(inv.config);
  io::require_keys(raw, {"lif", "points", "duration_us", "max_residual", "seed"}, "");
  lif::LifConfig lcfg = raw.contains("lif") ? io::lif_config_from_json(raw.at("lif")) : lif::LifConfig{};
  const int points = value_or<int>(raw, "points", 11);
  if (points < 5) throw ConfigError("points: must be >= 5");
  const double duration = value_or<double>(raw, "duration_us", 20000.0);
  const double max_residual = value_or<double>(raw, "max_residual", 0.02);
  if (!(duration > 0.0) || !(max_residual > 0.0)) throw ConfigError("duration_us and max_residual must be positive");
  const std::uint64_t seed = resolve_seed(inv, raw);

  const auto cal = lif::lif_calibrate(lcfg, points, seed, duration, max_residual);
  fs::create_directories(inv.out_dir);
  auto csv = open_out(inv.out_dir / "activation.csv");
  csv << "leak,p_on,p_fit\n" << std::setprecision(12);
  for (std::size_t k = 0; k < cal.leak.size(); ++k) {
    csv << cal.leak[k] << ',' << cal.p_on[k] << ',' << cal.logistic(cal.leak[k]) << '\n';
  }
  open_out(inv.out_dir / "calibration.json") << io::to_json(cal).dump(1) << '\n';
  std::cout << "calibrated: u0 " << cal.u0 << ", alpha " << cal.alpha << ", residual " << cal.residual_rms << '\n';
  return ok;
}

int run(int argc, char** argv) {
  CLI::App app{"Sampling-network representations of few-qubit states"};
  app.require_subcommand(1);
  Invocation inv;
  std::string out = "out";
  std::uint64_t seed = 0;
  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const Invocation&);
  };
  const Entry entries[] = {{"train", "train a network on a target state", cmd_train},
                           {"eval", "evaluate a checkpoint", cmd_eval},
                           {"bench", "Gibbs throughput against the cost models", cmd_bench},
                           {"nyquist", "LIF readout-interval scan", cmd_nyquist},
                           {"calibrate", "LIF activation calibration", cmd_calibrate}};
  std::vector<std::pair<CLI::App*, int (*)(const Invocation&)>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", inv.config, "JSON config file")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "override the config seed");
    subs.emplace_back(sub, e.fn);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }
  if (const char* env = std::getenv("QSAMPLER_OUT"); env && *env) out = env;
  inv.out_dir = out;
  for (const auto& [sub, fn] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) inv.seed = seed;
    try {
      return fn(inv);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return config_error;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return runtime_error;
    }
  }
  return config_error;
}

}  // namespace qs::cli
