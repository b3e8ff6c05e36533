#pragma once

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qsampler/benchmark.hpp"
#include "qsampler/lif.hpp"
#include "qsampler/quantum.hpp"
#include "qsampler/samplers.hpp"
#include "qsampler/topology.hpp"
#include "qsampler/trainer.hpp"

namespace qs::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Malformed or schema-violating input. `what()` names the offending key or
/// the line and column of a syntax error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a JSON file. Syntax errors become ConfigError "file:line:column: ...".
json read_json_file(const fs::path& path);
json parse_json_text(std::string_view text, std::string_view source_name);

/// Throws ConfigError if `obj` is not an object or has keys outside `allowed`.
void require_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where);

// Quantum objects: {"n_qubits", "re", "im"} and {"n_qubits", "probs"}, row-major.
json to_json(const quantum::DensityMatrix& rho);
json to_json(const quantum::OutcomeDistribution& p);
quantum::DensityMatrix density_from_json(const json& j);
quantum::OutcomeDistribution distribution_from_json(const json& j);

// Network parameters.
json to_json(const net::QuantSpec& q);
net::QuantSpec quant_from_json(const json& j);
json checkpoint_to_json(const net::NetworkParams& params, int epoch);
net::NetworkParams checkpoint_from_json(const json& j, int* epoch = nullptr);
void write_checkpoint(const fs::path& path, const net::NetworkParams& params, int epoch);
net::NetworkParams read_checkpoint(const fs::path& path, int* epoch = nullptr);

// Samples and spikes.
void write_spike_csv(std::ostream& os, std::span<const lif::Spike> spikes);
void write_batch_csv(std::ostream& os, const sampling::SampleBatch& batch);
/// {"n_units", "backend", "seed", "s_total", "counts": {"0101...": n}}; bit strings list unit 0 first.
json batch_counts_json(const sampling::SampleBatch& batch);

// Training.
json to_json(const train::EpochRecord& rec);
json to_json(const lif::Calibration& cal);
lif::Calibration calibration_from_json(const json& j);
lif::LifConfig lif_config_from_json(const json& j);
sampling::GibbsConfig gibbs_config_from_json(const json& j);
train::TargetSpec target_from_json(const json& j);
train::TrainConfig train_config_from_json(const json& j);

// Benchmark rows: n_spins,m_hidden,s,measured_s,modeled_s,hardware_s. A
// hardware time beyond capacity is written as an empty field.
void write_bench_header(std::ostream& os);
void write_bench_row(std::ostream& os, const bench::BenchResult& r, const bench::CostModel& model);

}  // namespace qs::io
