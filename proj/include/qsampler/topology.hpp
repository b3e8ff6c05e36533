#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qs::net {

enum class TopologyKind { restricted, visible_lateral, deep };

std::string_view to_string(TopologyKind kind);
TopologyKind parse_topology_kind(std::string_view name);

/// An undirected connection between two units. Units are numbered visible
/// first, then the first hidden layer, then the second (if any). Always a < b.
struct Edge {
  int a;
  int b;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Connectivity mask of a sampling network.
class Topology {
 public:
  Topology(TopologyKind kind, int n_visible, std::vector<int> hidden_sizes, std::vector<Edge> edges);

  TopologyKind kind() const { return kind_; }
  int n_visible() const { return n_visible_; }
  int n_hidden() const { return n_hidden_; }
  int n_units() const { return n_visible_ + n_hidden_; }
  const std::vector<int>& hidden_sizes() const { return hidden_sizes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool visible_lateral() const { return kind_ == TopologyKind::visible_lateral; }

  /// First unit index of hidden layer `layer` (0-based).
  int hidden_offset(std::size_t layer) const;

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  TopologyKind kind_;
  int n_visible_;
  std::vector<int> hidden_sizes_;
  int n_hidden_;
  std::vector<Edge> edges_;
};

/// Fully connected inter-layer masks; visible_lateral adds every visible pair,
/// deep chains visible -> h1 -> h2 without skip connections.
Topology build_topology(TopologyKind kind, int n_visible, const std::vector<int>& hidden_sizes);

/// Hardware-style integer grid. Weights: signed integers in
/// [-(2^(bits-1) - 1), 2^(bits-1) - 1] times weight_scale. Biases: unsigned
/// integers in [0, 2^bits - 1] mapped affinely, bias_offset + k * bias_scale.
struct QuantSpec {
  int weight_bits = 6;
  int bias_bits = 10;
  double weight_scale = 4.0 / 31.0;
  double bias_scale = 8.0 / 511.0;
  double bias_offset = -8.0;

  int max_weight_level() const { return (1 << (weight_bits - 1)) - 1; }
  int max_bias_level() const { return (1 << bias_bits) - 1; }

  friend bool operator==(const QuantSpec&, const QuantSpec&) = default;
};

/// Boltzmann parameters over a topology: one weight per edge, visible
/// biases d, hidden biases b (all hidden layers, concatenated).
struct NetworkParams {
  Topology topology;
  std::vector<double> weights;
  std::vector<double> d;
  std::vector<double> b;
  std::optional<QuantSpec> quant;

  explicit NetworkParams(Topology topo);

  /// Bias of any unit (visible or hidden).
  double bias(int unit) const;
  void set_bias(int unit, double value);
  std::size_t n_parameters() const { return weights.size() + d.size() + b.size(); }

  /// Throws if vector sizes disagree with the topology.
  void validate() const;
};

/// E = -sum_edges s_a W s_b - sum_i v_i d_i - sum_j h_j b_j.
double energy(const NetworkParams& params, std::span<const std::uint8_t> v,
              std::span<const std::uint8_t> h);

/// Same energy for a packed joint state (bit u of `state` = unit u).
double energy_packed(const NetworkParams& params, std::uint64_t state);

/// a_q = 2 v_{2q} + v_{2q+1}; outcome indices 0..3 per qubit.
std::vector<std::uint8_t> encode_outcomes(std::span<const int> outcomes);
std::vector<int> decode_visible(std::span<const std::uint8_t> v);

struct QuantizeResult {
  NetworkParams params;
  std::size_t saturated = 0;
};

QuantizeResult quantize(const NetworkParams& params, const QuantSpec& spec);

/// True when every weight and bias sits on the grid of `spec`.
bool on_quant_grid(const NetworkParams& params, const QuantSpec& spec, double tol = 1e-9);

struct InitScheme {
  enum class Kind { zero, uniform } kind = Kind::uniform;
  double epsilon = 0.01;
};

NetworkParams init_params(const Topology& topology, std::uint64_t seed, InitScheme scheme = {});

}  // namespace qs::net
