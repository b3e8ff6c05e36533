#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qsampler/topology.hpp"

namespace qs::sampling {

enum class Backend { exact, gibbs, lif };

std::string_view to_string(Backend b);
Backend parse_backend(std::string_view name);

/// S joint binary states of a network. Unit u of sample s is bit (u % 64)
/// of word (u / 64) in row s.
class SampleBatch {
 public:
  SampleBatch(int n_units, Backend backend, std::uint64_t seed);

  int n_units() const { return n_units_; }
  int n_words() const { return n_words_; }
  std::size_t size() const { return n_samples_; }
  Backend backend() const { return backend_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const std::uint64_t> row(std::size_t s) const {
    return {words_.data() + s * static_cast<std::size_t>(n_words_), static_cast<std::size_t>(n_words_)};
  }
  bool unit(std::size_t s, int u) const {
    return (words_[s * static_cast<std::size_t>(n_words_) + static_cast<std::size_t>(u / 64)] >> (u % 64)) & 1u;
  }

  void append(std::span<const std::uint8_t> state);
  void append_packed(std::span<const std::uint64_t> row);
  /// Appends every row of `other` (same unit count).
  void merge(const SampleBatch& other);
  void reserve(std::size_t s) { words_.reserve(s * static_cast<std::size_t>(n_words_)); }

  /// Raw storage; rows are contiguous.
  std::vector<std::uint64_t>& words() { return words_; }
  void set_size(std::size_t s) { n_samples_ = s; }

 private:
  int n_units_;
  int n_words_;
  std::size_t n_samples_ = 0;
  Backend backend_;
  std::uint64_t seed_;
  std::vector<std::uint64_t> words_;
};

/// Index of the visible configuration of a row, with v_1 as most significant
/// bit, so that for qubit pairs the index equals the flat POVM outcome index.
std::size_t visible_index(std::span<const std::uint64_t> row, int n_visible);

/// Visible configuration with the same convention.
std::vector<std::uint8_t> visible_bits(std::size_t index, int n_visible);

enum class Marginal { visible, joint };

/// Normalized histogram; joint requires n_units <= 24 and is indexed by the
/// packed row (unit 0 least significant).
std::vector<double> empirical_marginal(const SampleBatch& batch, int n_visible, Marginal over);

/// Exact Boltzmann marginal p(v) together with the conditional moments the
/// trainer needs: E[s_u | v] for every unit and E[s_a s_b | v] for every edge.
struct ExactModel {
  int n_visible = 0;
  int n_units = 0;
  std::vector<double> p_visible;          // 2^n_visible
  std::vector<double> unit_given_v;       // 2^n_visible x n_units, row-major
  std::vector<double> edge_given_v;       // 2^n_visible x n_edges, row-major
  std::size_t n_edges = 0;

  double unit_moment(std::size_t v, int u) const {
    return unit_given_v[v * static_cast<std::size_t>(n_units) + static_cast<std::size_t>(u)];
  }
  double edge_moment(std::size_t v, std::size_t e) const { return edge_given_v[v * n_edges + e]; }

  /// Unconditional <s_u> and <s_a s_b>.
  std::vector<double> unit_means() const;
  std::vector<double> edge_means() const;
};

/// Layered networks (the hidden layer adjacent to the visible one has no
/// intra-layer edges) are handled by summing that layer analytically and
/// enumerating the visible layer plus any second hidden layer (<= 20 units).
/// Anything else falls back to full enumeration (<= 24 units).
ExactModel exact_distribution(const net::NetworkParams& params);

/// Reference implementation: enumerate every joint state. n_units <= 24.
ExactModel exact_distribution_bruteforce(const net::NetworkParams& params);

struct GibbsConfig {
  int sweeps_per_sample = 1;
  int burn_in = 100;
  /// Independent chains; each produces an equal share of the samples.
  int chains = 1;
};

/// Sequential single-site Gibbs updates in unit order. Deterministic given
/// seed; the result does not depend on the number of OpenMP threads.
SampleBatch gibbs_sample(const net::NetworkParams& params, std::size_t s, const GibbsConfig& cfg,
                         std::uint64_t seed);

/// I.i.d. draws of visible configurations from a probability table.
SampleBatch sample_visible(std::span<const double> probs, int n_visible, std::size_t s,
                           std::uint64_t seed);

}  // namespace qs::sampling
