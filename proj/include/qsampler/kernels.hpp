#pragma once

// Hot loops behind the samplers and the trainer. Every kernel exists twice:
// `serial` is the reference, `omp` splits the same work items across OpenMP
// threads. Work items (chains, visible states, sample rows) are fixed before
// the split, so both variants return identical results for any thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "qsampler/samplers.hpp"
#include "qsampler/topology.hpp"

namespace qs::kernels {

/// Compressed adjacency for single-site updates.
struct CsrNet {
  int n_units = 0;
  std::vector<int> offsets;  // n_units + 1
  std::vector<int> neighbors;
  std::vector<double> weights;
  std::vector<double> bias;

  static CsrNet from(const net::NetworkParams& params);
};

struct ChainPlan {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t first_row = 0;
};

/// Splits s samples over `chains` chains with substream seeds.
std::vector<ChainPlan> plan_chains(std::size_t s, int chains, std::uint64_t seed);

/// Integer sufficient statistics of a batch, grouped by visible configuration.
struct BatchCounts {
  int n_visible = 0;
  int n_units = 0;
  std::size_t n_edges = 0;
  std::uint64_t total = 0;
  std::vector<std::uint64_t> visible;  // 2^n_visible
  std::vector<std::uint64_t> units;    // 2^n_visible x n_units
  std::vector<std::uint64_t> edges;    // 2^n_visible x n_edges

  void add(const BatchCounts& other);
};

/// Structure used by the exact layered enumeration.
struct LayeredNet {
  int n_visible = 0;
  int n_h1 = 0;
  int n_h2 = 0;
  std::vector<double> d;            // visible biases
  std::vector<double> b1, b2;       // hidden biases
  std::vector<double> w_vh;         // n_visible x n_h1
  std::vector<double> w_vv;         // n_visible x n_visible (upper triangle used)
  std::vector<double> w_hh;         // n_h1 x n_h2
  std::vector<net::Edge> edges;
  int n_units() const { return n_visible + n_h1 + n_h2; }

  /// Returns false when the topology is not layered in the required sense.
  static bool build(const net::NetworkParams& params, LayeredNet& out);
};

namespace serial {

void gibbs_chains(const CsrNet& net, std::span<const ChainPlan> plans, const sampling::GibbsConfig& cfg,
                  int n_words, std::uint64_t* out);

BatchCounts count_batch(const sampling::SampleBatch& batch, const net::Topology& topo);

/// Fills per-visible-state conditional moments; returns log unnormalized p(v).
std::vector<double> exact_layered(const LayeredNet& net, std::span<double> unit_rows,
                                  std::span<double> edge_rows);

}  // namespace serial

namespace omp {

void gibbs_chains(const CsrNet& net, std::span<const ChainPlan> plans, const sampling::GibbsConfig& cfg,
                  int n_words, std::uint64_t* out);

BatchCounts count_batch(const sampling::SampleBatch& batch, const net::Topology& topo);

std::vector<double> exact_layered(const LayeredNet& net, std::span<double> unit_rows,
                                  std::span<double> edge_rows);

int max_threads();

}  // namespace omp

}  // namespace qs::kernels
