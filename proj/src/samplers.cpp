#include "qsampler/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qsampler/kernels.hpp"
#include "qsampler/rng.hpp"

namespace qs::sampling {

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::exact: return "exact";
    case Backend::gibbs: return "gibbs";
    case Backend::lif: return "lif";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  if (name == "exact") return Backend::exact;
  if (name == "gibbs") return Backend::gibbs;
  if (name == "lif") return Backend::lif;
  throw std::invalid_argument("unknown backend '" + std::string(name) + "'");
}

SampleBatch::SampleBatch(int n_units, Backend backend, std::uint64_t seed)
    : n_units_(n_units), n_words_((n_units + 63) / 64), backend_(backend), seed_(seed) {
  if (n_units < 1) throw std::invalid_argument("sample batch needs at least one unit");
}

void SampleBatch::append(std::span<const std::uint8_t> state) {
  if (state.size() != static_cast<std::size_t>(n_units_)) {
    throw std::invalid_argument("state length does not match batch unit count");
  }
  const std::size_t base = words_.size();
  words_.resize(base + static_cast<std::size_t>(n_words_), 0);
  for (std::size_t u = 0; u < state.size(); ++u) {
    if (state[u]) words_[base + u / 64] |= std::uint64_t{1} << (u % 64);
  }
  ++n_samples_;
}

void SampleBatch::append_packed(std::span<const std::uint64_t> row) {
  if (row.size() != static_cast<std::size_t>(n_words_)) throw std::invalid_argument("packed row width mismatch");
  words_.insert(words_.end(), row.begin(), row.end());
  ++n_samples_;
}

void SampleBatch::merge(const SampleBatch& other) {
  if (other.n_units_ != n_units_) throw std::invalid_argument("cannot merge batches of different width");
  words_.insert(words_.end(), other.words_.begin(), other.words_.end());
  n_samples_ += other.n_samples_;
}

std::size_t visible_index(std::span<const std::uint64_t> row, int n_visible) {
  std::size_t idx = 0;
  const std::uint64_t w = row[0];
  for (int i = 0; i < n_visible; ++i) idx = (idx << 1) | ((w >> i) & 1u);
  return idx;
}

std::vector<std::uint8_t> visible_bits(std::size_t index, int n_visible) {
  std::vector<std::uint8_t> v(static_cast<std::size_t>(n_visible));
  for (int i = 0; i < n_visible; ++i) v[static_cast<std::size_t>(i)] = (index >> (n_visible - 1 - i)) & 1u;
  return v;
}

std::vector<double> empirical_marginal(const SampleBatch& batch, int n_visible, Marginal over) {
  if (batch.size() == 0) throw std::invalid_argument("empirical_marginal: empty batch");
  if (n_visible < 1 || n_visible > batch.n_units() || n_visible > 24) {
    throw std::invalid_argument("empirical_marginal: bad visible count");
  }
  std::vector<double> hist;
  if (over == Marginal::visible) {
    hist.assign(std::size_t{1} << n_visible, 0.0);
    for (std::size_t s = 0; s < batch.size(); ++s) hist[visible_index(batch.row(s), n_visible)] += 1.0;
  } else {
    if (batch.n_units() > 24) throw std::invalid_argument("joint marginal needs <= 24 units");
    hist.assign(std::size_t{1} << batch.n_units(), 0.0);
    for (std::size_t s = 0; s < batch.size(); ++s) hist[batch.row(s)[0]] += 1.0;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& h : hist) h *= inv;
  return hist;
}

std::vector<double> ExactModel::unit_means() const {
  std::vector<double> m(static_cast<std::size_t>(n_units), 0.0);
  for (std::size_t v = 0; v < p_visible.size(); ++v) {
    for (int u = 0; u < n_units; ++u) m[static_cast<std::size_t>(u)] += p_visible[v] * unit_moment(v, u);
  }
  return m;
}

std::vector<double> ExactModel::edge_means() const {
  std::vector<double> m(n_edges, 0.0);
  for (std::size_t v = 0; v < p_visible.size(); ++v) {
    for (std::size_t e = 0; e < n_edges; ++e) m[e] += p_visible[v] * edge_moment(v, e);
  }
  return m;
}

namespace {

void normalize_from_log(std::vector<double>& logp, std::vector<double>& out) {
  const double mx = *std::max_element(logp.begin(), logp.end());
  double z = 0.0;
  out.resize(logp.size());
  for (std::size_t i = 0; i < logp.size(); ++i) {
    out[i] = std::exp(logp[i] - mx);
    z += out[i];
  }
  for (double& p : out) p /= z;
}

}  // namespace

ExactModel exact_distribution(const net::NetworkParams& params) {
  params.validate();
  kernels::LayeredNet layered;
  if (!kernels::LayeredNet::build(params, layered)) {
    if (params.topology.n_units() <= 24) return exact_distribution_bruteforce(params);
    throw std::invalid_argument("exact_distribution: topology too large for enumeration (" +
                                std::to_string(params.topology.n_units()) + " units)");
  }
  ExactModel m;
  m.n_visible = layered.n_visible;
  m.n_units = layered.n_units();
  m.n_edges = layered.edges.size();
  const std::size_t nv_states = std::size_t{1} << m.n_visible;
  m.unit_given_v.assign(nv_states * static_cast<std::size_t>(m.n_units), 0.0);
  m.edge_given_v.assign(nv_states * m.n_edges, 0.0);
  auto logp = kernels::omp::exact_layered(layered, m.unit_given_v, m.edge_given_v);
  normalize_from_log(logp, m.p_visible);
  return m;
}

ExactModel exact_distribution_bruteforce(const net::NetworkParams& params) {
  params.validate();
  const auto& topo = params.topology;
  const int n = topo.n_units();
  if (n > 24) {
    throw std::invalid_argument("brute-force enumeration limited to 24 units, got " + std::to_string(n));
  }
  ExactModel m;
  m.n_visible = topo.n_visible();
  m.n_units = n;
  m.n_edges = topo.edges().size();
  const std::size_t n_states = std::size_t{1} << n;
  std::vector<double> logw(n_states);
  double mx = -INFINITY;
  for (std::size_t s = 0; s < n_states; ++s) {
    logw[s] = -net::energy_packed(params, s);
    mx = std::max(mx, logw[s]);
  }
  const std::size_t nv_states = std::size_t{1} << m.n_visible;
  m.p_visible.assign(nv_states, 0.0);
  m.unit_given_v.assign(nv_states * static_cast<std::size_t>(n), 0.0);
  m.edge_given_v.assign(nv_states * m.n_edges, 0.0);
  const auto& edges = topo.edges();
  double z = 0.0;
  for (std::size_t s = 0; s < n_states; ++s) {
    const double w = std::exp(logw[s] - mx);
    z += w;
    const std::uint64_t row = s;
    const std::size_t v = visible_index({&row, 1}, m.n_visible);
    m.p_visible[v] += w;
    for (int u = 0; u < n; ++u) {
      if ((s >> u) & 1u) m.unit_given_v[v * static_cast<std::size_t>(n) + static_cast<std::size_t>(u)] += w;
    }
    for (std::size_t e = 0; e < m.n_edges; ++e) {
      if (((s >> edges[e].a) & 1u) && ((s >> edges[e].b) & 1u)) m.edge_given_v[v * m.n_edges + e] += w;
    }
  }
  for (std::size_t v = 0; v < nv_states; ++v) {
    const double pv = m.p_visible[v];
    for (int u = 0; u < n; ++u) m.unit_given_v[v * static_cast<std::size_t>(n) + static_cast<std::size_t>(u)] /= pv;
    for (std::size_t e = 0; e < m.n_edges; ++e) m.edge_given_v[v * m.n_edges + e] /= pv;
    m.p_visible[v] /= z;
  }
  return m;
}

SampleBatch gibbs_sample(const net::NetworkParams& params, std::size_t s, const GibbsConfig& cfg,
                         std::uint64_t seed) {
  if (s == 0) throw std::invalid_argument("gibbs_sample: need s > 0");
  if (cfg.sweeps_per_sample < 1 || cfg.burn_in < 0) throw std::invalid_argument("gibbs_sample: bad sweep settings");
  const auto net = kernels::CsrNet::from(params);
  SampleBatch batch(params.topology.n_units(), Backend::gibbs, seed);
  const auto plans = kernels::plan_chains(s, cfg.chains, seed);
  batch.words().assign(s * static_cast<std::size_t>(batch.n_words()), 0);
  batch.set_size(s);
  kernels::omp::gibbs_chains(net, plans, cfg, batch.n_words(), batch.words().data());
  return batch;
}

SampleBatch sample_visible(std::span<const double> probs, int n_visible, std::size_t s, std::uint64_t seed) {
  if (probs.size() != (std::size_t{1} << n_visible)) throw std::invalid_argument("sample_visible: table size");
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) cdf[i] = (acc += probs[i]);
  SampleBatch batch(n_visible, Backend::exact, seed);
  batch.reserve(s);
  Rng rng(derive_seed(seed, "visible-iid"));
  std::vector<std::uint8_t> state;
  for (std::size_t k = 0; k < s; ++k) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    state = visible_bits(idx, n_visible);
    batch.append(state);
  }
  return batch;
}

}  // namespace qs::sampling
