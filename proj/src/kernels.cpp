#include "qsampler/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <omp.h>

#include "qsampler/rng.hpp"

namespace qs::kernels {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

void run_chain(const CsrNet& net, const ChainPlan& plan, const sampling::GibbsConfig& cfg, int n_words,
               std::uint64_t* out) {
  Rng rng(plan.seed);
  const auto n = static_cast<std::size_t>(net.n_units);
  std::vector<std::uint8_t> z(n);
  for (auto& x : z) x = uniform01(rng) < 0.5 ? 1 : 0;

  auto sweep = [&] {
    for (std::size_t u = 0; u < n; ++u) {
      double field = net.bias[u];
      const int end = net.offsets[u + 1];
      for (int k = net.offsets[u]; k < end; ++k) {
        field += net.weights[static_cast<std::size_t>(k)] * z[static_cast<std::size_t>(net.neighbors[static_cast<std::size_t>(k)])];
      }
      z[u] = uniform01(rng) < sigmoid(field) ? 1 : 0;
    }
  };

  for (int i = 0; i < cfg.burn_in; ++i) sweep();
  for (std::size_t s = 0; s < plan.samples; ++s) {
    for (int i = 0; i < cfg.sweeps_per_sample; ++i) sweep();
    std::uint64_t* row = out + (plan.first_row + s) * static_cast<std::size_t>(n_words);
    std::fill(row, row + n_words, 0);
    for (std::size_t u = 0; u < n; ++u) {
      if (z[u]) row[u / 64] |= std::uint64_t{1} << (u % 64);
    }
  }
}

BatchCounts empty_counts(const sampling::SampleBatch& batch, const net::Topology& topo) {
  if (batch.n_units() != topo.n_units()) {
    throw std::invalid_argument("sample batch unit count does not match topology");
  }
  BatchCounts c;
  c.n_visible = topo.n_visible();
  c.n_units = topo.n_units();
  c.n_edges = topo.edges().size();
  const std::size_t nv_states = std::size_t{1} << c.n_visible;
  c.visible.assign(nv_states, 0);
  c.units.assign(nv_states * static_cast<std::size_t>(c.n_units), 0);
  c.edges.assign(nv_states * c.n_edges, 0);
  return c;
}

void count_rows(const sampling::SampleBatch& batch, const net::Topology& topo, std::size_t begin,
                std::size_t end, BatchCounts& c) {
  const auto& edges = topo.edges();
  const auto n = static_cast<std::size_t>(c.n_units);
  std::vector<std::uint8_t> z(n);
  for (std::size_t s = begin; s < end; ++s) {
    const auto row = batch.row(s);
    for (std::size_t u = 0; u < n; ++u) z[u] = (row[u / 64] >> (u % 64)) & 1u;
    const std::size_t v = sampling::visible_index(row, c.n_visible);
    ++c.visible[v];
    ++c.total;
    std::uint64_t* urow = c.units.data() + v * n;
    for (std::size_t u = 0; u < n; ++u) urow[u] += z[u];
    std::uint64_t* erow = c.edges.data() + v * c.n_edges;
    for (std::size_t e = 0; e < c.n_edges; ++e) {
      erow[e] += z[static_cast<std::size_t>(edges[e].a)] & z[static_cast<std::size_t>(edges[e].b)];
    }
  }
}

// Conditional moments for one visible configuration, summing h1 analytically
// and enumerating h2. Returns log of the unnormalized marginal.
double layered_row(const LayeredNet& net, std::size_t v_index, double* unit_row, double* edge_row) {
  const int nv = net.n_visible, n1 = net.n_h1, n2 = net.n_h2;
  const auto nu = static_cast<std::size_t>(net.n_units());
  std::vector<double> vis(static_cast<std::size_t>(nv));
  for (int i = 0; i < nv; ++i) vis[static_cast<std::size_t>(i)] = static_cast<double>((v_index >> (nv - 1 - i)) & 1u);

  double base = 0.0;
  for (int i = 0; i < nv; ++i) {
    if (!vis[static_cast<std::size_t>(i)]) continue;
    base += net.d[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < nv; ++k) base += vis[static_cast<std::size_t>(k)] * net.w_vv[static_cast<std::size_t>(i * nv + k)];
  }
  std::vector<double> field_v(static_cast<std::size_t>(n1));
  for (int j = 0; j < n1; ++j) {
    double f = net.b1[static_cast<std::size_t>(j)];
    for (int i = 0; i < nv; ++i) f += vis[static_cast<std::size_t>(i)] * net.w_vh[static_cast<std::size_t>(i * n1 + j)];
    field_v[static_cast<std::size_t>(j)] = f;
  }

  const std::size_t n_h2_states = std::size_t{1} << n2;
  std::vector<double> field(static_cast<std::size_t>(n1));
  auto h1_fields = [&](std::size_t c, double& logw) {
    logw = base;
    for (int k = 0; k < n2; ++k) {
      if ((c >> k) & 1u) logw += net.b2[static_cast<std::size_t>(k)];
    }
    for (int j = 0; j < n1; ++j) {
      double f = field_v[static_cast<std::size_t>(j)];
      for (int k = 0; k < n2; ++k) {
        if ((c >> k) & 1u) f += net.w_hh[static_cast<std::size_t>(j * n2 + k)];
      }
      field[static_cast<std::size_t>(j)] = f;
      logw += softplus(f);
    }
  };

  std::vector<double> logws(n_h2_states);
  double max_logw = -INFINITY;
  for (std::size_t c = 0; c < n_h2_states; ++c) {
    h1_fields(c, logws[c]);
    max_logw = std::max(max_logw, logws[c]);
  }

  std::fill(unit_row, unit_row + nu, 0.0);
  std::fill(edge_row, edge_row + net.edges.size(), 0.0);
  std::vector<double> val(nu);
  for (int i = 0; i < nv; ++i) val[static_cast<std::size_t>(i)] = vis[static_cast<std::size_t>(i)];
  double total = 0.0;
  for (std::size_t c = 0; c < n_h2_states; ++c) {
    double logw = 0.0;
    h1_fields(c, logw);
    const double w = std::exp(logws[c] - max_logw);
    total += w;
    for (int j = 0; j < n1; ++j) val[static_cast<std::size_t>(nv + j)] = sigmoid(field[static_cast<std::size_t>(j)]);
    for (int k = 0; k < n2; ++k) val[static_cast<std::size_t>(nv + n1 + k)] = static_cast<double>((c >> k) & 1u);
    for (std::size_t u = 0; u < nu; ++u) unit_row[u] += w * val[u];
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
      edge_row[e] += w * val[static_cast<std::size_t>(net.edges[e].a)] * val[static_cast<std::size_t>(net.edges[e].b)];
    }
  }
  for (std::size_t u = 0; u < nu; ++u) unit_row[u] /= total;
  for (std::size_t e = 0; e < net.edges.size(); ++e) edge_row[e] /= total;
  return max_logw + std::log(total);
}

}  // namespace

CsrNet CsrNet::from(const net::NetworkParams& params) {
  params.validate();
  const auto& topo = params.topology;
  CsrNet net;
  net.n_units = topo.n_units();
  const auto n = static_cast<std::size_t>(net.n_units);
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  const auto& edges = topo.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (params.weights[e] == 0.0) continue;  // dropped, as a sparse simulator would
    adj[static_cast<std::size_t>(edges[e].a)].emplace_back(edges[e].b, params.weights[e]);
    adj[static_cast<std::size_t>(edges[e].b)].emplace_back(edges[e].a, params.weights[e]);
  }
  net.offsets.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) {
    net.offsets[u + 1] = net.offsets[u] + static_cast<int>(adj[u].size());
    for (const auto& [nb, w] : adj[u]) {
      net.neighbors.push_back(nb);
      net.weights.push_back(w);
    }
    net.bias.push_back(params.bias(static_cast<int>(u)));
  }
  return net;
}

std::vector<ChainPlan> plan_chains(std::size_t s, int chains, std::uint64_t seed) {
  if (chains < 1) throw std::invalid_argument("need at least one chain");
  std::vector<ChainPlan> plans(static_cast<std::size_t>(chains));
  const std::size_t per = s / static_cast<std::size_t>(chains);
  const std::size_t extra = s % static_cast<std::size_t>(chains);
  std::size_t row = 0;
  for (std::size_t c = 0; c < plans.size(); ++c) {
    plans[c].samples = per + (c < extra ? 1 : 0);
    plans[c].seed = derive_seed(seed, static_cast<std::uint64_t>(c));
    plans[c].first_row = row;
    row += plans[c].samples;
  }
  return plans;
}

void BatchCounts::add(const BatchCounts& other) {
  total += other.total;
  for (std::size_t i = 0; i < visible.size(); ++i) visible[i] += other.visible[i];
  for (std::size_t i = 0; i < units.size(); ++i) units[i] += other.units[i];
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] += other.edges[i];
}

bool LayeredNet::build(const net::NetworkParams& params, LayeredNet& out) {
  const auto& topo = params.topology;
  const auto& hs = topo.hidden_sizes();
  if (hs.empty() || hs.size() > 2 || topo.n_visible() > 20) return false;
  out = LayeredNet{};
  out.n_visible = topo.n_visible();
  out.n_h1 = hs[0];
  out.n_h2 = hs.size() == 2 ? hs[1] : 0;
  if (out.n_h2 > 20) return false;
  const int nv = out.n_visible, n1 = out.n_h1, n2 = out.n_h2;
  out.d = params.d;
  out.b1.assign(params.b.begin(), params.b.begin() + n1);
  out.b2.assign(params.b.begin() + n1, params.b.end());
  out.w_vh.assign(static_cast<std::size_t>(nv * n1), 0.0);
  out.w_vv.assign(static_cast<std::size_t>(nv * nv), 0.0);
  out.w_hh.assign(static_cast<std::size_t>(n1 * n2), 0.0);
  out.edges = topo.edges();
  auto layer = [&](int u) { return u < nv ? 0 : (u < nv + n1 ? 1 : 2); };
  for (std::size_t e = 0; e < out.edges.size(); ++e) {
    const auto [a, b] = std::pair{out.edges[e].a, out.edges[e].b};
    const int la = layer(a), lb = layer(b);
    const double w = params.weights[e];
    if (la == 0 && lb == 0) {
      out.w_vv[static_cast<std::size_t>(a * nv + b)] += w;
    } else if (la == 0 && lb == 1) {
      out.w_vh[static_cast<std::size_t>(a * n1 + (b - nv))] += w;
    } else if (la == 1 && lb == 2) {
      out.w_hh[static_cast<std::size_t>((a - nv) * n2 + (b - nv - n1))] += w;
    } else {
      return false;
    }
  }
  return true;
}

namespace serial {

void gibbs_chains(const CsrNet& net, std::span<const ChainPlan> plans, const sampling::GibbsConfig& cfg,
                  int n_words, std::uint64_t* out) {
  for (const auto& plan : plans) run_chain(net, plan, cfg, n_words, out);
}

BatchCounts count_batch(const sampling::SampleBatch& batch, const net::Topology& topo) {
  BatchCounts c = empty_counts(batch, topo);
  count_rows(batch, topo, 0, batch.size(), c);
  return c;
}

std::vector<double> exact_layered(const LayeredNet& net, std::span<double> unit_rows,
                                  std::span<double> edge_rows) {
  const std::size_t nv_states = std::size_t{1} << net.n_visible;
  const auto nu = static_cast<std::size_t>(net.n_units());
  std::vector<double> logp(nv_states);
  for (std::size_t v = 0; v < nv_states; ++v) {
    logp[v] = layered_row(net, v, unit_rows.data() + v * nu, edge_rows.data() + v * net.edges.size());
  }
  return logp;
}

}  // namespace serial

namespace omp {

int max_threads() { return omp_get_max_threads(); }

void gibbs_chains(const CsrNet& net, std::span<const ChainPlan> plans, const sampling::GibbsConfig& cfg,
                  int n_words, std::uint64_t* out) {
  const auto n = static_cast<std::ptrdiff_t>(plans.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    run_chain(net, plans[static_cast<std::size_t>(c)], cfg, n_words, out);
  }
}

BatchCounts count_batch(const sampling::SampleBatch& batch, const net::Topology& topo) {
  BatchCounts total = empty_counts(batch, topo);
  const int threads = omp_get_max_threads();
  if (threads <= 1 || batch.size() < 4096) {
    count_rows(batch, topo, 0, batch.size(), total);
    return total;
  }
  // Integer counts make the reduction order irrelevant.
#pragma omp parallel
  {
    BatchCounts local = empty_counts(batch, topo);
    const auto t = static_cast<std::size_t>(omp_get_thread_num());
    const auto nt = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t begin = batch.size() * t / nt;
    const std::size_t end = batch.size() * (t + 1) / nt;
    count_rows(batch, topo, begin, end, local);
#pragma omp critical
    total.add(local);
  }
  return total;
}

std::vector<double> exact_layered(const LayeredNet& net, std::span<double> unit_rows,
                                  std::span<double> edge_rows) {
  const std::size_t nv_states = std::size_t{1} << net.n_visible;
  const auto nu = static_cast<std::size_t>(net.n_units());
  std::vector<double> logp(nv_states);
  const auto n = static_cast<std::ptrdiff_t>(nv_states);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t v = 0; v < n; ++v) {
    const auto vi = static_cast<std::size_t>(v);
    logp[vi] = layered_row(net, vi, unit_rows.data() + vi * nu, edge_rows.data() + vi * net.edges.size());
  }
  return logp;
}

}  // namespace omp

}  // namespace qs::kernels
