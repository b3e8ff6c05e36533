#include "qsampler/topology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qsampler/rng.hpp"

namespace qs::net {

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::restricted: return "restricted";
    case TopologyKind::visible_lateral: return "visible-lateral";
    case TopologyKind::deep: return "deep";
  }
  return "unknown";
}

TopologyKind parse_topology_kind(std::string_view name) {
  if (name == "restricted") return TopologyKind::restricted;
  if (name == "visible-lateral") return TopologyKind::visible_lateral;
  if (name == "deep") return TopologyKind::deep;
  throw std::invalid_argument("unknown topology kind '" + std::string(name) + "'");
}

Topology::Topology(TopologyKind kind, int n_visible, std::vector<int> hidden_sizes,
                   std::vector<Edge> edges)
    : kind_(kind), n_visible_(n_visible), hidden_sizes_(std::move(hidden_sizes)), edges_(std::move(edges)) {
  n_hidden_ = 0;
  for (int m : hidden_sizes_) n_hidden_ += m;
  const int n = n_units();
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  for (const auto& e : edges_) {
    if (e.a < 0 || e.b >= n || e.a >= e.b) {
      throw std::invalid_argument("invalid edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ")");
    }
    ++degree[static_cast<std::size_t>(e.a)];
    ++degree[static_cast<std::size_t>(e.b)];
  }
  for (int u = n_visible_; u < n; ++u) {
    if (degree[static_cast<std::size_t>(u)] == 0) {
      throw std::invalid_argument("hidden unit " + std::to_string(u) + " has no connections");
    }
  }
}

int Topology::hidden_offset(std::size_t layer) const {
  int off = n_visible_;
  for (std::size_t l = 0; l < layer && l < hidden_sizes_.size(); ++l) off += hidden_sizes_[l];
  return off;
}

Topology build_topology(TopologyKind kind, int n_visible, const std::vector<int>& hidden_sizes) {
  if (n_visible < 2 || n_visible % 2 != 0) {
    throw std::invalid_argument("n_visible must be even and >= 2, got " + std::to_string(n_visible));
  }
  const std::size_t want_layers = kind == TopologyKind::deep ? 2 : 1;
  if (hidden_sizes.size() != want_layers) {
    throw std::invalid_argument(std::string(to_string(kind)) + " topology needs " +
                                std::to_string(want_layers) + " hidden layer size(s)");
  }
  for (int m : hidden_sizes) {
    if (m < 1) throw std::invalid_argument("hidden layer sizes must be >= 1");
  }

  std::vector<Edge> edges;
  const int m1 = hidden_sizes[0];
  if (kind == TopologyKind::visible_lateral) {
    for (int i = 0; i < n_visible; ++i) {
      for (int k = i + 1; k < n_visible; ++k) edges.push_back({i, k});
    }
  }
  for (int i = 0; i < n_visible; ++i) {
    for (int j = 0; j < m1; ++j) edges.push_back({i, n_visible + j});
  }
  if (kind == TopologyKind::deep) {
    const int m2 = hidden_sizes[1];
    for (int j = 0; j < m1; ++j) {
      for (int k = 0; k < m2; ++k) edges.push_back({n_visible + j, n_visible + m1 + k});
    }
  }
  return Topology(kind, n_visible, hidden_sizes, std::move(edges));
}

NetworkParams::NetworkParams(Topology topo)
    : topology(std::move(topo)),
      weights(topology.edges().size(), 0.0),
      d(static_cast<std::size_t>(topology.n_visible()), 0.0),
      b(static_cast<std::size_t>(topology.n_hidden()), 0.0) {}

double NetworkParams::bias(int unit) const {
  const int nv = topology.n_visible();
  return unit < nv ? d[static_cast<std::size_t>(unit)] : b[static_cast<std::size_t>(unit - nv)];
}

void NetworkParams::set_bias(int unit, double value) {
  const int nv = topology.n_visible();
  (unit < nv ? d[static_cast<std::size_t>(unit)] : b[static_cast<std::size_t>(unit - nv)]) = value;
}

void NetworkParams::validate() const {
  if (weights.size() != topology.edges().size() ||
      d.size() != static_cast<std::size_t>(topology.n_visible()) ||
      b.size() != static_cast<std::size_t>(topology.n_hidden())) {
    throw std::invalid_argument("network parameters do not match topology sizes");
  }
}

double energy(const NetworkParams& params, std::span<const std::uint8_t> v,
              std::span<const std::uint8_t> h) {
  const auto& topo = params.topology;
  if (v.size() != static_cast<std::size_t>(topo.n_visible()) ||
      h.size() != static_cast<std::size_t>(topo.n_hidden())) {
    throw std::invalid_argument("energy: state size does not match topology");
  }
  auto unit = [&](int u) -> double {
    return u < topo.n_visible() ? v[static_cast<std::size_t>(u)]
                                : h[static_cast<std::size_t>(u - topo.n_visible())];
  };
  double e = 0.0;
  const auto& edges = topo.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    e -= unit(edges[k].a) * params.weights[k] * unit(edges[k].b);
  }
  for (std::size_t i = 0; i < v.size(); ++i) e -= v[i] * params.d[i];
  for (std::size_t j = 0; j < h.size(); ++j) e -= h[j] * params.b[j];
  return e;
}

double energy_packed(const NetworkParams& params, std::uint64_t state) {
  const auto& topo = params.topology;
  if (topo.n_units() > 64) throw std::invalid_argument("energy_packed: more than 64 units");
  auto bit = [state](int u) { return (state >> u) & 1u; };
  double e = 0.0;
  const auto& edges = topo.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (bit(edges[k].a) && bit(edges[k].b)) e -= params.weights[k];
  }
  for (int u = 0; u < topo.n_units(); ++u) {
    if (bit(u)) e -= params.bias(u);
  }
  return e;
}

std::vector<std::uint8_t> encode_outcomes(std::span<const int> outcomes) {
  std::vector<std::uint8_t> v;
  v.reserve(outcomes.size() * 2);
  for (int a : outcomes) {
    if (a < 0 || a > 3) throw std::out_of_range("outcome index " + std::to_string(a) + " outside 0..3");
    v.push_back(static_cast<std::uint8_t>(a >> 1));
    v.push_back(static_cast<std::uint8_t>(a & 1));
  }
  return v;
}

std::vector<int> decode_visible(std::span<const std::uint8_t> v) {
  if (v.size() % 2 != 0) throw std::invalid_argument("visible vector length must be even");
  std::vector<int> a;
  a.reserve(v.size() / 2);
  for (std::size_t i = 0; i < v.size(); i += 2) {
    if (v[i] > 1 || v[i + 1] > 1) throw std::out_of_range("visible units must be 0 or 1");
    a.push_back(2 * v[i] + v[i + 1]);
  }
  return a;
}

QuantizeResult quantize(const NetworkParams& params, const QuantSpec& spec) {
  if (!(spec.weight_scale > 0.0) || !(spec.bias_scale > 0.0)) {
    throw std::invalid_argument("quantization scales must be positive");
  }
  QuantizeResult out{params, 0};
  const double wmax = spec.max_weight_level();
  for (double& w : out.params.weights) {
    double level = std::nearbyint(w / spec.weight_scale);
    if (std::abs(level) > wmax) {
      level = std::copysign(wmax, level);
      ++out.saturated;
    }
    w = level * spec.weight_scale;
  }
  const double bmax = spec.max_bias_level();
  auto quantize_bias = [&](double& x) {
    double level = std::nearbyint((x - spec.bias_offset) / spec.bias_scale);
    if (level < 0.0 || level > bmax) {
      level = std::clamp(level, 0.0, bmax);
      ++out.saturated;
    }
    x = spec.bias_offset + level * spec.bias_scale;
  };
  for (double& x : out.params.d) quantize_bias(x);
  for (double& x : out.params.b) quantize_bias(x);
  out.params.quant = spec;
  return out;
}

bool on_quant_grid(const NetworkParams& params, const QuantSpec& spec, double tol) {
  for (double w : params.weights) {
    const double level = w / spec.weight_scale;
    if (std::abs(level - std::nearbyint(level)) > tol ||
        std::abs(std::nearbyint(level)) > spec.max_weight_level()) {
      return false;
    }
  }
  auto bias_ok = [&](double x) {
    const double level = (x - spec.bias_offset) / spec.bias_scale;
    const double r = std::nearbyint(level);
    return std::abs(level - r) <= tol && r >= 0.0 && r <= spec.max_bias_level();
  };
  return std::all_of(params.d.begin(), params.d.end(), bias_ok) &&
         std::all_of(params.b.begin(), params.b.end(), bias_ok);
}

NetworkParams init_params(const Topology& topology, std::uint64_t seed, InitScheme scheme) {
  NetworkParams params(topology);
  if (scheme.kind == InitScheme::Kind::zero) return params;
  if (!(scheme.epsilon > 0.0)) throw std::invalid_argument("uniform init needs epsilon > 0");
  Rng rng(derive_seed(seed, "init"));
  for (double& w : params.weights) w = scheme.epsilon * (2.0 * uniform01(rng) - 1.0);
  return params;
}

}  // namespace qs::net
