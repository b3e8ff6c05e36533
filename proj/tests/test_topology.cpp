#include <gtest/gtest.h>

#include <cmath>

#include "qsampler/rng.hpp"
#include "qsampler/topology.hpp"

using namespace qs;
using namespace qs::net;

TEST(Topology, EdgeCounts) {
  EXPECT_EQ(build_topology(TopologyKind::restricted, 4, {20}).edges().size(), 80u);
  EXPECT_EQ(build_topology(TopologyKind::visible_lateral, 4, {20}).edges().size(), 86u);
  EXPECT_EQ(build_topology(TopologyKind::deep, 4, {20, 10}).edges().size(), 280u);
}

TEST(Topology, StructureRules) {
  const auto deep = build_topology(TopologyKind::deep, 4, {5, 3});
  for (const auto& e : deep.edges()) {
    EXPECT_LT(e.a, e.b);
    const bool vis_h1 = e.a < 4 && e.b >= 4 && e.b < 9;
    const bool h1_h2 = e.a >= 4 && e.a < 9 && e.b >= 9;
    EXPECT_TRUE(vis_h1 || h1_h2);
  }
  EXPECT_THROW(build_topology(TopologyKind::restricted, 3, {4}), std::invalid_argument);
  EXPECT_THROW(build_topology(TopologyKind::deep, 4, {4}), std::invalid_argument);
  EXPECT_THROW(build_topology(TopologyKind::restricted, 4, {0}), std::invalid_argument);
  EXPECT_EQ(parse_topology_kind(to_string(TopologyKind::visible_lateral)), TopologyKind::visible_lateral);
}

TEST(Energy, Examples) {
  NetworkParams p(build_topology(TopologyKind::restricted, 4, {3}));
  Rng rng(3);
  for (double& w : p.weights) w = uniform01(rng) - 0.5;
  for (double& x : p.d) x = uniform01(rng) - 0.5;
  for (double& x : p.b) x = uniform01(rng) - 0.5;
  const std::vector<std::uint8_t> zv(4, 0), zh(3, 0);
  EXPECT_EQ(energy(p, zv, zh), 0.0);
  std::vector<std::uint8_t> v1{0, 0, 1, 0};
  EXPECT_NEAR(energy(p, v1, zh), -p.d[2], 1e-15);

  for (std::uint64_t state = 0; state < (1u << 7); ++state) {
    std::vector<std::uint8_t> v(4), h(3);
    for (int u = 0; u < 4; ++u) v[u] = (state >> u) & 1u;
    for (int j = 0; j < 3; ++j) h[j] = (state >> (4 + j)) & 1u;
    double naive = 0.0;
    for (int i = 0; i < 4; ++i) naive -= v[i] * p.d[i];
    for (int j = 0; j < 3; ++j) naive -= h[j] * p.b[j];
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
      const auto& e = p.topology.edges()[k];
      const int sa = e.a < 4 ? v[e.a] : h[e.a - 4];
      const int sb = e.b < 4 ? v[e.b] : h[e.b - 4];
      naive -= sa * p.weights[k] * sb;
    }
    EXPECT_NEAR(energy(p, v, h), naive, 1e-12);
    EXPECT_NEAR(energy_packed(p, state), naive, 1e-12);
  }
}

TEST(Encoding, Examples) {
  const std::vector<int> a{2, 3};
  EXPECT_EQ(encode_outcomes(a), (std::vector<std::uint8_t>{1, 0, 1, 1}));
  const std::vector<int> z{0, 0};
  EXPECT_EQ(encode_outcomes(z), (std::vector<std::uint8_t>(4, 0)));
  for (int a1 = 0; a1 < 4; ++a1)
    for (int a2 = 0; a2 < 4; ++a2) {
      const std::vector<int> o{a1, a2};
      EXPECT_EQ(decode_visible(encode_outcomes(o)), o);
    }
  const std::vector<int> bad{4};
  EXPECT_THROW(encode_outcomes(bad), std::out_of_range);
}

TEST(Quantize, GridAndSaturation) {
  const QuantSpec spec;
  EXPECT_EQ(spec.max_weight_level(), 31);
  EXPECT_EQ(spec.max_bias_level(), 1023);
  NetworkParams p(build_topology(TopologyKind::restricted, 2, {2}));
  p.weights = {0.0, 100 * spec.weight_scale, -100 * spec.weight_scale, 0.3};
  p.d = {0.0, 100.0};
  p.b = {-100.0, 0.01};
  const auto q = quantize(p, spec);
  EXPECT_EQ(q.params.weights[0], 0.0);
  EXPECT_NEAR(q.params.weights[1], 31 * spec.weight_scale, 1e-12);
  EXPECT_NEAR(q.params.weights[2], -31 * spec.weight_scale, 1e-12);
  EXPECT_NEAR(q.params.weights[3], std::round(0.3 / spec.weight_scale) * spec.weight_scale, 1e-12);
  EXPECT_EQ(q.saturated, 4u);
  EXPECT_TRUE(on_quant_grid(q.params, spec));
  EXPECT_FALSE(on_quant_grid(p, spec));
  EXPECT_NEAR(q.params.d[0], 0.0, spec.bias_scale / 2 + 1e-12);
  const auto qq = quantize(q.params, spec);
  EXPECT_EQ(qq.params.weights, q.params.weights);
  EXPECT_EQ(qq.params.d, q.params.d);
}

TEST(Init, Examples) {
  const auto topo = build_topology(TopologyKind::restricted, 4, {20});
  const auto z = init_params(topo, 5, {InitScheme::Kind::zero, 0.01});
  for (double w : z.weights) EXPECT_EQ(w, 0.0);
  for (double x : z.d) EXPECT_EQ(x, 0.0);
  const auto a = init_params(topo, 9);
  const auto b = init_params(topo, 9);
  EXPECT_EQ(a.weights, b.weights);
  for (double w : a.weights) EXPECT_LE(std::abs(w), 0.01);
  for (double x : a.b) EXPECT_EQ(x, 0.0);
  EXPECT_NE(init_params(topo, 10).weights, a.weights);
}
