#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qsampler/quantum.hpp"
#include "qsampler/rng.hpp"
#include "qsampler/trainer.hpp"

using namespace qs;
using namespace qs::train;

namespace {

net::NetworkParams random_net(net::TopologyKind kind, std::vector<int> hidden, std::uint64_t seed) {
  net::NetworkParams p(net::build_topology(kind, 4, hidden));
  Rng rng(seed);
  for (double& w : p.weights) w = 2 * uniform01(rng) - 1;
  for (double& x : p.d) x = uniform01(rng) - 0.5;
  for (double& x : p.b) x = uniform01(rng) - 0.5;
  return p;
}

double loss(const net::NetworkParams& p, const std::vector<double>& target) {
  return quantum::dkl(target, sampling::exact_distribution(p).p_visible);
}

}  // namespace

TEST(Target, Distributions) {
  const auto& povm = quantum::tetrahedral_povm();
  const auto pb = target_distribution(TargetSpec::bell(), povm);
  const double expected24[4][4] = {{3, 1, 1, 1}, {1, 3, 1, 1}, {1, 1, 1, 3}, {1, 1, 3, 1}};
  for (std::size_t v = 0; v < 16; ++v) {
    const auto a = net::decode_visible(sampling::visible_bits(v, 4));
    EXPECT_NEAR(pb[v], expected24[a[1]][a[0]] / 24.0, 1e-12);
  }
  for (double x : target_distribution(TargetSpec::werner(0.0), povm)) EXPECT_NEAR(x, 1.0 / 16, 1e-14);

  const auto g = target_distribution(TargetSpec::ghz(3), povm);
  ASSERT_EQ(g.size(), 64u);
  const auto rho = quantum::ghz_state(3).entries();
  for (std::size_t idx = 0; idx < 64; ++idx) {
    quantum::CMatrix m = povm.elements[idx / 16];
    m = quantum::kron(m, povm.elements[(idx / 4) % 4]);
    m = quantum::kron(m, povm.elements[idx % 4]);
    EXPECT_NEAR(g[idx], (rho * m).trace().real(), 1e-12);
  }
}

TEST(Gradient, ZeroWhenBatchMatchesTarget) {
  const auto p = random_net(net::TopologyKind::restricted, {3}, 1);
  sampling::SampleBatch batch(p.topology.n_units(), sampling::Backend::gibbs, 0);
  std::vector<double> p_star(16, 0.0);
  const std::vector<int> counts{3, 1, 0, 5, 2, 0, 0, 0, 1, 0, 0, 4, 0, 0, 0, 4};
  for (std::size_t v = 0; v < 16; ++v) {
    for (int k = 0; k < counts[v]; ++k) {
      auto bits = sampling::visible_bits(v, 4);
      bits.push_back(static_cast<std::uint8_t>(k % 2));
      bits.push_back(1);
      bits.push_back(0);
      batch.append(bits);
    }
    p_star[v] = counts[v] / 20.0;
  }
  const auto g = estimate_gradient(batch, p_star, p);
  EXPECT_NEAR(g.norm(), 0.0, 1e-15);
}

TEST(Gradient, ExactMatchesClosedForm) {
  const auto p = random_net(net::TopologyKind::restricted, {5}, 2);
  const auto target = target_distribution(TargetSpec::bell(), quantum::tetrahedral_povm());
  const auto ex = sampling::exact_distribution_bruteforce(p);
  const auto g = exact_gradient(sampling::exact_distribution(p), target, p);
  for (std::size_t e = 0; e < p.weights.size(); ++e) {
    double ref = 0.0;
    for (std::size_t v = 0; v < 16; ++v) ref += (ex.p_visible[v] - target[v]) * ex.edge_moment(v, e);
    EXPECT_NEAR(g.dW[e], ref, 1e-10);
  }
}

TEST(Gradient, FiniteDifferences) {
  const auto target = target_distribution(TargetSpec::bell(), quantum::tetrahedral_povm());
  const std::vector<std::pair<net::TopologyKind, std::vector<int>>> kinds{
      {net::TopologyKind::restricted, {4}},
      {net::TopologyKind::visible_lateral, {4}},
      {net::TopologyKind::deep, {4, 3}}};
  const double h = 1e-5;
  for (const auto& [kind, hidden] : kinds) {
    const auto p = random_net(kind, hidden, 7);
    const auto g = exact_gradient(sampling::exact_distribution(p), target, p);
    for (std::size_t e = 0; e < p.weights.size(); ++e) {
      auto a = p, b = p;
      a.weights[e] += h;
      b.weights[e] -= h;
      EXPECT_NEAR(g.dW[e], (loss(a, target) - loss(b, target)) / (2 * h), 1e-6);
    }
    for (std::size_t i = 0; i < p.d.size(); ++i) {
      auto a = p, b = p;
      a.d[i] += h;
      b.d[i] -= h;
      EXPECT_NEAR(g.dd[i], (loss(a, target) - loss(b, target)) / (2 * h), 1e-6);
    }
    for (std::size_t j = 0; j < p.b.size(); ++j) {
      auto a = p, b = p;
      a.b[j] += h;
      b.b[j] -= h;
      EXPECT_NEAR(g.db[j], (loss(a, target) - loss(b, target)) / (2 * h), 1e-6);
    }
  }
}

TEST(Gradient, SampledApproachesExact) {
  const auto p = random_net(net::TopologyKind::restricted, {4}, 3);
  const auto target = target_distribution(TargetSpec::bell(), quantum::tetrahedral_povm());
  const auto ge = exact_gradient(sampling::exact_distribution(p), target, p);
  const auto gs = estimate_gradient(sampling::gibbs_sample(p, 400000, {}, 5), target, p);
  for (std::size_t e = 0; e < ge.dW.size(); ++e) EXPECT_NEAR(gs.dW[e], ge.dW[e], 0.01);
}

TEST(LearningRate, Schedule) {
  TrainConfig cfg;
  EXPECT_NEAR(learning_rate(1, cfg), std::exp(-0.001), 1e-15);
  EXPECT_NEAR(learning_rate(1, cfg), 0.999, 1e-3);
  EXPECT_DOUBLE_EQ(learning_rate(10000, cfg), 0.001);
  EXPECT_DOUBLE_EQ(learning_rate(100000, cfg), 0.001);
}

TEST(Adam, FirstStepMagnitude) {
  TrainConfig cfg;
  net::NetworkParams p(net::build_topology(net::TopologyKind::restricted, 2, {1}));
  GradientEstimate g{{0.5, -3.0}, {1e-3, 0.0}, {-20.0}};
  AdamState st;
  const auto q = adam_step(p, st, g, 1, cfg);
  const double eta = cfg.step_scale * learning_rate(1, cfg);
  EXPECT_NEAR(q.weights[0], -eta, 1e-6);
  EXPECT_NEAR(q.weights[1], eta, 1e-6);
  EXPECT_NEAR(q.d[0], -eta, 1e-4);
  EXPECT_EQ(q.d[1], 0.0);
  EXPECT_NEAR(q.b[0], eta, 1e-6);
}

TEST(Adam, ZeroGradientKeepsParameters) {
  TrainConfig cfg;
  const auto p = random_net(net::TopologyKind::restricted, {3}, 4);
  GradientEstimate g{std::vector<double>(p.weights.size()), std::vector<double>(4), std::vector<double>(3)};
  AdamState st;
  auto q = p;
  for (int t = 1; t <= 50; ++t) q = adam_step(q, st, g, t, cfg);
  EXPECT_EQ(q.weights, p.weights);
  EXPECT_EQ(q.d, p.d);
  EXPECT_EQ(q.b, p.b);
}

TEST(Metrics, PerfectModel) {
  const auto target = target_distribution(TargetSpec::bell(), quantum::tetrahedral_povm());
  const std::vector<double> thetas{0.0, std::numbers::pi / 4};
  const auto m = compute_metrics(target, TargetSpec::bell(), thetas);
  EXPECT_NEAR(m.fidelity, 1.0, 1e-9);
  EXPECT_EQ(m.dkl, 0.0);
  EXPECT_NEAR(m.witness[0], 2.0, 1e-12);
  EXPECT_NEAR(m.witness[1], 2 * std::numbers::sqrt2, 1e-12);
}

TEST(Train, ExactBellShortRunImproves) {
  TrainConfig cfg;
  cfg.backend = sampling::Backend::exact;
  cfg.epochs = 300;
  const auto r = train::train(cfg);
  ASSERT_EQ(r.records.size(), 300u);
  EXPECT_LT(r.records.back().dkl, r.records.front().dkl);
  EXPECT_GT(r.records.back().fidelity, 0.7);
  const auto again = train::train(cfg);
  EXPECT_EQ(again.final_params.weights, r.final_params.weights);
}

TEST(Train, QuantizedStaysOnGrid) {
  TrainConfig cfg;
  cfg.backend = sampling::Backend::exact;
  cfg.quantized = true;
  cfg.epochs = 50;
  const auto r = train::train(cfg);
  EXPECT_TRUE(net::on_quant_grid(r.final_params, cfg.quant));
  EXPECT_TRUE(r.final_params.quant.has_value());
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.eta_min = 2.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  TrainConfig ghz;
  ghz.target = TargetSpec::ghz(3);
  EXPECT_EQ(ghz.effective_samples(), 225000u);
  EXPECT_EQ(TrainConfig{}.effective_samples(), 125000u);
}
