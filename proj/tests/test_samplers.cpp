#include <gtest/gtest.h>

#include <cmath>

#include "qsampler/kernels.hpp"
#include "qsampler/lif.hpp"
#include "qsampler/quantum.hpp"
#include "qsampler/rng.hpp"
#include "qsampler/samplers.hpp"

using namespace qs;
using namespace qs::sampling;

namespace {

net::NetworkParams random_net(net::TopologyKind kind, int nv, std::vector<int> hidden, std::uint64_t seed,
                              double scale = 1.0) {
  net::NetworkParams p(net::build_topology(kind, nv, hidden));
  Rng rng(seed);
  for (double& w : p.weights) w = scale * (2 * uniform01(rng) - 1);
  for (double& x : p.d) x = scale * (uniform01(rng) - 0.5);
  for (double& x : p.b) x = scale * (uniform01(rng) - 0.5);
  return p;
}

std::vector<double> joint_exact(const net::NetworkParams& p) {
  std::vector<double> out(std::size_t{1} << p.topology.n_units());
  double z = 0.0;
  for (std::uint64_t s = 0; s < out.size(); ++s) {
    out[s] = std::exp(-net::energy_packed(p, s));
    z += out[s];
  }
  for (double& x : out) x /= z;
  return out;
}

}  // namespace

TEST(Batch, MarginalExamples) {
  SampleBatch one(3, Backend::gibbs, 0);
  one.append(std::vector<std::uint8_t>{1, 0, 1});
  const auto m = empirical_marginal(one, 2, Marginal::visible);
  EXPECT_EQ(m, (std::vector<double>{0, 0, 1, 0}));

  SampleBatch b(2, Backend::gibbs, 0);
  for (int i = 0; i < 3; ++i) b.append(std::vector<std::uint8_t>{0, 0});
  b.append(std::vector<std::uint8_t>{1, 0});
  const auto j = empirical_marginal(b, 1, Marginal::visible);
  EXPECT_DOUBLE_EQ(j[0], 0.75);
  EXPECT_DOUBLE_EQ(j[1], 0.25);
}

TEST(Batch, VisibleIndexMatchesOutcomeIndex) {
  for (std::size_t idx = 0; idx < 16; ++idx) {
    const auto bits = visible_bits(idx, 4);
    const auto a = net::decode_visible(bits);
    EXPECT_EQ(static_cast<std::size_t>(4 * a[0] + a[1]), idx);
    SampleBatch b(4, Backend::exact, 0);
    b.append(bits);
    EXPECT_EQ(visible_index(b.row(0), 4), idx);
  }
}

TEST(Exact, ZeroParamsUniform) {
  net::NetworkParams p(net::build_topology(net::TopologyKind::restricted, 4, {5}));
  for (double x : exact_distribution(p).p_visible) EXPECT_NEAR(x, 1.0 / 16, 1e-15);
}

TEST(Exact, MatchesBruteForce) {
  const std::vector<std::pair<net::TopologyKind, std::vector<int>>> cases{
      {net::TopologyKind::restricted, {6}},
      {net::TopologyKind::visible_lateral, {5}},
      {net::TopologyKind::deep, {4, 3}}};
  for (const auto& [kind, hidden] : cases) {
    const auto p = random_net(kind, 4, hidden, 11);
    const auto a = exact_distribution(p);
    const auto b = exact_distribution_bruteforce(p);
    for (std::size_t v = 0; v < 16; ++v) EXPECT_NEAR(a.p_visible[v], b.p_visible[v], 1e-12);
    for (std::size_t i = 0; i < a.unit_given_v.size(); ++i) EXPECT_NEAR(a.unit_given_v[i], b.unit_given_v[i], 1e-12);
    for (std::size_t i = 0; i < a.edge_given_v.size(); ++i) EXPECT_NEAR(a.edge_given_v[i], b.edge_given_v[i], 1e-12);
  }
}

TEST(Exact, StrongCouplingLimit) {
  net::NetworkParams p(net::build_topology(net::TopologyKind::visible_lateral, 2, {1}));
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    const auto& e = p.topology.edges()[k];
    p.weights[k] = (e.a == 0 && e.b == 1) ? 40.0 : 0.0;
  }
  // 0/1 units: biases -W/2 make it the symmetric +-1 pair.
  p.d = {-20.0, -20.0};
  const auto ex = exact_distribution(p);
  EXPECT_NEAR(ex.p_visible[0], 0.5, 1e-6);
  EXPECT_NEAR(ex.p_visible[3], 0.5, 1e-6);
}

TEST(Gibbs, ZeroParamsUniformWithinBounds) {
  net::NetworkParams p(net::build_topology(net::TopologyKind::restricted, 4, {4}));
  const std::size_t s = 200000;
  const auto m = empirical_marginal(gibbs_sample(p, s, {}, 3), 4, Marginal::visible);
  const double sigma = std::sqrt((1.0 / 16) * (15.0 / 16) / s);
  for (double x : m) EXPECT_NEAR(x, 1.0 / 16, 3 * sigma);
}

TEST(Gibbs, ConvergesToExact) {
  const auto p = random_net(net::TopologyKind::restricted, 4, {8}, 5);
  const auto ex = exact_distribution(p);
  const auto m = empirical_marginal(gibbs_sample(p, 200000, {}, 17), 4, Marginal::visible);
  EXPECT_LT(quantum::dkl(ex.p_visible, m), 5e-3);
}

TEST(Gibbs, JointTrendAllTopologies) {
  const std::vector<std::pair<net::TopologyKind, std::vector<int>>> cases{
      {net::TopologyKind::restricted, {4}},
      {net::TopologyKind::visible_lateral, {4}},
      {net::TopologyKind::deep, {3, 2}}};
  for (const auto& [kind, hidden] : cases) {
    const auto p = random_net(kind, 4, hidden, 23);
    const auto exact = joint_exact(p);
    double prev = 1e9;
    for (std::size_t s : {1000u, 10000u, 100000u, 1000000u}) {
      const auto m = empirical_marginal(gibbs_sample(p, s, {}, 29), p.topology.n_units(), Marginal::joint);
      const double d = quantum::dkl(m, exact);
      if (s > 1000) EXPECT_LT(d, prev) << to_string(kind) << " s=" << s;
      prev = quantum::is_infinite(d) ? 1e9 : d;
    }
    EXPECT_LT(prev, 1e-2) << to_string(kind);
  }
}

TEST(Gibbs, Deterministic) {
  const auto p = random_net(net::TopologyKind::visible_lateral, 4, {6}, 8);
  GibbsConfig cfg;
  cfg.chains = 4;
  auto a = gibbs_sample(p, 5000, cfg, 99);
  auto b = gibbs_sample(p, 5000, cfg, 99);
  EXPECT_EQ(a.words(), b.words());
  auto c = gibbs_sample(p, 5000, cfg, 100);
  EXPECT_NE(a.words(), c.words());
}

TEST(Kernels, SerialAndOmpAgree) {
  const auto p = random_net(net::TopologyKind::restricted, 6, {12}, 2);
  const auto csr = kernels::CsrNet::from(p);
  GibbsConfig cfg;
  cfg.chains = 3;
  const auto plans = kernels::plan_chains(3000, cfg.chains, 4);
  std::vector<std::uint64_t> a(3000), b(3000);
  kernels::serial::gibbs_chains(csr, plans, cfg, 1, a.data());
  kernels::omp::gibbs_chains(csr, plans, cfg, 1, b.data());
  EXPECT_EQ(a, b);

  SampleBatch batch(p.topology.n_units(), Backend::gibbs, 4);
  batch.words() = a;
  batch.set_size(3000);
  const auto c1 = kernels::serial::count_batch(batch, p.topology);
  const auto c2 = kernels::omp::count_batch(batch, p.topology);
  EXPECT_EQ(c1.visible, c2.visible);
  EXPECT_EQ(c1.units, c2.units);
  EXPECT_EQ(c1.edges, c2.edges);
  EXPECT_EQ(c1.total, 3000u);
}

TEST(SampleVisible, FollowsTable) {
  const std::vector<double> probs{0.5, 0.25, 0.125, 0.125};
  const auto m = empirical_marginal(sample_visible(probs, 2, 100000, 1), 2, Marginal::visible);
  EXPECT_LT(quantum::dkl(probs, m), 1e-3);
}

class Lif : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { cal_ = lif::lif_calibrate(lif::LifConfig{}, 11, 1); }
  static lif::LifConfig calibrated() {
    lif::LifConfig cfg;
    cfg.calibration = cal_;
    return cfg;
  }
  static inline lif::Calibration cal_;
};

TEST_F(Lif, CalibrationFit) {
  EXPECT_LT(cal_.residual_rms, 0.02);
  EXPECT_EQ(cal_.leak.size(), 11u);
  EXPECT_LT(cal_.p_on.front(), 0.1);
  EXPECT_GT(cal_.p_on.back(), 0.9);
  EXPECT_NEAR(cal_.logistic(cal_.u0), 0.5, 1e-12);
  EXPECT_GT(cal_.alpha, 0.0);
}

TEST_F(Lif, TonicFiringAtRefractoryPeriod) {
  net::NetworkParams p(net::build_topology(net::TopologyKind::restricted, 2, {1}));
  p.d = {1e3, 1e3};
  p.b = {1e3};
  const auto cfg = calibrated();
  const auto run = lif::lif_sample(p, cfg, 2000.0, 3);
  std::vector<double> last(3, -1.0);
  double sum = 0.0;
  int n = 0;
  for (const auto& sp : run.spikes) {
    if (sp.unit == 0 && last[0] >= 0) {
      sum += sp.time_us - last[0];
      ++n;
    }
    last[static_cast<std::size_t>(sp.unit)] = sp.time_us;
  }
  ASSERT_GT(n, 10);
  EXPECT_NEAR(sum / n, cfg.tau_ref, 1.0);
  const auto m = empirical_marginal(run.batch, 2, Marginal::visible);
  EXPECT_NEAR(m[3], 1.0, 1e-12);
}

TEST_F(Lif, ZeroBiasHalfActive) {
  net::NetworkParams p(net::build_topology(net::TopologyKind::restricted, 2, {1}));
  const auto run = lif::lif_sample(p, calibrated(), 40000.0, 5, false);
  double on = 0.0;
  for (std::size_t s = 0; s < run.batch.size(); ++s)
    for (int u = 0; u < 3; ++u) on += run.batch.unit(s, u);
  EXPECT_NEAR(on / (3.0 * run.batch.size()), 0.5, 0.02);
}

TEST_F(Lif, RandomNetCloseToExact) {
  const auto p = random_net(net::TopologyKind::restricted, 4, {8}, 5);
  const auto ex = exact_distribution(p);
  const auto run = lif::lif_sample(p, calibrated(), 200000.0, 7, false);
  EXPECT_LT(quantum::dkl(ex.p_visible, empirical_marginal(run.batch, 4, Marginal::visible)), 0.05);
}

TEST_F(Lif, DeterministicAndRequiresCalibration) {
  const auto p = random_net(net::TopologyKind::restricted, 2, {3}, 1);
  auto a = lif::lif_sample(p, calibrated(), 1000.0, 3);
  auto b = lif::lif_sample(p, calibrated(), 1000.0, 3);
  EXPECT_EQ(a.batch.words(), b.batch.words());
  EXPECT_EQ(a.spikes.size(), b.spikes.size());
  EXPECT_THROW(lif::lif_sample(p, lif::LifConfig{}, 1000.0, 3), std::exception);
}

TEST_F(Lif, NyquistOrdering) {
  const auto p = random_net(net::TopologyKind::restricted, 4, {8}, 5);
  const auto ex = exact_distribution(p);
  const std::vector<double> dts{1.0, 5.0, 10.0};
  const auto rows = lif::nyquist_scan(p, calibrated(), dts, 5000, ex.p_visible, 13);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_GE(rows[0].dkl, rows[1].dkl);
}
