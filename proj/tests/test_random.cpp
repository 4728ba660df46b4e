#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/random/ensembles.hpp"
#include "gated_spectra/random/rng.hpp"
#include "gated_spectra/util/errors.hpp"

using namespace gspec;

namespace {

// Kolmogorov-Smirnov statistic against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

// alpha = 0.001
double ks_critical(std::size_t n) { return 1.95 / std::sqrt(static_cast<double>(n)); }

}  // namespace

TEST(Philox, KnownAnswer) {
  const auto out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
  const auto ff = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(ff[0], 0x408f276du);
  EXPECT_EQ(ff[1], 0x41c83b0eu);
  EXPECT_EQ(ff[2], 0xa20bc7c6u);
  EXPECT_EQ(ff[3], 0x6d5451fdu);
}

TEST(RngStream, ReproducibleAndDistinct) {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    seen.insert(x);
    seen.insert(c.next_u64());
    seen.insert(d.next_u64());
  }
  EXPECT_EQ(seen.size(), 300u);
}

TEST(RngStream, SubstreamsDependOnlyOnIndex) {
  const RngStream root(5, 0);
  RngStream s3 = root.substream(3);
  RngStream again = RngStream(5, 0).substream(3);
  RngStream other = root.substream(4);
  EXPECT_EQ(s3.next_u64(), again.next_u64());
  EXPECT_NE(s3.next_u64(), other.next_u64());
  // drawing from the parent does not move its children
  RngStream parent(5, 0);
  parent.next_u64();
  RngStream late = parent.substream(3);
  RngStream fresh = RngStream(5, 0).substream(3);
  EXPECT_EQ(late.next_u64(), fresh.next_u64());
}

TEST(RngStream, UniformIsOpenAndUniform) {
  RngStream rng(9, 0);
  std::vector<double> u(20000);
  for (auto& x : u) {
    x = rng.uniform();
    ASSERT_GT(x, 0.0);
    ASSERT_LT(x, 1.0);
  }
  EXPECT_LT(ks_statistic(u, [](double x) { return x; }), ks_critical(u.size()));
}

TEST(RngStream, NormalPassesKs) {
  RngStream rng(10, 0);
  std::vector<double> z(20000);
  for (auto& x : z) x = rng.normal();
  const double d = ks_statistic(z, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
  EXPECT_LT(d, ks_critical(z.size()));
  double m = 0.0, v = 0.0;
  for (double x : z) m += x;
  m /= z.size();
  for (double x : z) v += (x - m) * (x - m);
  v /= z.size() - 1;
  EXPECT_NEAR(m, 0.0, 4.0 / std::sqrt(20000.0));
  EXPECT_NEAR(v, 1.0, 4.0 * std::sqrt(2.0 / 20000.0));
}

TEST(Ensembles, GaussianEntriesHaveRequestedScale) {
  RngStream rng(11, 0);
  const Matrix g = sample_gaussian(100, 100, 0.25, rng);
  double ss = 0.0;
  for (double x : g.entries()) ss += x * x;
  EXPECT_NEAR(std::sqrt(ss / 1e4), 0.25, 0.25 * 4.0 * std::sqrt(0.5 / 1e4));
}

TEST(Ensembles, GateRankDistribution) {
  RngStream rng(12, 0);
  const std::size_t n = 40, trials = 4000;
  double mean = 0.0;
  for (std::size_t t = 0; t < trials; ++t) mean += static_cast<double>(sample_p_gate(n, 0.3, rng).rank());
  mean /= trials;
  EXPECT_NEAR(mean, 12.0, 4.0 * std::sqrt(n * 0.3 * 0.7 / trials));
  EXPECT_EQ(sample_p_gate(n, 1.0, rng), Gate::identity(n));
}

TEST(Ensembles, ConditionedGateRespectsRankAndAcceptanceRate) {
  RngStream rng(13, 0);
  const std::size_t n = 10, r = 5;
  const double p = 0.4;
  std::size_t draws = 0, accepted = 0;
  for (int t = 0; t < 3000; ++t) {
    std::size_t attempts = 0;
    const Gate g = sample_rp_gate_counted(n, r, p, rng, attempts);
    EXPECT_GE(g.rank(), r);
    draws += attempts;
    ++accepted;
  }
  const double q = rank_acceptance_probability(n, r, p);
  const double observed = static_cast<double>(accepted) / static_cast<double>(draws);
  EXPECT_NEAR(observed, q, 4.0 * std::sqrt(q * (1 - q) / static_cast<double>(draws)));
  // P(Bin(10, 0.4) >= 5) = 0.3668967424
  EXPECT_NEAR(q, 0.3668967424, 1e-9);
}

TEST(Ensembles, ConditionedGateGivesUpWithDiagnostic) {
  RngStream rng(14, 0);
  EXPECT_THROW(sample_rp_gate(64, 64, 0.5, rng, 1000), NumericalFailure);
  EXPECT_THROW(sample_rp_gate(4, 5, 0.5, rng), DomainError);
}

TEST(Ensembles, GateAccessors) {
  const Gate g = Gate::from_bits({1, 0, 1, 1});
  EXPECT_EQ(g.rank(), 3u);
  EXPECT_EQ(g.support(), (std::vector<std::size_t>{0, 2, 3}));
  EXPECT_EQ(g.factors(), (std::vector<double>{1, 0, 1, 1}));
  EXPECT_EQ(Gate::zero(3).rank(), 0u);
  GatedLayer layer{g, Matrix{{1, 1, 1, 1}, {2, 2, 2, 2}, {3, 3, 3, 3}, {4, 4, 4, 4}}};
  EXPECT_EQ(layer.matrix().row(1)[0], 0.0);
  EXPECT_EQ(layer.matrix().row(2)[0], 3.0);
}

TEST(Ensembles, HaarOrthogonalMoments) {
  RngStream rng(15, 0);
  const std::size_t n = 6, trials = 4000;
  double m11 = 0.0, m11sq = 0.0;
  int negative_det = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Matrix q = sample_haar_orthogonal(n, rng);
    ASSERT_LT(orthonormality_defect(q), 1e-13);
    m11 += q(0, 0);
    m11sq += q(0, 0) * q(0, 0);
    negative_det += determinant(q) < 0.0;
  }
  // E Q11 = 0, E Q11^2 = 1/n, Var(Q11^2) = 2(n-1)/(n^2(n+2))
  EXPECT_NEAR(m11 / trials, 0.0, 4.0 * std::sqrt(1.0 / n / trials));
  const double sd = std::sqrt(2.0 * (n - 1) / (n * n * (n + 2.0)) / trials);
  EXPECT_NEAR(m11sq / trials, 1.0 / n, 4.0 * sd);
  EXPECT_NEAR(negative_det / double(trials), 0.5, 4.0 * std::sqrt(0.25 / trials));
}

TEST(Ensembles, LayerEnsembleValidation) {
  EXPECT_THROW((LayerEnsemble{4, 5, 0.5, 1.0}.validate()), DomainError);
  EXPECT_THROW((LayerEnsemble{4, 1, 0.0, 1.0}.validate()), DomainError);
  EXPECT_THROW((LayerEnsemble{4, 1, 0.5, -1.0}.validate()), DomainError);
  EXPECT_NO_THROW((LayerEnsemble{4, 4, 1.0, 1.0}.validate()));
}
