#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "obf/bayes.hpp"
#include "oracles/quadrature.hpp"

namespace {

#include "data/scalar_reference.inc"

using obf::ClassStats;
using obf::NIWHyper;

ClassStats cls(std::size_t n, double mean, std::optional<double> var) { return {n, mean, var}; }

NIWHyper pp_block() { return {0.5, 3.0, 0.0, 0.1}; }

// log density of a location-scale Student t, written directly with std::lgamma.
double log_student_t(double x, double df, double loc, double scale) {
  const double z = (x - loc) / scale;
  return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi) -
         std::log(scale) - 0.5 * (df + 1.0) * std::log1p(z * z / df);
}

double quad(const NIWHyper& h, const std::vector<double>& xs) {
  return oracle::log_marginal_quadrature(h.s, h.kappa, h.m, h.nu, xs);
}

ClassStats stats_of(const std::vector<double>& xs) { return obf::detail::moments(xs); }

}  // namespace

TEST(UpdateHyper, ProperExample) {
  const auto p = obf::update_hyper(pp_block(), cls(4, 1.0, 0.25));
  EXPECT_DOUBLE_EQ(p.kappa_star, 7.0);
  EXPECT_DOUBLE_EQ(p.nu_star, 4.1);
  EXPECT_NEAR(p.m_star, 4.0 / 4.1, 1e-15);
  EXPECT_NEAR(p.s_star, 0.5 + 0.75 + 0.4 / 4.1, 1e-14);
}

TEST(UpdateHyper, EmptySampleIsIdentity) {
  const NIWHyper h{1.3, 2.5, -0.7, 0.4};
  const auto p = obf::update_hyper(h, cls(0, 0.0, std::nullopt));
  EXPECT_EQ(p.kappa_star, h.kappa);
  EXPECT_EQ(p.nu_star, h.nu);
  EXPECT_EQ(p.m_star, h.m);
  EXPECT_EQ(p.s_star, h.s);
}

TEST(UpdateHyper, JeffreysExample) {
  const auto p = obf::update_hyper(NIWHyper{}, cls(5, 2.0, 1.5));
  EXPECT_EQ(p.kappa_star, 5.0);
  EXPECT_EQ(p.nu_star, 5.0);
  EXPECT_EQ(p.m_star, 2.0);
  EXPECT_DOUBLE_EQ(p.s_star, 6.0);
}

TEST(UpdateHyper, ConstantFeatureUnderJeffreysIsDegenerate) {
  try {
    obf::update_hyper(NIWHyper{}, cls(4, 3.0, 0.0), "f7 class 0");
    FAIL() << "expected DegenerateData";
  } catch (const obf::Error& e) {
    EXPECT_EQ(e.kind(), obf::ErrorKind::DegenerateData);
    EXPECT_NE(std::string(e.what()).find("f7 class 0"), std::string::npos);
  }
}

TEST(LogMarginal, EmptySampleIsZeroForProperPriors) {
  for (const NIWHyper& h : {pp_block(), NIWHyper{2.0, 2.0, 1.0, 1.0}, NIWHyper{0.01, 9.0, -3.0, 20.0}})
    EXPECT_NEAR(obf::log_marginal(h, cls(0, 0.0, std::nullopt)), 0.0, 1e-13);
}

TEST(LogMarginal, MatchesQuadratureOnTwoPoints) {
  const std::vector<double> xs = {0.0, 1.0};
  const double want = quad(pp_block(), xs);
  EXPECT_NEAR(obf::log_marginal(pp_block(), stats_of(xs)), want, 1e-6 * std::fabs(want));
}

TEST(LogMarginal, SinglePointIsStudentPriorPredictive) {
  for (const NIWHyper& h : {pp_block(), NIWHyper{2.0, 5.0, 1.0, 0.7}, NIWHyper{0.3, 1.2, -2.0, 4.0}}) {
    for (double x : {-3.0, 0.0, 0.4, 2.5}) {
      const double scale = std::sqrt(h.s * (h.nu + 1.0) / (h.kappa * h.nu));
      EXPECT_NEAR(obf::log_marginal(h, cls(1, x, std::nullopt)), log_student_t(x, h.kappa, h.m, scale), 1e-12);
    }
  }
}

TEST(LogMarginal, RandomProperConfigsMatchQuadrature) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 40; ++trial) {
    const NIWHyper h{0.1 + 3.0 * u(rng), 0.5 + 6.0 * u(rng), 2.0 * u(rng) - 1.0, 0.05 + 3.0 * u(rng)};
    std::vector<double> xs(rng() % 9);
    for (auto& x : xs) x = 0.5 + 1.5 * z(rng);
    const double want = quad(h, xs);
    EXPECT_NEAR(obf::log_marginal(h, stats_of(xs)), want, 1e-6 + 1e-6 * std::fabs(want)) << "trial " << trial;
  }
}

TEST(DeriveLogL, UnitBlocks) {
  obf::PriorSpec p;
  p.good0 = p.good1 = p.bad = {2.0, 2.0, 0.0, 1.0};
  EXPECT_NEAR(obf::derive_logL(p), 0.5 * std::log(1.0 / (2.0 * std::numbers::pi)), 1e-15);
  EXPECT_NEAR(0.5 * std::log(1.0 / (2.0 * std::numbers::pi)), -0.91894, 1e-5);
}

TEST(DeriveLogL, ProperPresetAgainstHighPrecision) {
  EXPECT_NEAR(obf::derive_logL(obf::presets::pp()), kPpLogL, 1e-13 * std::fabs(kPpLogL));
}

TEST(DeriveLogL, ScalingIdentity) {
  obf::PriorSpec p;
  p.good0 = {0.7, 2.5, 0.0, 0.3};
  p.good1 = {1.1, 4.0, 0.1, 0.6};
  p.bad = {0.4, 3.0, 0.0, 0.2};
  const double base = obf::derive_logL(p);
  for (double c : {0.1, 3.0, 50.0}) {
    auto q = p;
    q.good0.s *= c;
    q.good1.s *= c;
    q.bad.s *= c;
    const double expected = (0.5 * p.good0.kappa + 0.5 * p.good1.kappa - 0.5 * p.bad.kappa) * std::log(c);
    EXPECT_NEAR(obf::derive_logL(q) - base, expected, 1e-12);
  }
}

TEST(DeriveLogL, ImproperBlocksRejected) {
  EXPECT_THROW(obf::derive_logL(obf::presets::jp()), obf::Error);
}

TEST(Resolve, MixedProprietyRejected) {
  auto p = obf::presets::pp();
  p.bad = NIWHyper{};
  try {
    obf::resolve(p);
    FAIL();
  } catch (const obf::Error& e) {
    EXPECT_EQ(e.kind(), obf::ErrorKind::ImproperPrior);
  }
}

TEST(Resolve, PiOutsideUnitIntervalRejected) {
  auto p = obf::presets::jp();
  p.pi = 1.5;
  EXPECT_THROW(obf::resolve(p), obf::Error);
}

TEST(Presets, PublishedValues) {
  const auto pp = obf::presets::pp();
  for (const auto* h : {&pp.good0, &pp.good1, &pp.bad}) {
    EXPECT_EQ(h->s, 0.5);
    EXPECT_EQ(h->kappa, 3.0);
    EXPECT_EQ(h->nu, 0.1);
  }
  EXPECT_EQ(pp.good0.m, 0.0);
  EXPECT_EQ(pp.bad.m, 0.0);
  EXPECT_EQ(pp.good1.m, 0.2);
  EXPECT_EQ(pp.pi, 0.005);
  const auto jp = obf::presets::jp();
  EXPECT_TRUE(jp.none_proper());
  EXPECT_EQ(jp.pi, 0.005);
  EXPECT_NEAR(jp.logL, std::log(0.1), 1e-15);
}

TEST(LogH, ZeroAndOnePriorArePassthrough) {
  const auto fs = obf::compute_stats_split(std::vector<double>{0, 1, 2}, std::vector<double>{5, 6, 8});
  auto p = obf::presets::pp();
  p.pi = 0.0;
  auto s = obf::log_h(p, fs);
  EXPECT_EQ(s.pi_star, 0.0);
  EXPECT_EQ(s.log_h, -INFINITY);
  p.pi = 1.0;
  s = obf::log_h(p, fs);
  EXPECT_EQ(s.pi_star, 1.0);
  EXPECT_EQ(s.log_h, INFINITY);
}

TEST(LogH, ProperToyMatchesQuadratureComposition) {
  const std::vector<double> c0 = {0.0, 1.0, 0.5, 1.5};
  const std::vector<double> c1 = {10.0, 11.0, 10.5, 11.5};
  std::vector<double> all = c0;
  all.insert(all.end(), c1.begin(), c1.end());
  auto p = obf::presets::pp();
  p.pi = 0.5;
  const double want = quad(p.good0, c0) + quad(p.good1, c1) - quad(p.bad, all);
  const double got = obf::log_h(p, obf::compute_stats_split(c0, c1)).log_h;
  EXPECT_GT(got, 5.0);
  EXPECT_NEAR(got, want, 1e-6 * std::fabs(want));
}

TEST(LogH, JeffreysToyMatchesScalarReference) {
  auto p = obf::presets::jp();
  p.pi = 0.5;
  const auto fs = obf::compute_stats_split(std::vector<double>{0.0, 1.0, 0.5, 1.5}, std::vector<double>{10.0, 11.0, 10.5, 11.5});
  const double got = obf::log_h(p, fs).log_h;
  EXPECT_GT(got, 5.0);
  EXPECT_NEAR(got, kJpToyLogH, 1e-12 * kJpToyLogH);
}

TEST(LogH, PriorOddsSeparation) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(3 + rng() % 6), b(3 + rng() % 6);
    for (auto& x : a) x = z(rng);
    for (auto& x : b) x = 0.4 + z(rng);
    const auto fs = obf::compute_stats_split(a, b);
    for (auto base : {obf::presets::pp(), obf::presets::jp()}) {
      auto pa = base;
      auto pb = base;
      pa.pi = 0.3;
      pb.pi = 0.001;
      const double diff = obf::log_h(pa, fs).log_h - obf::log_h(pb, fs).log_h;
      const double want = std::log(0.3 / 0.7) - std::log(0.001 / 0.999);
      EXPECT_NEAR(diff, want, 1e-12 * (1.0 + std::fabs(obf::log_h(pa, fs).log_h)));
    }
  }
}

TEST(LogH, ScoreFieldsConsistentAndMonotone) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  std::vector<obf::FeatureScore> scores;
  for (int f = 0; f < 200; ++f) {
    std::vector<double> a(10), b(10);
    const double shift = 0.3 * static_cast<double>(f % 20);
    for (auto& x : a) x = z(rng);
    for (auto& x : b) x = shift + z(rng);
    scores.push_back(obf::log_h(obf::presets::jp(), obf::compute_stats_split(a, b)));
  }
  for (const auto& s : scores) {
    EXPECT_EQ(s.pi_star, obf::special::logistic(s.log_h));
    EXPECT_EQ(s.log1m_pi_star, -obf::special::softplus(s.log_h));
    EXPECT_LE(s.log1m_pi_star, 0.0);
  }
  for (const auto& a : scores)
    for (const auto& b : scores)
      if (a.log_h > b.log_h) EXPECT_GE(a.pi_star, b.pi_star);
}

TEST(LogH, SaturatedScoresKeepLogComplement) {
  const auto s = obf::score_from_log_h(60.0);
  EXPECT_EQ(s.pi_star, 1.0);
  EXPECT_NEAR(s.log1m_pi_star, -60.0, 1e-12);
}

TEST(ComputeStats, HandExample) {
  const std::vector<double> col = {1, 1, 2, 2};
  const std::vector<std::uint8_t> lab = {0, 0, 1, 1};
  const auto fs = obf::compute_stats(col, lab);
  EXPECT_EQ(fs.class0.n, 2u);
  EXPECT_EQ(fs.class0.mean, 1.0);
  EXPECT_EQ(*fs.class0.var, 0.0);
  EXPECT_EQ(fs.class1.mean, 2.0);
  EXPECT_EQ(*fs.class1.var, 0.0);
  EXPECT_EQ(fs.pooled.n, 4u);
  EXPECT_DOUBLE_EQ(fs.pooled.mean, 1.5);
  EXPECT_NEAR(*fs.pooled.var, 1.0 / 3.0, 1e-15);
}

TEST(ComputeStats, ConstantColumnHasZeroVariances) {
  const std::vector<double> col(9, 4.2);
  const std::vector<std::uint8_t> lab = {0, 1, 0, 1, 0, 1, 0, 1, 1};
  const auto fs = obf::compute_stats(col, lab);
  EXPECT_EQ(*fs.class0.var, 0.0);
  EXPECT_EQ(*fs.class1.var, 0.0);
  EXPECT_EQ(*fs.pooled.var, 0.0);
}

TEST(ComputeStats, TranslationInvariantVariance) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> col(101);
  std::vector<std::uint8_t> lab(101);
  for (std::size_t i = 0; i < col.size(); ++i) {
    col[i] = z(rng);
    lab[i] = static_cast<std::uint8_t>(i % 3 == 0);
  }
  auto shifted = col;
  for (auto& x : shifted) x += 1000.0;
  const auto a = obf::compute_stats(col, lab);
  const auto b = obf::compute_stats(shifted, lab);
  EXPECT_NEAR(*b.class0.var, *a.class0.var, 1e-12 * *a.class0.var);
  EXPECT_NEAR(*b.class1.var, *a.class1.var, 1e-12 * *a.class1.var);
  EXPECT_NEAR(*b.pooled.var, *a.pooled.var, 1e-12 * *a.pooled.var);
}

TEST(ComputeStats, PoolingIdentityProperty) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + rng() % 60;
    std::vector<double> col(n);
    std::vector<std::uint8_t> lab(n);
    const double scale = std::exp(4.0 * z(rng));
    for (std::size_t i = 0; i < n; ++i) {
      lab[i] = static_cast<std::uint8_t>(i < 2 ? i : rng() % 2);
      col[i] = scale * (z(rng) + 3.0 * lab[i]);
    }
    const auto fs = obf::compute_stats(col, lab);
    const double n0 = static_cast<double>(fs.class0.n);
    const double n1 = static_cast<double>(fs.class1.n);
    const double d = fs.class0.mean - fs.class1.mean;
    const double lhs = *fs.pooled.var * (static_cast<double>(n) - 1.0);
    const double rhs = fs.class0.sum_sq_dev() + fs.class1.sum_sq_dev() + n0 * n1 / (n0 + n1) * d * d;
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::fabs(rhs)) << trial;
    EXPECT_EQ(fs.pooled.n, fs.class0.n + fs.class1.n);
  }
}

TEST(ComputeStats, EmptyClassRejected) {
  const std::vector<double> col = {1, 2, 3};
  const std::vector<std::uint8_t> lab = {1, 1, 1};
  try {
    obf::compute_stats(col, lab);
    FAIL();
  } catch (const obf::Error& e) {
    EXPECT_EQ(e.kind(), obf::ErrorKind::EmptyClass);
  }
}

TEST(LogH, ConstantFeatureUnderJeffreysIsDegenerate) {
  const auto fs = obf::compute_stats_split(std::vector<double>{2, 2, 2}, std::vector<double>{2, 2, 2});
  EXPECT_THROW(obf::log_h(obf::presets::jp(), fs, "f1"), obf::Error);
  EXPECT_NO_THROW(obf::log_h(obf::presets::pp(), fs, "f1"));
}
