#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "obf/baselines.hpp"
#include "obf/bayes.hpp"

namespace {

#include "data/scalar_reference.inc"

obf::FeatureStats moments_stats(std::size_t n0, double m0, double v0, std::size_t n1, double m1, double v1) {
  obf::FeatureStats fs{{n0, m0, v0}, {n1, m1, v1}, {}};
  return fs;
}

// Spearman correlation with average ranks.
double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j);
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n - 1.0) / 2.0;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(WelchT, IdenticalClasses) {
  const auto s = obf::welch_t(moments_stats(6, 1.0, 2.0, 6, 1.0, 2.0));
  EXPECT_EQ(s.value, 0.0);
  EXPECT_EQ(*s.pvalue, 1.0);
}

TEST(WelchT, ReferenceExample) {
  const auto fs = moments_stats(10, 0.0, 1.0, 10, 1.0, 1.0);
  const auto s = obf::welch_t(fs);
  EXPECT_NEAR(s.value, -std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(obf::welch_df(fs), 18.0, 1e-12);
  EXPECT_NEAR(*s.pvalue, kWelchToyP, 1e-9);
}

TEST(WelchT, SwapNegatesStatistic) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> a(4 + rng() % 10), b(4 + rng() % 10);
    for (auto& x : a) x = z(rng);
    for (auto& x : b) x = 0.5 + 2.0 * z(rng);
    const auto s = obf::welch_t(obf::compute_stats_split(a, b));
    const auto r = obf::welch_t(obf::compute_stats_split(b, a));
    EXPECT_NEAR(s.value, -r.value, 1e-14 * (1.0 + std::fabs(s.value)));
    EXPECT_NEAR(*s.pvalue, *r.pvalue, 1e-14);
  }
}

TEST(WelchT, LocationScaleEquivariance) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z;
  std::vector<double> a(12), b(9);
  for (auto& x : a) x = z(rng);
  for (auto& x : b) x = 0.8 + z(rng);
  const double t = obf::welch_t(obf::compute_stats_split(a, b)).value;
  for (double shift : {-50.0, 3.0, 1e4})
    for (double scale : {0.01, 1.0, 250.0}) {
      auto a2 = a;
      auto b2 = b;
      for (auto& x : a2) x = scale * x + shift;
      for (auto& x : b2) x = scale * x + shift;
      EXPECT_NEAR(obf::welch_t(obf::compute_stats_split(a2, b2)).value, t, 1e-9 * std::fabs(t));
    }
}

TEST(WelchT, ConstantClassConventions) {
  auto s = obf::welch_t(moments_stats(3, 2.0, 0.0, 3, 2.0, 0.0));
  EXPECT_EQ(s.value, 0.0);
  EXPECT_EQ(*s.pvalue, 1.0);
  s = obf::welch_t(moments_stats(3, 1.0, 0.0, 3, 2.0, 0.0));
  EXPECT_EQ(s.value, -INFINITY);
  EXPECT_EQ(*s.pvalue, 0.0);
}

TEST(Bhattacharyya, Examples) {
  EXPECT_EQ(obf::bhattacharyya(moments_stats(5, 1.0, 2.0, 5, 1.0, 2.0)).value, 0.0);
  EXPECT_NEAR(obf::bhattacharyya(moments_stats(5, 0.0, 1.0, 5, 0.0, 4.0)).value, 0.5 * std::log(5.0 / 4.0), 1e-15);
  EXPECT_NEAR(0.5 * std::log(5.0 / 4.0), 0.111572, 1e-6);
  for (double sigma : {0.1, 1.0, 7.0})
    EXPECT_NEAR(obf::bhattacharyya(moments_stats(5, 0.3, sigma, 5, 2.0, sigma)).value, 1.7 * 1.7 / (8.0 * sigma),
                1e-14 * (1.0 + 1.7 * 1.7 / (8.0 * sigma)));
}

TEST(Bhattacharyya, NonNegativeAndZeroOnlyForEqualMoments) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double v = obf::bhattacharyya(moments_stats(5, u(rng), u(rng), 5, u(rng), u(rng))).value;
    EXPECT_GT(v, 0.0);
  }
}

TEST(Bhattacharyya, ZeroVarianceIsDegenerate) {
  EXPECT_THROW(obf::bhattacharyya(moments_stats(5, 0.0, 0.0, 5, 1.0, 1.0)), obf::Error);
}

TEST(MiSpacing, PermutationInvariant) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> z;
  std::vector<double> col(300);
  std::vector<std::uint8_t> lab(300);
  for (std::size_t i = 0; i < col.size(); ++i) {
    lab[i] = static_cast<std::uint8_t>(i % 2);
    col[i] = z(rng) + lab[i];
  }
  const double mi = obf::mi_spacing(col, lab).value;
  std::vector<std::size_t> perm(col.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> c2;
  std::vector<std::uint8_t> l2;
  for (auto i : perm) {
    c2.push_back(col[i]);
    l2.push_back(lab[i]);
  }
  EXPECT_EQ(obf::mi_spacing(c2, l2).value, mi);
}

TEST(MiSpacing, NullMeanNearZero) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> z;
  double acc = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> col(2000);
    std::vector<std::uint8_t> lab(2000);
    for (std::size_t i = 0; i < col.size(); ++i) {
      col[i] = z(rng);
      lab[i] = static_cast<std::uint8_t>(rng() % 2);
    }
    acc += obf::mi_spacing(col, lab).value;
  }
  EXPECT_NEAR(acc / 100.0, 0.0, 0.05);
}

TEST(MiSpacing, SeparatedClassesNearLog2) {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> z;
  std::vector<double> col(2000);
  std::vector<std::uint8_t> lab(2000);
  for (std::size_t i = 0; i < col.size(); ++i) {
    lab[i] = static_cast<std::uint8_t>(i % 2);
    col[i] = z(rng) + 10.0 * lab[i];
  }
  EXPECT_NEAR(obf::mi_spacing(col, lab).value, std::log(2.0), 0.1);
}

TEST(MiSpacing, AffineInvariance) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  std::vector<double> col(400);
  std::vector<std::uint8_t> lab(400);
  for (std::size_t i = 0; i < col.size(); ++i) {
    lab[i] = static_cast<std::uint8_t>(i % 3 == 0);
    col[i] = z(rng) + 0.7 * lab[i];
  }
  const double mi = obf::mi_spacing(col, lab).value;
  for (auto [a, b] : {std::pair{3.0, 1.0}, std::pair{0.2, -4.0}, std::pair{50.0, 0.0}}) {
    auto c2 = col;
    for (auto& x : c2) x = a * x + b;
    EXPECT_NEAR(obf::mi_spacing(c2, lab).value, mi, 1e-9);
  }
}

TEST(MiSpacing, TiesAreClampedAndCounted) {
  std::vector<double> col = {1, 1, 1, 1, 2, 2, 2, 2, 3, 4};
  std::vector<std::uint8_t> lab = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const auto r = obf::mi_spacing_detail(col, lab);
  EXPECT_TRUE(std::isfinite(r.score.value));
  EXPECT_GT(r.clamped_fraction, 0.1);
}

TEST(WilksLambda, Examples) {
  const auto eq = obf::compute_stats_split(std::vector<double>{0, 2}, std::vector<double>{0, 2});
  EXPECT_NEAR(obf::wilks_lambda(eq).value, 0.0, 1e-15);
  const auto fs = obf::compute_stats_split(std::vector<double>{0, 2}, std::vector<double>{10, 12});
  EXPECT_NEAR(obf::wilks_lambda(fs).value, -2.0 * std::log(26.0), 1e-13);
  EXPECT_NEAR(-2.0 * std::log(26.0), -6.516, 1e-3);
}

TEST(WilksLambda, RankingMatchesJeffreysObf) {
  std::mt19937_64 rng(18);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n0 = 5 + rng() % 20;
    const std::size_t n1 = 5 + rng() % 20;
    std::vector<double> wilks;
    std::vector<double> obf_scores;
    for (int f = 0; f < 50; ++f) {
      std::vector<double> a(n0), b(n1);
      const double shift = 0.2 * static_cast<double>(rng() % 10);
      const double sd = std::exp(0.5 * z(rng));
      for (auto& x : a) x = z(rng);
      for (auto& x : b) x = shift + sd * z(rng);
      const auto fs = obf::compute_stats_split(a, b);
      wilks.push_back(obf::ranking_value(obf::wilks_lambda(fs)));
      obf_scores.push_back(obf::log_h(obf::presets::jp(), fs).log_h);
    }
    EXPECT_DOUBLE_EQ(spearman(wilks, obf_scores), 1.0);
  }
}

TEST(RankingValue, Orientation) {
  EXPECT_EQ(obf::ranking_value({obf::BaselineMethod::WelchT, -3.0, 0.01}), 3.0);
  EXPECT_EQ(obf::ranking_value({obf::BaselineMethod::WilksLambda, -2.0, std::nullopt}), 2.0);
  EXPECT_EQ(obf::ranking_value({obf::BaselineMethod::Bhattacharyya, 0.4, std::nullopt}), 0.4);
}
