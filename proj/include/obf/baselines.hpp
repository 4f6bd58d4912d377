#pragma once

// Classical univariate filter scores: Welch's t, Bhattacharyya distance,
// spacing-based mutual information, and the Wilks likelihood ratio.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "obf/bayes.hpp"
#include "obf/error.hpp"
#include "obf/special.hpp"

namespace obf {

enum class BaselineMethod { WelchT, Bhattacharyya, MiSpacing, WilksLambda };

struct BaselineScore {
  BaselineMethod method = BaselineMethod::WelchT;
  double value = 0.0;
  std::optional<double> pvalue;
};

// Larger is stronger evidence of a class difference, for every method.
inline double ranking_value(const BaselineScore& s) {
  switch (s.method) {
    case BaselineMethod::WelchT: return std::fabs(s.value);
    case BaselineMethod::WilksLambda: return -s.value;
    default: return s.value;
  }
}

inline BaselineScore welch_t(const FeatureStats& stats) {
  const auto& a = stats.class0;
  const auto& b = stats.class1;
  if (a.n < 2 || b.n < 2) throw Error(ErrorKind::DegenerateData, "Welch t needs at least two samples per class");
  const double va = *a.var / static_cast<double>(a.n);
  const double vb = *b.var / static_cast<double>(b.n);
  const double diff = a.mean - b.mean;
  BaselineScore out{BaselineMethod::WelchT, 0.0, 1.0};
  if (va + vb == 0.0) {
    // Both classes constant: t is 0 for equal means and infinite otherwise.
    if (diff != 0.0) {
      out.value = std::copysign(std::numeric_limits<double>::infinity(), diff);
      out.pvalue = 0.0;
    }
    return out;
  }
  out.value = diff / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) /
                    (va * va / (static_cast<double>(a.n) - 1.0) + vb * vb / (static_cast<double>(b.n) - 1.0));
  out.pvalue = special::student_t_two_sided(out.value, df);
  return out;
}

inline double welch_df(const FeatureStats& stats) {
  const double va = *stats.class0.var / static_cast<double>(stats.class0.n);
  const double vb = *stats.class1.var / static_cast<double>(stats.class1.n);
  return (va + vb) * (va + vb) /
         (va * va / (static_cast<double>(stats.class0.n) - 1.0) + vb * vb / (static_cast<double>(stats.class1.n) - 1.0));
}

inline BaselineScore bhattacharyya(const FeatureStats& stats) {
  const auto& a = stats.class0;
  const auto& b = stats.class1;
  if (!a.var || !b.var || !(*a.var > 0.0) || !(*b.var > 0.0))
    throw Error(ErrorKind::DegenerateData, "Bhattacharyya distance needs positive variance in both classes");
  const double sum = *a.var + *b.var;
  const double diff = a.mean - b.mean;
  const double value = diff * diff / (4.0 * sum) + 0.5 * std::log(sum / (2.0 * std::sqrt(*a.var * *b.var)));
  return {BaselineMethod::Bhattacharyya, value, std::nullopt};
}

struct MiSpacingResult {
  BaselineScore score;
  double clamped_fraction = 0.0;
};

namespace detail {

// m = 1 spacing entropy estimate of sorted values; zero gaps become eps.
inline double spacing_entropy(std::span<const double> sorted, double eps, std::size_t& clamped) {
  const std::size_t n = sorted.size();
  const double scale = static_cast<double>(n) + 1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double gap = sorted[i + 1] - sorted[i];
    if (!(gap > 0.0)) {
      gap = eps;
      ++clamped;
    }
    acc += std::log(scale * gap);
  }
  return acc / (static_cast<double>(n) - 1.0);
}

}  // namespace detail

inline MiSpacingResult mi_spacing_detail(std::span<const double> column, std::span<const std::uint8_t> labels) {
  if (column.size() != labels.size()) throw Error(ErrorKind::BadSize, "column and labels differ in length");
  std::vector<double> all(column.begin(), column.end());
  std::vector<double> c0;
  std::vector<double> c1;
  for (std::size_t i = 0; i < column.size(); ++i) (labels[i] == 0 ? c0 : c1).push_back(column[i]);
  if (c0.size() < 2 || c1.size() < 2) throw Error(ErrorKind::BadSize, "spacing MI needs at least two samples per class");
  std::sort(all.begin(), all.end());
  std::sort(c0.begin(), c0.end());
  std::sort(c1.begin(), c1.end());
  const double eps = 1e-12 * ((all.back() - all.front()) + 1.0);
  std::size_t clamped = 0;
  const double n = static_cast<double>(all.size());
  const double h_all = detail::spacing_entropy(all, eps, clamped);
  const double h0 = detail::spacing_entropy(c0, eps, clamped);
  const double h1 = detail::spacing_entropy(c1, eps, clamped);
  const double mi = h_all - (static_cast<double>(c0.size()) / n) * h0 - (static_cast<double>(c1.size()) / n) * h1;
  const double gaps = static_cast<double>(all.size() + c0.size() + c1.size() - 3);
  return {{BaselineMethod::MiSpacing, mi, std::nullopt}, static_cast<double>(clamped) / gaps};
}

inline BaselineScore mi_spacing(std::span<const double> column, std::span<const std::uint8_t> labels) {
  return mi_spacing_detail(column, labels).score;
}

// log of the Wilks ratio sv0^{n0/2} sv1^{n1/2} / sv^{n/2} with biased variances.
inline BaselineScore wilks_lambda(const FeatureStats& stats) {
  auto biased = [](const ClassStats& c) {
    const double v = c.n > 0 ? c.sum_sq_dev() / static_cast<double>(c.n) : 0.0;
    if (!(v > 0.0)) throw Error(ErrorKind::DegenerateData, "Wilks lambda needs positive biased variances");
    return v;
  };
  const double v0 = biased(stats.class0);
  const double v1 = biased(stats.class1);
  const double v = biased(stats.pooled);
  const double value = 0.5 * static_cast<double>(stats.class0.n) * std::log(v0) +
                       0.5 * static_cast<double>(stats.class1.n) * std::log(v1) -
                       0.5 * static_cast<double>(stats.pooled.n) * std::log(v);
  return {BaselineMethod::WilksLambda, value, std::nullopt};
}

}  // namespace obf
