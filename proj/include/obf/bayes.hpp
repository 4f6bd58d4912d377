#pragma once

// Closed-form conjugate computations for the independent Gaussian model.
//
// Each feature is scored by h(f), the posterior odds that its class-conditional
// distributions differ. Variances are used directly (not standard deviations)
// and every probability is carried in the natural-log domain.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "obf/error.hpp"
#include "obf/special.hpp"

namespace obf {

// Normal-inverse-Wishart hyperparameters for one (mean, variance) block.
// sigma ~ s^{k/2} sigma^{-(k+2)/2} exp(-s / (2 sigma)), mu | sigma ~ N(m, sigma / nu).
struct NIWHyper {
  double s = 0.0;
  double kappa = 0.0;
  double m = 0.0;
  double nu = 0.0;

  bool proper() const { return s > 0.0 && kappa > 0.0 && nu > 0.0; }
  friend bool operator==(const NIWHyper&, const NIWHyper&) = default;
};

struct PriorSpec {
  NIWHyper good0;
  NIWHyper good1;
  NIWHyper bad;
  double pi = 0.005;
  // Only read when every block is improper; proper triples derive it.
  double logL = std::log(0.1);

  bool all_proper() const { return good0.proper() && good1.proper() && bad.proper(); }
  bool none_proper() const { return !good0.proper() && !good1.proper() && !bad.proper(); }
  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

namespace presets {

// Proper prior: s = 0.5, kappa = 3, nu = 0.1 in every block, class-1 mean 0.2.
inline PriorSpec pp() {
  PriorSpec p;
  p.good0 = {0.5, 3.0, 0.0, 0.1};
  p.good1 = {0.5, 3.0, 0.2, 0.1};
  p.bad = {0.5, 3.0, 0.0, 0.1};
  p.pi = 0.005;
  return p;
}

// Jeffreys-style improper prior with user weight L = 0.1.
inline PriorSpec jp() {
  PriorSpec p;
  p.pi = 0.005;
  p.logL = std::log(0.1);
  return p;
}

}  // namespace presets

// Sample count, mean and unbiased variance. var is set iff n >= 2.
struct ClassStats {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> var;

  double sum_sq_dev() const { return n >= 2 ? (static_cast<double>(n) - 1.0) * *var : 0.0; }
};

struct FeatureStats {
  ClassStats class0;
  ClassStats class1;
  ClassStats pooled;
};

struct PosteriorHyper {
  double s_star = 0.0;
  double kappa_star = 0.0;
  double m_star = 0.0;
  double nu_star = 0.0;
};

struct FeatureScore {
  double log_h = 0.0;
  double pi_star = 0.5;
  double log1m_pi_star = -std::numbers::ln2;
};

inline FeatureScore score_from_log_h(double log_h) {
  return {log_h, special::logistic(log_h), -special::softplus(log_h)};
}

namespace detail {

inline ClassStats moments(std::span<const double> xs) {
  ClassStats out;
  out.n = xs.size();
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  double mean = sum / n;
  // Second pass with the compensation term for the rounding left in mean.
  double dev = 0.0;
  double dev2 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    dev += d;
    dev2 += d * d;
  }
  mean += dev / n;
  out.mean = mean;
  if (xs.size() >= 2) out.var = std::fmax(0.0, (dev2 - dev * dev / n) / (n - 1.0));
  return out;
}

}  // namespace detail

// Per-class and pooled moments of one feature column.
inline FeatureStats compute_stats(std::span<const double> column, std::span<const std::uint8_t> labels) {
  if (column.size() != labels.size())
    throw Error(ErrorKind::BadSize, "column has " + std::to_string(column.size()) + " values but " +
                                        std::to_string(labels.size()) + " labels");
  std::vector<double> c0;
  std::vector<double> c1;
  c0.reserve(column.size());
  c1.reserve(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (labels[i] == 0) c0.push_back(column[i]);
    else if (labels[i] == 1) c1.push_back(column[i]);
    else throw Error(ErrorKind::Parse, "label at position " + std::to_string(i) + " is not 0 or 1");
  }
  if (c0.empty() || c1.empty()) throw Error(ErrorKind::EmptyClass, c0.empty() ? "class 0 has no samples" : "class 1 has no samples");
  return {detail::moments(c0), detail::moments(c1), detail::moments(column)};
}

// Same as compute_stats for data already split by class.
inline FeatureStats compute_stats_split(std::span<const double> class0, std::span<const double> class1) {
  if (class0.empty() || class1.empty()) throw Error(ErrorKind::EmptyClass, class0.empty() ? "class 0 has no samples" : "class 1 has no samples");
  FeatureStats fs{detail::moments(class0), detail::moments(class1), {}};
  // Pooled moments from the class moments via the exact decomposition.
  const double n0 = static_cast<double>(class0.size());
  const double n1 = static_cast<double>(class1.size());
  const double n = n0 + n1;
  const double delta = fs.class1.mean - fs.class0.mean;
  fs.pooled.n = class0.size() + class1.size();
  fs.pooled.mean = fs.class0.mean + delta * n1 / n;
  const double ss = fs.class0.sum_sq_dev() + fs.class1.sum_sq_dev() + delta * delta * n0 * n1 / n;
  fs.pooled.var = ss / (n - 1.0);
  return fs;
}

inline PosteriorHyper update_hyper(const NIWHyper& prior, const ClassStats& stats, std::string_view where = {}) {
  const double n = static_cast<double>(stats.n);
  PosteriorHyper post;
  post.kappa_star = prior.kappa + n;
  post.nu_star = prior.nu + n;
  post.m_star = stats.n > 0 && post.nu_star > 0.0 ? (prior.nu * prior.m + n * stats.mean) / post.nu_star : prior.m;
  const double shrink = post.nu_star > 0.0 ? prior.nu * n / post.nu_star : 0.0;
  const double diff = stats.mean - prior.m;
  post.s_star = prior.s + stats.sum_sq_dev() + (shrink > 0.0 ? shrink * diff * diff : 0.0);
  if (!(post.s_star > 0.0) || !(post.nu_star > 0.0) || !(post.kappa_star > 0.0) || !std::isfinite(post.s_star)) {
    std::string msg = "non-positive posterior hyperparameter (s*=" + std::to_string(post.s_star) +
                      ", kappa*=" + std::to_string(post.kappa_star) + ", nu*=" + std::to_string(post.nu_star) + ")";
    if (!where.empty()) msg = std::string(where) + ": " + msg;
    throw Error(ErrorKind::DegenerateData, msg);
  }
  return post;
}

// log(A * B) for a proper block: the prior's normalising constants.
inline double log_norm_weight(const NIWHyper& prior) {
  if (!prior.proper()) throw Error(ErrorKind::ImproperPrior, "normalising weight requested for an improper block");
  return 0.5 * prior.kappa * std::log(0.5 * prior.s) - special::lgamma(0.5 * prior.kappa) +
         0.5 * std::log(prior.nu / (2.0 * std::numbers::pi));
}

// log p(S | block) under the conjugate prior. Improper priors need the
// caller's log_norm_weight.
inline double log_marginal(const NIWHyper& prior, const ClassStats& stats,
                           std::optional<double> log_norm = std::nullopt) {
  const double weight = log_norm ? *log_norm : log_norm_weight(prior);
  const PosteriorHyper post = update_hyper(prior, stats);
  const double n = static_cast<double>(stats.n);
  return weight + special::lgamma(0.5 * post.kappa_star) - 0.5 * (n - 1.0) * special::kLog2Pi -
         0.5 * std::log(post.nu_star) - 0.5 * post.kappa_star * std::log(0.5 * post.s_star);
}

inline double derive_logL(const PriorSpec& spec) {
  if (!spec.all_proper()) throw Error(ErrorKind::ImproperPrior, "logL can only be derived when all three blocks are proper");
  return log_norm_weight(spec.good0) + log_norm_weight(spec.good1) - log_norm_weight(spec.bad);
}

// A PriorSpec with its log L settled, so batches of features skip re-deriving it.
struct ResolvedPrior {
  PriorSpec spec;
  double logL = 0.0;
  double prior_log_odds = 0.0;
};

inline ResolvedPrior resolve(const PriorSpec& spec) {
  if (!(spec.pi >= 0.0 && spec.pi <= 1.0)) throw Error(ErrorKind::ConfigInvalid, "pi must lie in [0, 1]");
  ResolvedPrior r{spec, 0.0, special::logit(spec.pi)};
  if (spec.all_proper()) {
    r.logL = derive_logL(spec);
  } else if (spec.none_proper()) {
    if (!std::isfinite(spec.logL)) throw Error(ErrorKind::ConfigInvalid, "logL must be finite");
    r.logL = spec.logL;
  } else {
    throw Error(ErrorKind::ImproperPrior, "mixed propriety: either all three blocks are proper or none is");
  }
  return r;
}

inline FeatureScore log_h(const ResolvedPrior& prior, const FeatureStats& stats, std::string_view feature = {}) {
  const PriorSpec& spec = prior.spec;
  if (spec.pi == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0, 0.0};
  if (spec.pi == 1.0) return {std::numeric_limits<double>::infinity(), 1.0, -std::numeric_limits<double>::infinity()};

  const std::string tag(feature);
  const auto p0 = update_hyper(spec.good0, stats.class0, tag.empty() ? "class 0" : tag + " class 0");
  const auto p1 = update_hyper(spec.good1, stats.class1, tag.empty() ? "class 1" : tag + " class 1");
  const auto pb = update_hyper(spec.bad, stats.pooled, tag.empty() ? "pooled" : tag + " pooled");

  using special::lgamma;
  const double value = prior.prior_log_odds + prior.logL +
                       0.5 * (special::kLog2Pi + std::log(pb.nu_star) - std::log(p0.nu_star) - std::log(p1.nu_star)) +
                       lgamma(0.5 * p0.kappa_star) + lgamma(0.5 * p1.kappa_star) - lgamma(0.5 * pb.kappa_star) +
                       0.5 * pb.kappa_star * std::log(0.5 * pb.s_star) -
                       0.5 * p0.kappa_star * std::log(0.5 * p0.s_star) -
                       0.5 * p1.kappa_star * std::log(0.5 * p1.s_star);
  return score_from_log_h(value);
}

inline FeatureScore log_h(const PriorSpec& spec, const FeatureStats& stats, std::string_view feature = {}) {
  return log_h(resolve(spec), stats, feature);
}

}  // namespace obf
