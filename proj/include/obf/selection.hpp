#pragma once

// Optimal Bayesian selection rules over per-feature posterior scores.
//
// All rules rank by the posterior log-odds (equivalently pi*) with ties
// broken by ascending table position, then cut the ranking differently:
// MR/MNC by a threshold, CMNC by a fixed size, NP by an expected
// false-positive budget. MAP/CMAP are exposed through exhaustive
// enumeration for small feature sets.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "obf/bayes.hpp"
#include "obf/error.hpp"
#include "obf/special.hpp"

namespace obf {

struct ScoreTable {
  std::vector<std::string> ids;
  std::vector<FeatureScore> scores;

  std::size_t size() const { return scores.size(); }

  void validate() const {
    if (ids.size() != scores.size())
      throw Error(ErrorKind::BadSize, "score table has " + std::to_string(ids.size()) + " ids but " +
                                          std::to_string(scores.size()) + " scores");
    std::set<std::string_view> seen;
    for (const auto& id : ids)
      if (!seen.insert(id).second) throw Error(ErrorKind::ConfigInvalid, "duplicate feature id '" + id + "'");
  }
};

// Builds a score from a posterior probability, keeping 1 - pi* exact.
inline FeatureScore score_from_pi_star(double pi_star) {
  return {special::logit(pi_star), pi_star, std::log1p(-pi_star)};
}

// Table with ids f1..fN, handy for small hand-written cases.
inline ScoreTable make_table(std::span<const double> pi_stars) {
  ScoreTable t;
  for (std::size_t i = 0; i < pi_stars.size(); ++i) {
    t.ids.push_back("f" + std::to_string(i + 1));
    t.scores.push_back(score_from_pi_star(pi_stars[i]));
  }
  return t;
}

struct LossSpec {
  double lambda_gg = 0.0;
  double lambda_gb = 1.0;
  double lambda_bg = 1.0;
  double lambda_bb = 0.0;

  void validate() const {
    if (!(lambda_gb >= lambda_bb) || !(lambda_bg >= lambda_gg))
      throw Error(ErrorKind::InvalidLoss, "loss requires lambda_gb >= lambda_bb and lambda_bg >= lambda_gg");
    if (!(denominator() > 0.0))
      throw Error(ErrorKind::InvalidLoss, "lambda_gb + lambda_bg - lambda_gg - lambda_bb must be positive");
  }

  double denominator() const { return lambda_gb + lambda_bg - lambda_gg - lambda_bb; }
  double threshold() const { return (lambda_gb - lambda_bb) / denominator(); }

  // Loss whose threshold equals t, with lambda_gg = lambda_bb = 0.
  static LossSpec for_threshold(double t) { return {0.0, t, 1.0 - t, 0.0}; }
};

enum class Criterion { MR, MNC, CMNC, NP, MAP, CMAP };

inline const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::MR: return "MR";
    case Criterion::MNC: return "MNC";
    case Criterion::CMNC: return "CMNC";
    case Criterion::NP: return "NP";
    case Criterion::MAP: return "MAP";
    case Criterion::CMAP: return "CMAP";
  }
  return "?";
}

// Indices refer to positions in the ScoreTable. selected is listed in rank order.
struct SelectionResult {
  Criterion criterion = Criterion::MNC;
  double parameter = 0.5;  // T, D or alpha depending on criterion
  std::vector<std::size_t> ranking;
  std::vector<std::size_t> selected;
  std::optional<double> expected_risk;
};

inline std::vector<std::size_t> rank_features(const ScoreTable& table) {
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.scores[a].log_h > table.scores[b].log_h;
  });
  return order;
}

inline double expected_risk(const ScoreTable& table, const LossSpec& loss, std::span<const std::size_t> selected) {
  std::vector<char> in(table.size(), 0);
  for (auto i : selected) in[i] = 1;
  double risk = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double p = table.scores[i].pi_star;
    const double q = std::exp(table.scores[i].log1m_pi_star);
    risk += in[i] ? loss.lambda_gg * p + loss.lambda_gb * q : loss.lambda_bg * p + loss.lambda_bb * q;
  }
  return risk;
}

inline SelectionResult select_mr(const ScoreTable& table, const LossSpec& loss) {
  table.validate();
  loss.validate();
  SelectionResult r{Criterion::MR, loss.threshold(), rank_features(table), {}, {}};
  for (auto i : r.ranking)
    if (table.scores[i].pi_star > r.parameter) r.selected.push_back(i);
  r.expected_risk = expected_risk(table, loss, r.selected);
  return r;
}

inline SelectionResult select_mnc(const ScoreTable& table) {
  auto r = select_mr(table, LossSpec{});
  r.criterion = Criterion::MNC;
  return r;
}

inline SelectionResult select_cmnc(const ScoreTable& table, std::size_t d) {
  table.validate();
  if (d > table.size())
    throw Error(ErrorKind::BadSize, "D=" + std::to_string(d) + " exceeds the " + std::to_string(table.size()) + " features");
  SelectionResult r{Criterion::CMNC, static_cast<double>(d), rank_features(table), {}, {}};
  r.selected.assign(r.ranking.begin(), r.ranking.begin() + static_cast<std::ptrdiff_t>(d));
  return r;
}

inline SelectionResult select_np(const ScoreTable& table, double alpha) {
  table.validate();
  if (!(alpha >= 0.0)) throw Error(ErrorKind::ConfigInvalid, "alpha must be non-negative");
  SelectionResult r{Criterion::NP, alpha, rank_features(table), {}, {}};
  double spent = 0.0;
  for (auto i : r.ranking) {
    const double cost = std::exp(table.scores[i].log1m_pi_star);
    if (spent + cost > alpha) break;
    spent += cost;
    r.selected.push_back(i);
  }
  return r;
}

struct RocPoint {
  double expected_false_positives = 0.0;
  double expected_true_positives = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
};

inline RocCurve roc(const ScoreTable& table) {
  table.validate();
  RocCurve c;
  c.points.reserve(table.size() + 1);
  c.points.push_back({0.0, 0.0});
  double fp = 0.0;
  double tp = 0.0;
  for (auto i : rank_features(table)) {
    fp += std::exp(table.scores[i].log1m_pi_star);
    tp += table.scores[i].pi_star;
    c.points.push_back({fp, tp});
  }
  return c;
}

// ---------------------------------------------------------------------------
// Exhaustive set posterior. Subsets are bit masks over feature positions.

inline constexpr std::size_t kMaxExhaustiveFeatures = 20;

using SubsetMask = std::uint32_t;
using SubsetLogPrior = std::function<double(SubsetMask)>;

struct SubsetPosterior {
  std::size_t n_features = 0;
  std::vector<double> prob;  // indexed by mask

  double marginal(std::size_t f) const {
    double acc = 0.0;
    for (SubsetMask m = 0; m < prob.size(); ++m)
      if (m >> f & 1u) acc += prob[m];
    return acc;
  }
};

inline std::vector<std::size_t> mask_members(SubsetMask mask) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; mask; ++f, mask >>= 1)
    if (mask & 1u) out.push_back(f);
  return out;
}

// log p(G) when features are a priori independent with P(f good) = pis[f].
inline SubsetLogPrior independence_log_prior(std::vector<double> pis) {
  return [pis = std::move(pis)](SubsetMask mask) {
    double acc = 0.0;
    for (std::size_t f = 0; f < pis.size(); ++f) acc += (mask >> f & 1u) ? std::log(pis[f]) : std::log1p(-pis[f]);
    return acc;
  };
}

// p(G | S) proportional to p(G) * prod_{g in G} BF(g), where log_bf holds each
// feature's log Bayes factor (log h with the prior odds removed).
inline SubsetPosterior subset_posterior(std::span<const double> log_bf, const SubsetLogPrior& log_prior) {
  if (log_bf.size() > kMaxExhaustiveFeatures)
    throw Error(ErrorKind::TooLarge, std::to_string(log_bf.size()) + " features exceed the exhaustive limit of " +
                                         std::to_string(kMaxExhaustiveFeatures));
  const std::size_t count = std::size_t{1} << log_bf.size();
  std::vector<double> logp(count);
  for (SubsetMask m = 0; m < count; ++m) {
    double acc = log_prior(m);
    for (std::size_t f = 0; f < log_bf.size(); ++f)
      if (m >> f & 1u) acc += log_bf[f];
    logp[m] = acc;
  }
  const double norm = special::log_sum_exp(logp);
  SubsetPosterior post{log_bf.size(), std::vector<double>(count)};
  for (std::size_t m = 0; m < count; ++m) post.prob[m] = std::exp(logp[m] - norm);
  return post;
}

// Argmax over all subsets, or only those of the given size (CMAP).
// Ties go to the lexicographically smallest sorted index list.
inline SelectionResult select_map(const SubsetPosterior& posterior, std::optional<std::size_t> size = std::nullopt) {
  if (size && *size > posterior.n_features)
    throw Error(ErrorKind::BadSize, "CMAP size exceeds the number of features");
  std::optional<SubsetMask> best;
  for (SubsetMask m = 0; m < posterior.prob.size(); ++m) {
    if (size && static_cast<std::size_t>(std::popcount(m)) != *size) continue;
    if (!best || posterior.prob[m] > posterior.prob[*best] ||
        (posterior.prob[m] == posterior.prob[*best] && mask_members(m) < mask_members(*best)))
      best = m;
  }
  SelectionResult r{size ? Criterion::CMAP : Criterion::MAP, size ? static_cast<double>(*size) : 0.0, {}, {}, {}};
  ScoreTable marg;
  for (std::size_t f = 0; f < posterior.n_features; ++f) {
    marg.ids.push_back(std::to_string(f));
    marg.scores.push_back(score_from_pi_star(posterior.marginal(f)));
  }
  r.ranking = rank_features(marg);
  if (best) {
    const auto members = mask_members(*best);
    for (auto i : r.ranking)
      if (std::binary_search(members.begin(), members.end(), i)) r.selected.push_back(i);
  }
  return r;
}

}  // namespace obf
