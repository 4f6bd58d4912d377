#pragma once

// Sample-size sweeps over synthetic data: every (n, replicate) pair is an
// independent work unit that generates one matrix, scores every requested
// method, and reports how many features each method labels correctly.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "obf/baselines.hpp"
#include "obf/bayes.hpp"
#include "obf/error.hpp"
#include "obf/parallel.hpp"
#include "obf/rng.hpp"
#include "obf/selection.hpp"
#include "obf/synthgen.hpp"

namespace obf {

enum class ObfPreset { PP, JP, Custom };

inline const char* to_string(ObfPreset p) {
  switch (p) {
    case ObfPreset::PP: return "PP";
    case ObfPreset::JP: return "JP";
    case ObfPreset::Custom: return "CUSTOM";
  }
  return "?";
}

struct MethodSpec {
  enum class Kind { Obf, WelchT, Bhattacharyya, MiSpacing, WilksLambda };

  Kind kind = Kind::Obf;
  ObfPreset preset = ObfPreset::PP;
  Criterion criterion = Criterion::MNC;
  double threshold = 0.5;         // MR
  double alpha = 0.0;             // NP
  std::optional<std::size_t> d;   // CMNC and baselines; unset means |truth|

  // Canonical display name, also accepted by parse().
  std::string label() const {
    std::string base;
    switch (kind) {
      case Kind::Obf: base = std::string(to_string(criterion)) + "-OBF-" + to_string(preset); break;
      case Kind::WelchT: base = "T-TEST"; break;
      case Kind::Bhattacharyya: base = "BD"; break;
      case Kind::MiSpacing: base = "MI"; break;
      case Kind::WilksLambda: base = "WILKS"; break;
    }
    std::string param;
    if (kind == Kind::Obf && criterion == Criterion::MR) param = "T=" + fmt_param(threshold);
    if (kind == Kind::Obf && criterion == Criterion::NP) param = "alpha=" + fmt_param(alpha);
    if (d && (kind != Kind::Obf || criterion == Criterion::CMNC)) param = "D=" + std::to_string(*d);
    return param.empty() ? base : base + ":" + param;
  }

  // Grammar: NAME[:KEY=VALUE], NAME one of mnc-obf-pp, cmnc-obf-jp, mr-obf-pp,
  // np-obf-jp (any criterion/preset combination, preset also "custom"),
  // t-test, bd, mi, wilks. Keys: T (mr), alpha (np), D (cmnc and baselines).
  static MethodSpec parse(const std::string& text) {
    auto lower = [](std::string s) {
      for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      return s;
    };
    const auto colon = text.find(':');
    const std::string name = lower(text.substr(0, colon));
    MethodSpec m;
    if (name == "t-test" || name == "welch") m.kind = Kind::WelchT;
    else if (name == "bd") m.kind = Kind::Bhattacharyya;
    else if (name == "mi") m.kind = Kind::MiSpacing;
    else if (name == "wilks") m.kind = Kind::WilksLambda;
    else {
      const auto a = name.find("-obf-");
      if (a == std::string::npos) throw Error(ErrorKind::ConfigInvalid, "unknown method '" + text + "'");
      const std::string crit = name.substr(0, a);
      const std::string preset = name.substr(a + 5);
      if (crit == "mnc") m.criterion = Criterion::MNC;
      else if (crit == "cmnc") m.criterion = Criterion::CMNC;
      else if (crit == "mr") m.criterion = Criterion::MR;
      else if (crit == "np") m.criterion = Criterion::NP;
      else throw Error(ErrorKind::ConfigInvalid, "unknown criterion in method '" + text + "'");
      if (preset == "pp") m.preset = ObfPreset::PP;
      else if (preset == "jp") m.preset = ObfPreset::JP;
      else if (preset == "custom") m.preset = ObfPreset::Custom;
      else throw Error(ErrorKind::ConfigInvalid, "unknown prior preset in method '" + text + "'");
    }
    if (colon != std::string::npos) {
      const std::string kv = text.substr(colon + 1);
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::ConfigInvalid, "method parameter must be KEY=VALUE in '" + text + "'");
      const std::string key = lower(kv.substr(0, eq));
      const std::string val = kv.substr(eq + 1);
      try {
        if (key == "t" && m.kind == Kind::Obf && m.criterion == Criterion::MR) m.threshold = std::stod(val);
        else if (key == "alpha" && m.kind == Kind::Obf && m.criterion == Criterion::NP) m.alpha = std::stod(val);
        else if (key == "d" && (m.kind != Kind::Obf || m.criterion == Criterion::CMNC)) m.d = std::stoul(val);
        else throw Error(ErrorKind::ConfigInvalid, "parameter '" + key + "' does not apply to method '" + text + "'");
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::ConfigInvalid, "bad parameter value in method '" + text + "'");
      }
    }
    return m;
  }

 private:
  static std::string fmt_param(double v) {
    std::string s = std::to_string(v);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }
};

struct ExperimentPlan {
  SynthConfig synth;
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 1;
  std::vector<MethodSpec> methods;
  std::uint64_t base_seed = 0;
  unsigned threads = 1;
  std::optional<PriorSpec> custom_prior;

  void validate() const {
    synth.validate();
    if (n_grid.empty()) throw Error(ErrorKind::ConfigInvalid, "n_grid is empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      if (n_grid[i] < 4 || n_grid[i] % 2) throw Error(ErrorKind::ConfigInvalid, "every n must be even and at least 4");
      if (i && n_grid[i] <= n_grid[i - 1]) throw Error(ErrorKind::ConfigInvalid, "n_grid must be strictly increasing");
    }
    if (replicates < 1) throw Error(ErrorKind::ConfigInvalid, "replicates must be at least 1");
    for (const auto& m : methods) {
      if (m.kind == MethodSpec::Kind::Obf && m.preset == ObfPreset::Custom && !custom_prior)
        throw Error(ErrorKind::ConfigInvalid, "method " + m.label() + " needs a custom prior");
      if (m.d && *m.d > synth.n_features) throw Error(ErrorKind::BadSize, "D exceeds n_features in " + m.label());
      if (m.kind == MethodSpec::Kind::Obf && m.criterion == Criterion::MR) LossSpec::for_threshold(m.threshold).validate();
    }
  }

  // Seed for one replicate; stable under extensions of n_grid or replicates.
  std::uint64_t unit_seed(std::size_t n, std::size_t replicate) const { return rng::mix(base_seed, n, replicate); }
};

struct SelectionScore {
  std::size_t correct = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
};

inline SelectionScore score_selection(std::span<const std::size_t> selected, std::span<const std::size_t> truth,
                                      std::size_t total) {
  std::vector<char> is_true(total, 0);
  for (auto t : truth) {
    if (t >= total) throw Error(ErrorKind::BadSize, "truth index out of range");
    is_true[t] = 1;
  }
  std::vector<char> seen(total, 0);
  SelectionScore s;
  for (auto f : selected) {
    if (f >= total) throw Error(ErrorKind::BadSize, "selected index out of range");
    if (seen[f]) continue;
    seen[f] = 1;
    (is_true[f] ? s.tp : s.fp) += 1;
  }
  s.correct = total - s.fp - (truth.size() - s.tp);
  return s;
}

struct MetricRow {
  std::size_t n = 0;
  std::string method;
  double mean_correct = 0.0;
  double sd_correct = 0.0;  // sample sd across replicates (0 for one replicate)
  double mean_selected = 0.0;
  double mean_true_positives = 0.0;
  double mean_false_positives = 0.0;
  double mean_degenerate = 0.0;  // features excluded as degenerate, per replicate
};

struct ProbeRow {
  std::size_t n = 0;
  std::optional<double> median_log_h_truth;
  std::optional<double> median_log_h_null;
};

struct SweepResult {
  std::vector<MetricRow> rows;                 // grouped by n, methods in plan order
  std::vector<std::vector<ProbeRow>> probes;   // one series per requested probe preset
};

namespace detail {

inline PriorSpec preset_prior(ObfPreset p, const ExperimentPlan& plan) {
  switch (p) {
    case ObfPreset::PP: return presets::pp();
    case ObfPreset::JP: return presets::jp();
    case ObfPreset::Custom: return *plan.custom_prior;
  }
  return presets::pp();
}

inline std::optional<double> median(std::vector<double> xs) {
  if (xs.empty()) return std::nullopt;
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2) return hi;
  const double lo = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// Indices of valid features sorted by descending value, ties by index.
inline std::vector<std::size_t> top_d(const std::vector<double>& value, const std::vector<char>& valid, std::size_t d) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < value.size(); ++i)
    if (valid[i]) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return value[a] > value[b]; });
  if (idx.size() > d) idx.resize(d);
  return idx;
}

struct PresetScores {
  ScoreTable table;                  // valid features only
  std::vector<std::size_t> column;   // table row -> feature index
  std::vector<double> log_h;         // per feature, NaN when degenerate
  std::size_t degenerate = 0;
};

inline PresetScores score_preset(const ResolvedPrior& prior, const std::vector<FeatureStats>& stats) {
  PresetScores out;
  out.log_h.assign(stats.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t f = 0; f < stats.size(); ++f) {
    try {
      const auto s = log_h(prior, stats[f]);
      out.table.ids.push_back(std::to_string(f));
      out.table.scores.push_back(s);
      out.column.push_back(f);
      out.log_h[f] = s.log_h;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateData) throw;
      ++out.degenerate;
    }
  }
  return out;
}

struct UnitResult {
  std::vector<SelectionScore> scores;     // per method
  std::vector<std::size_t> selected;      // per method
  std::vector<std::size_t> degenerate;    // per method
  std::vector<std::vector<double>> probe_truth;
  std::vector<std::vector<double>> probe_null;
};

inline UnitResult run_unit(const ExperimentPlan& plan, std::size_t n, std::size_t replicate,
                           const std::vector<ObfPreset>& probe_presets) {
  const auto m = generate(plan.synth, n, plan.unit_seed(n, replicate), 1);
  const auto truth = truth_set(m);
  const std::size_t total = m.n_features;
  const std::size_t n0 = m.n_class0();

  std::vector<FeatureStats> stats(total);
  for (std::size_t f = 0; f < total; ++f) {
    const auto col = m.column(f);
    stats[f] = compute_stats_split(col.first(n0), col.subspan(n0));
  }

  std::vector<std::optional<PresetScores>> preset_scores(3);
  auto scores_for = [&](ObfPreset p) -> const PresetScores& {
    auto& slot = preset_scores[static_cast<std::size_t>(p)];
    if (!slot) slot = score_preset(resolve(preset_prior(p, plan)), stats);
    return *slot;
  };

  UnitResult r;
  for (const auto& method : plan.methods) {
    std::vector<std::size_t> chosen;
    std::size_t degenerate = 0;
    const std::size_t d = method.d.value_or(truth.size());
    if (method.kind == MethodSpec::Kind::Obf) {
      const auto& ps = scores_for(method.preset);
      degenerate = ps.degenerate;
      SelectionResult sel;
      switch (method.criterion) {
        case Criterion::MNC: sel = select_mnc(ps.table); break;
        case Criterion::MR: sel = select_mr(ps.table, LossSpec::for_threshold(method.threshold)); break;
        case Criterion::CMNC: sel = select_cmnc(ps.table, std::min(d, ps.table.size())); break;
        case Criterion::NP: sel = select_np(ps.table, method.alpha); break;
        default: throw Error(ErrorKind::ConfigInvalid, "criterion not available in sweeps");
      }
      for (auto i : sel.selected) chosen.push_back(ps.column[i]);
    } else {
      std::vector<double> value(total, 0.0);
      std::vector<char> valid(total, 1);
      for (std::size_t f = 0; f < total; ++f) {
        try {
          BaselineScore s;
          switch (method.kind) {
            case MethodSpec::Kind::WelchT: s = welch_t(stats[f]); break;
            case MethodSpec::Kind::Bhattacharyya: s = bhattacharyya(stats[f]); break;
            case MethodSpec::Kind::MiSpacing: s = mi_spacing(m.column(f), m.labels); break;
            case MethodSpec::Kind::WilksLambda: s = wilks_lambda(stats[f]); break;
            default: break;
          }
          value[f] = ranking_value(s);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::DegenerateData) throw;
          valid[f] = 0;
          ++degenerate;
        }
      }
      chosen = top_d(value, valid, d);
    }
    r.scores.push_back(score_selection(chosen, truth, total));
    r.selected.push_back(chosen.size());
    r.degenerate.push_back(degenerate);
  }

  for (auto p : probe_presets) {
    const auto& ps = scores_for(p);
    std::vector<double> t;
    std::vector<double> nl;
    for (std::size_t f = 0; f < total; ++f) {
      if (std::isnan(ps.log_h[f])) continue;
      (is_marker(m.truth[f]) ? t : nl).push_back(ps.log_h[f]);
    }
    r.probe_truth.push_back(std::move(t));
    r.probe_null.push_back(std::move(nl));
  }
  return r;
}

}  // namespace detail

inline SweepResult run_sweep(const ExperimentPlan& plan, const std::vector<ObfPreset>& probe_presets = {}) {
  plan.validate();
  for (auto p : probe_presets)
    if (p == ObfPreset::Custom && !plan.custom_prior) throw Error(ErrorKind::ConfigInvalid, "probe needs a custom prior");
  const std::size_t reps = plan.replicates;
  std::vector<detail::UnitResult> units(plan.n_grid.size() * reps);
  parallel_for(units.size(), plan.threads, [&](std::size_t u) {
    units[u] = detail::run_unit(plan, plan.n_grid[u / reps], u % reps, probe_presets);
  });

  SweepResult out;
  const double r = static_cast<double>(reps);
  for (std::size_t gi = 0; gi < plan.n_grid.size(); ++gi) {
    const std::size_t n = plan.n_grid[gi];
    for (std::size_t mi = 0; mi < plan.methods.size(); ++mi) {
      MetricRow row;
      row.n = n;
      row.method = plan.methods[mi].label();
      for (std::size_t k = 0; k < reps; ++k) {
        const auto& u = units[gi * reps + k];
        row.mean_correct += static_cast<double>(u.scores[mi].correct);
        row.mean_selected += static_cast<double>(u.selected[mi]);
        row.mean_true_positives += static_cast<double>(u.scores[mi].tp);
        row.mean_false_positives += static_cast<double>(u.scores[mi].fp);
        row.mean_degenerate += static_cast<double>(u.degenerate[mi]);
      }
      row.mean_correct /= r;
      row.mean_selected /= r;
      row.mean_true_positives /= r;
      row.mean_false_positives /= r;
      row.mean_degenerate /= r;
      if (reps > 1) {
        double ss = 0.0;
        for (std::size_t k = 0; k < reps; ++k) {
          const double dev = static_cast<double>(units[gi * reps + k].scores[mi].correct) - row.mean_correct;
          ss += dev * dev;
        }
        row.sd_correct = std::sqrt(ss / (r - 1.0));
      }
      out.rows.push_back(std::move(row));
    }
  }

  for (std::size_t pi = 0; pi < probe_presets.size(); ++pi) {
    std::vector<ProbeRow> series;
    for (std::size_t gi = 0; gi < plan.n_grid.size(); ++gi) {
      std::vector<double> t;
      std::vector<double> nl;
      for (std::size_t k = 0; k < reps; ++k) {
        const auto& u = units[gi * reps + k];
        t.insert(t.end(), u.probe_truth[pi].begin(), u.probe_truth[pi].end());
        nl.insert(nl.end(), u.probe_null[pi].begin(), u.probe_null[pi].end());
      }
      series.push_back({plan.n_grid[gi], detail::median(std::move(t)), detail::median(std::move(nl))});
    }
    out.probes.push_back(std::move(series));
  }
  return out;
}

inline std::vector<MetricRow> run_plan(const ExperimentPlan& plan) { return run_sweep(plan).rows; }

// Median log h of marker and null features at each n, for one prior preset.
inline std::vector<ProbeRow> posterior_convergence_probe(const ExperimentPlan& plan, ObfPreset preset) {
  return run_sweep(plan, {preset}).probes.front();
}

}  // namespace obf
