#pragma once

// Command implementations behind the `obf` executable. Each command takes
// parsed options plus output streams and returns a process exit code, so the
// same code path is exercised in-process by the tests.
//
// Exit codes: 0 success, 1 I/O failure, 2 parse error, 3 config error,
// 4 every feature degenerate.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "obf/baselines.hpp"
#include "obf/bayes.hpp"
#include "obf/digest.hpp"
#include "obf/error.hpp"
#include "obf/harness.hpp"
#include "obf/io/config.hpp"
#include "obf/io/csv.hpp"
#include "obf/io/svg.hpp"
#include "obf/parallel.hpp"
#include "obf/selection.hpp"
#include "obf/synthgen.hpp"

namespace obf::cli {

inline constexpr const char* kToolVersion = "obf 1.0.0";

enum ExitCode : int { kOk = 0, kIoError = 1, kParseError = 2, kConfigError = 3, kAllDegenerate = 4 };

struct Options {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  unsigned threads = 0;
  std::string label_column = "label";
  bool transpose = false;
  std::optional<std::filesystem::path> input;
  std::size_t n = 200;  // simulate
};

inline io::RunConfig load_run_config(const Options& opt) {
  return opt.config ? io::load_config(*opt.config) : io::parse_config("");
}

inline void write_provenance(std::ostream& os, const std::string& command, const io::RunConfig& cfg,
                             std::optional<std::uint64_t> seed, const std::vector<std::string>& extra = {}) {
  os << "# " << kToolVersion << '\n';
  os << "# command=" << command << '\n';
  os << "# config_digest=" << hex64(cfg.digest()) << '\n';
  os << "# seed=" << (seed ? std::to_string(*seed) : std::string("none")) << '\n';
  for (const auto& e : extra) os << "# " << e << '\n';
  std::istringstream lines(cfg.echo());
  for (std::string l; std::getline(lines, l);) os << "# config." << l << '\n';
}

// ---------------------------------------------------------------------------
// Ranking

struct RankedFeature {
  std::size_t index = 0;
  std::string name;
  std::optional<FeatureScore> score;  // unset when degenerate
  std::string status = "ok";
  std::optional<double> welch_t;
  std::optional<double> welch_p;
  std::optional<double> bd;
  std::optional<double> mi;
  std::optional<double> log_wilks_lambda;
  double mi_clamped_fraction = 0.0;
};

// Scores every feature; result is in rank order with degenerate features last.
inline std::vector<RankedFeature> rank_dataset(const io::Dataset& data, const PriorSpec& prior, unsigned threads) {
  const auto resolved = resolve(prior);
  std::vector<RankedFeature> out(data.features.size());
  parallel_for(out.size(), threads, [&](std::size_t f) {
    auto& r = out[f];
    r.index = f;
    r.name = data.features[f];
    const auto col = data.column(f);
    const auto stats = compute_stats(col, data.labels);
    try {
      r.score = log_h(resolved, stats, r.name);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateData) throw;
      r.status = "degenerate";
    }
    try {
      const auto w = welch_t(stats);
      r.welch_t = w.value;
      r.welch_p = w.pvalue;
    } catch (const Error&) {
    }
    try {
      r.bd = bhattacharyya(stats).value;
    } catch (const Error&) {
    }
    try {
      const auto m = mi_spacing_detail(col, data.labels);
      r.mi = m.score.value;
      r.mi_clamped_fraction = m.clamped_fraction;
    } catch (const Error&) {
    }
    try {
      r.log_wilks_lambda = wilks_lambda(stats).value;
    } catch (const Error&) {
    }
  });
  std::stable_sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
    if (!a.score) return false;
    return a.score->log_h > b.score->log_h;
  });
  return out;
}

inline ScoreTable table_from_ranked(const std::vector<RankedFeature>& ranked) {
  ScoreTable t;
  for (const auto& r : ranked)
    if (r.score) {
      t.ids.push_back(r.name);
      t.scores.push_back(*r.score);
    }
  return t;
}

inline std::string opt_cell(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

inline void write_ranked_csv(std::ostream& os, const std::vector<RankedFeature>& ranked) {
  io::write_row(os, {"feature", "log_h", "pi_star", "log1m_pi_star", "rank", "welch_t", "welch_p", "bd", "mi",
                     "log_wilks_lambda", "status"});
  std::size_t rank = 0;
  for (const auto& r : ranked) {
    const bool ok = r.score.has_value();
    io::write_row(os, {r.name, ok ? io::format_double(r.score->log_h) : "", ok ? io::format_double(r.score->pi_star) : "",
                       ok ? io::format_double(r.score->log1m_pi_star) : "", ok ? std::to_string(++rank) : "",
                       opt_cell(r.welch_t), opt_cell(r.welch_p), opt_cell(r.bd), opt_cell(r.mi),
                       opt_cell(r.log_wilks_lambda), r.status});
  }
}

inline bool is_ranked_csv(const io::CsvTable& t) {
  return t.column("feature") && t.column("log_h") && t.column("pi_star") && t.column("log1m_pi_star") &&
         t.column("status");
}

inline ScoreTable table_from_ranked_csv(const io::CsvTable& t, const std::string& source) {
  const auto cf = *t.column("feature");
  const auto cl = *t.column("log_h");
  const auto cp = *t.column("pi_star");
  const auto cq = *t.column("log1m_pi_star");
  const auto cs = *t.column("status");
  ScoreTable table;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row[cs] != "ok") continue;
    auto num = [&](std::size_t c) {
      const auto v = io::parse_double(row[c]);
      if (!v) throw Error(ErrorKind::Parse, source + " line " + std::to_string(t.line_numbers[r]) + " column '" +
                                                t.header[c] + "': not a number");
      return *v;
    };
    table.ids.push_back(row[cf]);
    table.scores.push_back({num(cl), num(cp), num(cq)});
  }
  return table;
}

// Scores from either a ranked CSV or a raw dataset.
inline ScoreTable load_scores(const Options& opt, const io::RunConfig& cfg, std::ostream& err) {
  if (!opt.input) throw Error(ErrorKind::ConfigInvalid, "an input file is required");
  const auto csv = io::read_csv(*opt.input);
  if (is_ranked_csv(csv)) return table_from_ranked_csv(csv, opt.input->string());
  const auto data = io::dataset_from_csv(csv, opt.label_column, opt.transpose, opt.input->string());
  const auto ranked = rank_dataset(data, cfg.prior, opt.threads);
  auto table = table_from_ranked(ranked);
  if (table.size() == 0) throw Error(ErrorKind::DegenerateData, "every feature is degenerate under this prior");
  if (table.size() < ranked.size())
    err << "warning: " << ranked.size() - table.size() << " degenerate feature(s) excluded\n";
  return table;
}

inline std::string input_digest(const Options& opt) {
  return opt.input ? "input_digest=" + hex64(digest(io::read_file(*opt.input))) : "input_digest=none";
}

// Writes through an AtomicFile when a path is given, else to the fallback stream.
template <typename Fn>
void emit(const std::optional<std::filesystem::path>& path, std::ostream& fallback, Fn&& fn) {
  if (!path) {
    fn(fallback);
    return;
  }
  io::AtomicFile f(*path);
  fn(f.stream());
  f.commit();
}

inline std::filesystem::path with_suffix(const std::filesystem::path& p, const std::string& suffix) {
  auto out = p;
  out.replace_extension();
  out += suffix;
  return out;
}

inline int cmd_rank(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto cfg = load_run_config(opt);
  for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
  if (!opt.input) throw Error(ErrorKind::ConfigInvalid, "rank needs an input dataset");
  const auto data = io::read_dataset(*opt.input, opt.label_column, opt.transpose);
  const auto ranked = rank_dataset(data, cfg.prior, opt.threads);
  std::size_t degenerate = 0;
  std::size_t heavy_ties = 0;
  for (const auto& r : ranked) {
    degenerate += r.score ? 0 : 1;
    heavy_ties += r.mi_clamped_fraction > 0.1 ? 1 : 0;
  }
  if (heavy_ties) err << "warning: " << heavy_ties << " feature(s) had more than 10% tied spacings in the MI estimate\n";
  if (degenerate == ranked.size()) {
    err << "error: every feature is degenerate under this prior\n";
    return kAllDegenerate;
  }
  emit(opt.out, out, [&](std::ostream& os) {
    write_provenance(os, "rank", cfg, std::nullopt, {input_digest(opt)});
    write_ranked_csv(os, ranked);
  });
  return kOk;
}

inline SelectionResult apply_selection(const ScoreTable& table, const io::SelectionConfig& sel) {
  switch (sel.criterion) {
    case Criterion::MR:
      return select_mr(table, sel.loss ? *sel.loss : LossSpec::for_threshold(sel.threshold.value_or(0.5)));
    case Criterion::CMNC: return select_cmnc(table, sel.d.value_or(0));
    case Criterion::NP: return select_np(table, sel.alpha);
    default: return select_mnc(table);
  }
}

inline int cmd_select(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto cfg = load_run_config(opt);
  for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
  const auto table = load_scores(opt, cfg, err);
  const auto sel = apply_selection(table, cfg.selection);
  double etp = 0.0;
  double efp = 0.0;
  for (auto i : sel.selected) {
    etp += table.scores[i].pi_star;
    efp += std::exp(table.scores[i].log1m_pi_star);
  }
  std::vector<std::size_t> rank_of(table.size());
  for (std::size_t r = 0; r < sel.ranking.size(); ++r) rank_of[sel.ranking[r]] = r + 1;
  emit(opt.out, out, [&](std::ostream& os) {
    write_provenance(os, "select", cfg, std::nullopt, {input_digest(opt)});
    io::write_row(os, {"feature", "rank", "log_h", "pi_star", "log1m_pi_star"});
    for (auto i : sel.selected)
      io::write_row(os, {table.ids[i], std::to_string(rank_of[i]), io::format_double(table.scores[i].log_h),
                         io::format_double(table.scores[i].pi_star), io::format_double(table.scores[i].log1m_pi_star)});
  });
  std::ostream& summary = opt.out ? out : err;
  summary << "criterion=" << to_string(sel.criterion) << " parameter=" << io::format_double(sel.parameter)
          << " selected=" << sel.selected.size() << " expected_true_positives=" << io::format_double(etp)
          << " expected_false_positives=" << io::format_double(efp) << '\n';
  return kOk;
}

inline int cmd_roc(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto cfg = load_run_config(opt);
  for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
  const auto table = load_scores(opt, cfg, err);
  const auto curve = roc(table);
  emit(opt.out, out, [&](std::ostream& os) {
    write_provenance(os, "roc", cfg, std::nullopt, {input_digest(opt)});
    io::write_row(os, {"k", "expected_false_positives", "expected_true_positives"});
    for (std::size_t k = 0; k < curve.points.size(); ++k)
      io::write_row(os, {std::to_string(k), io::format_double(curve.points[k].expected_false_positives),
                         io::format_double(curve.points[k].expected_true_positives)});
  });
  if (opt.out) {
    io::LineChart chart{"Expected true vs false positives", "expected false positives", "expected true positives", {}};
    io::Series s{"OBF ranking", {}};
    for (const auto& p : curve.points) s.points.emplace_back(p.expected_false_positives, p.expected_true_positives);
    chart.series.push_back(std::move(s));
    io::AtomicFile svg(with_suffix(*opt.out, ".svg"));
    svg.stream() << io::render_svg(chart);
    svg.commit();
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// Simulation and sweeps

inline std::string feature_name(std::size_t f, std::size_t total) {
  const std::size_t width = std::max<std::size_t>(4, std::to_string(total > 0 ? total - 1 : 0).size());
  std::string s = std::to_string(f);
  return "f" + std::string(width - std::min(width, s.size()), '0') + s;
}

inline void write_dataset(std::ostream& os, const LabeledMatrix& m, bool transpose) {
  std::string line;
  if (!transpose) {
    for (std::size_t f = 0; f < m.n_features; ++f) line += feature_name(f, m.n_features) + ",";
    os << line << "label\n";
    for (std::size_t r = 0; r < m.n_samples; ++r) {
      line.clear();
      for (std::size_t f = 0; f < m.n_features; ++f) {
        line += io::format_double(m.at(r, f));
        line += ',';
      }
      line += std::to_string(m.labels[r]);
      os << line << '\n';
    }
    return;
  }
  line = "feature";
  for (std::size_t r = 0; r < m.n_samples; ++r) line += ",s" + std::to_string(r);
  os << line << '\n';
  for (std::size_t f = 0; f < m.n_features; ++f) {
    line = feature_name(f, m.n_features);
    for (double v : m.column(f)) line += "," + io::format_double(v);
    os << line << '\n';
  }
  line = "label";
  for (auto l : m.labels) line += "," + std::to_string(l);
  os << line << '\n';
}

inline int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto cfg = load_run_config(opt);
  for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
  if (!opt.out) throw Error(ErrorKind::ConfigInvalid, "simulate needs --out");
  const std::uint64_t seed = opt.seed.value_or(0);
  const auto m = generate(cfg.synth, opt.n, seed, opt.threads);
  const std::vector<std::string> extra = {"n=" + std::to_string(opt.n), "data_digest=" + hex64(matrix_digest(m))};
  {
    io::AtomicFile f(*opt.out);
    write_provenance(f.stream(), "simulate", cfg, seed, extra);
    write_dataset(f.stream(), m, opt.transpose);
    f.commit();
  }
  const auto truth_path = with_suffix(*opt.out, ".truth.csv");
  {
    io::AtomicFile f(truth_path);
    write_provenance(f.stream(), "simulate", cfg, seed, extra);
    io::write_row(f.stream(), {"feature", "tag", "group", "block", "marker"});
    for (std::size_t j = 0; j < m.n_features; ++j)
      io::write_row(f.stream(), {feature_name(j, m.n_features), to_string(m.truth[j]), std::to_string(m.group[j]),
                                 std::to_string(m.block[j]),
                                 is_marker(m.truth[j]) ? "1" : "0"});
    f.commit();
  }
  out << "wrote " << opt.out->string() << " (" << m.n_samples << " samples x " << m.n_features << " features) and "
      << truth_path.string() << " (" << truth_set(m).size() << " markers)\n";
  return kOk;
}

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
  io::write_row(os, {"n", "method", "mean_correct", "sd_correct", "mean_selected", "tp", "fp", "degenerate"});
  for (const auto& r : rows)
    io::write_row(os, {std::to_string(r.n), r.method, io::format_double(r.mean_correct), io::format_double(r.sd_correct),
                       io::format_double(r.mean_selected), io::format_double(r.mean_true_positives),
                       io::format_double(r.mean_false_positives), io::format_double(r.mean_degenerate)});
}

inline io::LineChart consistency_chart(const std::vector<MetricRow>& rows) {
  io::LineChart chart{"Average number of correctly labeled features", "sample size n", "mean correctly labeled", {}};
  for (const auto& r : rows) {
    auto it = std::find_if(chart.series.begin(), chart.series.end(), [&](const io::Series& s) { return s.name == r.method; });
    if (it == chart.series.end()) {
      chart.series.push_back({r.method, {}});
      it = chart.series.end() - 1;
    }
    it->points.emplace_back(static_cast<double>(r.n), r.mean_correct);
  }
  return chart;
}

inline int cmd_consistency(const Options& opt, std::ostream& out, std::ostream& err) {
  auto cfg = load_run_config(opt);
  for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
  if (!opt.out) throw Error(ErrorKind::ConfigInvalid, "consistency needs --out DIR");
  if (opt.seed) cfg.plan.base_seed = *opt.seed;
  const auto plan = cfg.experiment_plan(opt.threads);
  std::vector<ObfPreset> probe_presets;
  for (const auto& m : plan.methods)
    if (m.kind == MethodSpec::Kind::Obf &&
        std::find(probe_presets.begin(), probe_presets.end(), m.preset) == probe_presets.end())
      probe_presets.push_back(m.preset);
  const auto result = run_sweep(plan, probe_presets);

  std::filesystem::create_directories(*opt.out);
  const auto seed = cfg.plan.base_seed;
  {
    io::AtomicFile f(*opt.out / "metrics.csv");
    write_provenance(f.stream(), "consistency", cfg, seed);
    write_metrics_csv(f.stream(), result.rows);
    f.commit();
  }
  {
    io::AtomicFile f(*opt.out / "probe.csv");
    write_provenance(f.stream(), "consistency", cfg, seed);
    io::write_row(f.stream(), {"n", "preset", "median_log_h_truth", "median_log_h_null"});
    for (std::size_t p = 0; p < probe_presets.size(); ++p)
      for (const auto& row : result.probes[p])
        io::write_row(f.stream(), {std::to_string(row.n), to_string(probe_presets[p]), opt_cell(row.median_log_h_truth),
                                   opt_cell(row.median_log_h_null)});
    f.commit();
  }
  {
    io::AtomicFile f(*opt.out / "consistency.svg");
    f.stream() << io::render_svg(consistency_chart(result.rows));
    f.commit();
  }
  out << "wrote " << result.rows.size() << " metric rows to " << (*opt.out / "metrics.csv").string() << '\n';
  return kOk;
}

// Runs a command, mapping toolkit errors onto exit codes.
template <typename Command>
int run_guarded(Command&& cmd, const Options& opt, std::ostream& out, std::ostream& err) {
  try {
    return cmd(opt, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::Parse:
      case ErrorKind::EmptyClass: return kParseError;
      case ErrorKind::DegenerateData: return kAllDegenerate;
      default: return kConfigError;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace obf::cli
