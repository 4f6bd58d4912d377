#pragma once

// Run configuration: flat INI-style text.
//
//   # comment            ; comment
//   [section]
//   key = value          # trailing comment after whitespace
//
// Sections: [prior], [selection], [synth], [plan]. Unknown sections or keys
// are errors. Every resolved value is echoed back by RunConfig::echo().

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "obf/bayes.hpp"
#include "obf/digest.hpp"
#include "obf/error.hpp"
#include "obf/harness.hpp"
#include "obf/io/csv.hpp"
#include "obf/selection.hpp"
#include "obf/synthgen.hpp"

namespace obf::io {

struct SelectionConfig {
  Criterion criterion = Criterion::MNC;
  std::optional<double> threshold;
  std::optional<LossSpec> loss;
  std::optional<std::size_t> d;
  double alpha = 1.0;
};

struct PlanConfig {
  std::vector<std::size_t> n_grid = {100, 200, 500, 1000};
  std::size_t replicates = 10;
  std::uint64_t base_seed = 0;
  std::vector<std::string> methods = {"mnc-obf-pp", "mnc-obf-jp", "cmnc-obf-pp", "cmnc-obf-jp", "bd"};
};

struct RunConfig {
  std::string prior_preset = "jp";
  PriorSpec prior = presets::jp();
  SelectionConfig selection;
  std::string synth_preset = "desk";
  SynthConfig synth = SynthConfig::desk();
  PlanConfig plan;
  std::vector<std::string> warnings;

  std::string echo() const;
  std::uint64_t digest() const { return obf::digest(echo()); }

  ExperimentPlan experiment_plan(unsigned threads) const {
    ExperimentPlan p;
    p.synth = synth;
    p.n_grid = plan.n_grid;
    p.replicates = plan.replicates;
    p.base_seed = plan.base_seed;
    p.threads = threads;
    for (const auto& m : plan.methods) p.methods.push_back(MethodSpec::parse(m));
    p.custom_prior = prior;
    return p;
  }
};

namespace detail {

inline std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && issp(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

struct ValueReader {
  std::string where;

  [[noreturn]] void fail(const std::string& msg) const { throw Error(ErrorKind::ConfigInvalid, where + ": " + msg); }

  double real(const std::string& v) const {
    const auto d = parse_double(v);
    if (!d || std::isnan(*d)) fail("expected a number, got '" + v + "'");
    return *d;
  }
  std::size_t count(const std::string& v) const {
    const double d = real(v);
    if (d < 0 || d != std::floor(d) || d > 1e15) fail("expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(d);
  }
  std::uint64_t u64(const std::string& v) const {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) fail("expected an unsigned 64-bit integer, got '" + v + "'");
    return out;
  }
};

inline std::vector<std::size_t> parse_grid(const std::string& v, const ValueReader& r) {
  std::vector<std::size_t> out;
  const auto parts = split(v, ':');
  if (parts.size() == 3 && v.find(',') == std::string::npos) {
    const std::size_t lo = r.count(parts[0]);
    const std::size_t hi = r.count(parts[1]);
    const std::size_t step = r.count(parts[2]);
    if (step == 0 || hi < lo) r.fail("range must be START:STOP:STEP with STEP > 0");
    for (std::size_t n = lo; n <= hi; n += step) out.push_back(n);
    return out;
  }
  for (const auto& p : split(v, ',')) out.push_back(r.count(p));
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text, const std::string& source = "config") {
  using namespace detail;
  std::map<std::string, std::map<std::string, std::pair<std::string, std::size_t>>> entries;
  static const std::map<std::string, std::vector<std::string>> known = {
      {"prior",
       {"preset", "s0", "kappa0", "m0", "nu0", "s1", "kappa1", "m1", "nu1", "sb", "kappab", "mb", "nub", "pi", "logl"}},
      {"selection", {"criterion", "t", "d", "alpha", "lambda_gg", "lambda_gb", "lambda_bg", "lambda_bb"}},
      {"synth",
       {"preset", "n_features", "n_global", "n_hetero", "n_lowvar", "n_highvar", "block_size", "rho", "n_groups",
        "group_sigmas", "n_subclasses"}},
      {"plan", {"n_grid", "replicates", "base_seed", "methods"}},
  };

  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (std::size_t h = line.find('#'); h != std::string::npos; h = line.find('#', h + 1))
      if (h > 0 && std::isspace(static_cast<unsigned char>(line[h - 1]))) {
        line.erase(h);
        break;
      }
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string where = source + " line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::ConfigInvalid, where + ": malformed section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (!known.count(section)) throw Error(ErrorKind::ConfigInvalid, where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ConfigInvalid, where + ": expected key = value");
    if (section.empty()) throw Error(ErrorKind::ConfigInvalid, where + ": key outside of any section");
    const std::string key = lower(trim(line.substr(0, eq)));
    const auto& allowed = known.at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(ErrorKind::ConfigInvalid, where + ": unknown key '" + key + "' in [" + section + "]");
    if (entries[section].count(key)) throw Error(ErrorKind::ConfigInvalid, where + ": duplicate key '" + key + "'");
    entries[section][key] = {trim(line.substr(eq + 1)), lineno};
  }

  RunConfig cfg;
  auto get = [&](const std::string& sec, const std::string& key) -> std::optional<std::pair<std::string, ValueReader>> {
    auto s = entries.find(sec);
    if (s == entries.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return std::pair{k->second.first, ValueReader{source + " line " + std::to_string(k->second.second) + " [" + sec + "] " + key}};
  };

  // [prior]
  if (auto v = get("prior", "preset")) {
    cfg.prior_preset = lower(v->first);
    if (cfg.prior_preset == "pp") cfg.prior = presets::pp();
    else if (cfg.prior_preset == "jp") cfg.prior = presets::jp();
    else if (cfg.prior_preset == "custom") cfg.prior = presets::jp();
    else v->second.fail("preset must be pp, jp or custom");
  }
  const std::pair<const char*, double NIWHyper::*> fields[] = {
      {"s", &NIWHyper::s}, {"kappa", &NIWHyper::kappa}, {"m", &NIWHyper::m}, {"nu", &NIWHyper::nu}};
  const std::pair<const char*, NIWHyper PriorSpec::*> blocks[] = {
      {"0", &PriorSpec::good0}, {"1", &PriorSpec::good1}, {"b", &PriorSpec::bad}};
  for (const auto& [bs, bp] : blocks)
    for (const auto& [fs, fp] : fields)
      if (auto v = get("prior", std::string(fs) + bs)) (cfg.prior.*bp).*fp = v->second.real(v->first);
  if (auto v = get("prior", "pi")) {
    cfg.prior.pi = v->second.real(v->first);
    if (!(cfg.prior.pi >= 0.0 && cfg.prior.pi <= 1.0)) v->second.fail("pi must lie in [0, 1]");
  }
  if (cfg.prior.pi == 0.0 || cfg.prior.pi == 1.0)
    cfg.warnings.push_back("pi = " + format_double(cfg.prior.pi) + " is on the boundary; every feature gets the same posterior");
  if (auto v = get("prior", "logl")) {
    cfg.prior.logL = v->second.real(v->first);
    if (cfg.prior.all_proper()) v->second.fail("logL is derived for proper priors and cannot be set");
  }
  resolve(cfg.prior);  // rejects mixed propriety and non-finite logL

  // [selection]
  auto& sel = cfg.selection;
  if (auto v = get("selection", "criterion")) {
    const auto c = lower(v->first);
    if (c == "mr") sel.criterion = Criterion::MR;
    else if (c == "mnc") sel.criterion = Criterion::MNC;
    else if (c == "cmnc") sel.criterion = Criterion::CMNC;
    else if (c == "np") sel.criterion = Criterion::NP;
    else v->second.fail("criterion must be mr, mnc, cmnc or np");
  }
  if (auto v = get("selection", "t")) sel.threshold = v->second.real(v->first);
  if (auto v = get("selection", "d")) sel.d = v->second.count(v->first);
  if (auto v = get("selection", "alpha")) sel.alpha = v->second.real(v->first);
  {
    LossSpec loss;
    bool any = false;
    const std::pair<const char*, double LossSpec::*> lambdas[] = {{"lambda_gg", &LossSpec::lambda_gg},
                                                                  {"lambda_gb", &LossSpec::lambda_gb},
                                                                  {"lambda_bg", &LossSpec::lambda_bg},
                                                                  {"lambda_bb", &LossSpec::lambda_bb}};
    for (const auto& [k, p] : lambdas)
      if (auto v = get("selection", k)) {
        loss.*p = v->second.real(v->first);
        any = true;
      }
    if (any) {
      if (sel.threshold) throw Error(ErrorKind::ConfigInvalid, source + ": [selection] sets both T and lambdas");
      loss.validate();
      sel.loss = loss;
    }
  }
  if (sel.threshold) LossSpec::for_threshold(*sel.threshold).validate();
  if (sel.criterion == Criterion::CMNC && !sel.d) throw Error(ErrorKind::ConfigInvalid, source + ": criterion cmnc needs D");
  if (!(sel.alpha >= 0.0)) throw Error(ErrorKind::ConfigInvalid, source + ": alpha must be non-negative");

  // [synth]
  if (auto v = get("synth", "preset")) {
    cfg.synth_preset = lower(v->first);
    if (cfg.synth_preset == "desk") cfg.synth = SynthConfig::desk();
    else if (cfg.synth_preset == "full") cfg.synth = SynthConfig::full();
    else v->second.fail("preset must be desk or full");
  }
  const std::pair<const char*, std::size_t SynthConfig::*> counts[] = {
      {"n_global", &SynthConfig::n_global},     {"n_hetero", &SynthConfig::n_hetero},
      {"n_lowvar", &SynthConfig::n_lowvar},     {"n_highvar", &SynthConfig::n_highvar},
      {"block_size", &SynthConfig::block_size}, {"n_groups", &SynthConfig::n_groups},
      {"n_subclasses", &SynthConfig::n_subclasses}};
  for (const auto& [k, p] : counts)
    if (auto v = get("synth", k)) cfg.synth.*p = v->second.count(v->first);
  cfg.synth.n_features = cfg.synth.n_global + cfg.synth.n_hetero + cfg.synth.n_lowvar + cfg.synth.n_highvar;
  if (auto v = get("synth", "n_features")) cfg.synth.n_features = v->second.count(v->first);
  if (auto v = get("synth", "rho")) cfg.synth.rho = v->second.real(v->first);
  if (auto v = get("synth", "group_sigmas")) {
    cfg.synth.group_sigmas.clear();
    for (const auto& pair : split(v->first, ';')) {
      const auto xy = split(pair, ',');
      if (xy.size() != 2) v->second.fail("group_sigmas must be 's0,s1; s0,s1; ...'");
      cfg.synth.group_sigmas.emplace_back(v->second.real(xy[0]), v->second.real(xy[1]));
    }
  }
  cfg.synth.validate();

  // [plan]
  if (auto v = get("plan", "n_grid")) cfg.plan.n_grid = parse_grid(v->first, v->second);
  if (auto v = get("plan", "replicates")) cfg.plan.replicates = v->second.count(v->first);
  if (auto v = get("plan", "base_seed")) cfg.plan.base_seed = v->second.u64(v->first);
  if (auto v = get("plan", "methods")) cfg.plan.methods = split(v->first, ',');
  cfg.experiment_plan(1).validate();
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.string());
}

inline std::string RunConfig::echo() const {
  std::ostringstream os;
  auto put = [&](const std::string& k, const std::string& v) { os << k << '=' << v << '\n'; };
  auto d = [](double x) { return format_double(x); };
  put("prior.preset", prior_preset);
  const std::pair<const char*, const NIWHyper*> blocks[] = {{"0", &prior.good0}, {"1", &prior.good1}, {"b", &prior.bad}};
  for (const auto& [b, h] : blocks) {
    put(std::string("prior.s") + b, d(h->s));
    put(std::string("prior.kappa") + b, d(h->kappa));
    put(std::string("prior.m") + b, d(h->m));
    put(std::string("prior.nu") + b, d(h->nu));
  }
  put("prior.pi", d(prior.pi));
  put("prior.logL", d(resolve(prior).logL));
  put("selection.criterion", to_string(selection.criterion));
  if (selection.threshold) put("selection.T", d(*selection.threshold));
  if (selection.loss) {
    put("selection.lambda_gg", d(selection.loss->lambda_gg));
    put("selection.lambda_gb", d(selection.loss->lambda_gb));
    put("selection.lambda_bg", d(selection.loss->lambda_bg));
    put("selection.lambda_bb", d(selection.loss->lambda_bb));
  }
  if (selection.d) put("selection.D", std::to_string(*selection.d));
  put("selection.alpha", d(selection.alpha));
  put("synth.preset", synth_preset);
  std::istringstream synth_lines(synth.describe());
  for (std::string l; std::getline(synth_lines, l);) os << "synth." << l << '\n';
  std::string grid;
  for (std::size_t i = 0; i < plan.n_grid.size(); ++i) grid += (i ? "," : "") + std::to_string(plan.n_grid[i]);
  put("plan.n_grid", grid);
  put("plan.replicates", std::to_string(plan.replicates));
  put("plan.base_seed", std::to_string(plan.base_seed));
  std::string methods;
  for (std::size_t i = 0; i < plan.methods.size(); ++i) methods += (i ? "," : "") + MethodSpec::parse(plan.methods[i]).label();
  put("plan.methods", methods);
  return os.str();
}

}  // namespace obf::io
