#pragma once

// Seedable generator for the synergetic microarray model: correlated marker
// blocks, subclass (heterogeneous) markers, correlated low-variance nulls and
// mixture high-variance nulls, spread over variance groups.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "obf/digest.hpp"
#include "obf/error.hpp"
#include "obf/parallel.hpp"
#include "obf/rng.hpp"

namespace obf {

struct SynthConfig {
  std::size_t n_features = 2000;
  std::size_t n_global = 10;
  std::size_t n_hetero = 40;
  std::size_t n_lowvar = 1150;
  std::size_t n_highvar = 800;
  std::size_t block_size = 5;
  double rho = 0.8;
  std::size_t n_groups = 4;
  // Per group (class-0 variance, class-1 variance).
  std::vector<std::pair<double, double>> group_sigmas = {{0.16, 0.16}, {0.49, 0.49}, {0.09, 0.25}, {0.49, 0.64}};
  std::size_t n_subclasses = 2;

  std::size_t n_markers() const { return n_global + n_hetero; }

  // Class-1 marker mean for position j within a block: 1, 1/2, ..., 1/k.
  static double mu1(std::size_t j) { return 1.0 / static_cast<double>(j + 1); }

  // Blocks are dealt to groups round-robin within each role.
  void validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); };
    if (block_size == 0) fail("block_size must be positive");
    if (n_groups == 0) fail("n_groups must be positive");
    if (n_subclasses < 2) fail("n_subclasses must be at least 2");
    if (n_global + n_hetero + n_lowvar + n_highvar != n_features)
      fail("role counts sum to " + std::to_string(n_global + n_hetero + n_lowvar + n_highvar) + " but n_features is " +
           std::to_string(n_features));
    if (n_global % block_size || n_hetero % block_size || n_lowvar % block_size)
      fail("global, heterogeneous and low-variance counts must be multiples of block_size");
    if ((n_hetero / block_size) % n_subclasses)
      fail("heterogeneous block count must be a multiple of n_subclasses");
    if (group_sigmas.size() != n_groups) fail("group_sigmas must have one pair per group");
    for (const auto& [s0, s1] : group_sigmas)
      if (!(s0 > 0.0) || !(s1 > 0.0)) fail("group variances must be positive");
    if (block_size > 1) {
      const double lo = -1.0 / (static_cast<double>(block_size) - 1.0);
      if (!(rho > lo && rho < 1.0)) fail("rho outside the positive-definite range for this block size");
    }
  }

  // Canonical key=value description; the digest of this text identifies the config.
  std::string describe() const {
    auto d = [](double x) {
      char buf[32];
      auto r = std::to_chars(buf, buf + sizeof buf, x);
      return std::string(buf, r.ptr);
    };
    std::ostringstream os;
    os << "n_features=" << n_features << "\nn_global=" << n_global << "\nn_hetero=" << n_hetero
       << "\nn_lowvar=" << n_lowvar << "\nn_highvar=" << n_highvar << "\nblock_size=" << block_size
       << "\nrho=" << d(rho) << "\nn_groups=" << n_groups << "\ngroup_sigmas=";
    for (std::size_t i = 0; i < group_sigmas.size(); ++i)
      os << (i ? ";" : "") << d(group_sigmas[i].first) << "," << d(group_sigmas[i].second);
    os << "\nn_subclasses=" << n_subclasses << "\n";
    return os.str();
  }

  std::uint64_t digest() const { return obf::digest(describe()); }

  static SynthConfig full() {
    SynthConfig c;
    c.n_features = 20000;
    c.n_global = 20;
    c.n_hetero = 80;
    c.n_lowvar = 11900;
    c.n_highvar = 8000;
    return c;
  }

  static SynthConfig desk() { return SynthConfig{}; }
};

struct BlockCovariance {
  std::size_t k = 0;
  std::vector<double> cov;   // row-major k x k
  std::vector<double> chol;  // lower-triangular factor, row-major

  double at(std::size_t i, std::size_t j) const { return cov[i * k + j]; }
  double l(std::size_t i, std::size_t j) const { return chol[i * k + j]; }
};

inline BlockCovariance block_covariance(std::size_t k, double rho, double sigma) {
  BlockCovariance b{k, std::vector<double>(k * k), std::vector<double>(k * k, 0.0)};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) b.cov[i * k + j] = i == j ? sigma : sigma * rho;
  for (std::size_t j = 0; j < k; ++j) {
    double d = b.cov[j * k + j];
    for (std::size_t p = 0; p < j; ++p) d -= b.chol[j * k + p] * b.chol[j * k + p];
    if (!(d > 0.0)) throw Error(ErrorKind::NotPD, "block covariance is not positive definite");
    const double ljj = std::sqrt(d);
    b.chol[j * k + j] = ljj;
    for (std::size_t i = j + 1; i < k; ++i) {
      double v = b.cov[i * k + j];
      for (std::size_t p = 0; p < j; ++p) v -= b.chol[i * k + p] * b.chol[j * k + p];
      b.chol[i * k + j] = v / ljj;
    }
  }
  return b;
}

enum class FeatureRole : std::uint8_t { Global, Hetero, LowVarNull, HighVarNull };

inline const char* to_string(FeatureRole r) {
  switch (r) {
    case FeatureRole::Global: return "GLOBAL";
    case FeatureRole::Hetero: return "HETERO";
    case FeatureRole::LowVarNull: return "LOWVAR_NULL";
    case FeatureRole::HighVarNull: return "HIGHVAR_NULL";
  }
  return "?";
}

inline bool is_marker(FeatureRole r) { return r == FeatureRole::Global || r == FeatureRole::Hetero; }

// Samples in rows, features in columns; stored column-major so each feature
// is a contiguous span. The first n/2 rows are class 0.
struct LabeledMatrix {
  std::size_t n_samples = 0;
  std::size_t n_features = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::vector<FeatureRole> truth;
  std::vector<std::size_t> group;
  std::vector<std::size_t> block;  // generation unit; one per high-variance null
  std::vector<std::size_t> slot;   // position within the block
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;

  std::span<const double> column(std::size_t f) const { return {values.data() + f * n_samples, n_samples}; }
  std::span<double> column(std::size_t f) { return {values.data() + f * n_samples, n_samples}; }
  double at(std::size_t row, std::size_t f) const { return values[f * n_samples + row]; }
  std::size_t n_class0() const { return n_samples / 2; }
};

inline std::vector<std::size_t> truth_set(const LabeledMatrix& m) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < m.truth.size(); ++f)
    if (is_marker(m.truth[f])) out.push_back(f);
  return out;
}

// Sizes of the class-1 subclasses; earlier subclasses take the remainder.
inline std::vector<std::size_t> subclass_sizes(std::size_t n1, std::size_t c) {
  std::vector<std::size_t> sizes(c, n1 / c);
  for (std::size_t i = 0; i < n1 % c; ++i) ++sizes[i];
  return sizes;
}

namespace detail {

struct GenUnit {
  FeatureRole role;
  std::size_t group;
  std::size_t shifted_subclass;  // heterogeneous blocks only
  std::size_t first;             // canonical index of the first feature
  std::size_t width;             // block_size, or 1 for high-variance nulls
};

// Fills rows [begin, end) of a block's columns with N(mean, L L^T).
inline void draw_block(rng::NormalSource& normal, const BlockCovariance& cov, bool shifted,
                       std::span<double* const> cols, std::size_t begin, std::size_t end) {
  const std::size_t k = cov.k;
  std::vector<double> z(k);
  for (std::size_t row = begin; row < end; ++row) {
    for (auto& v : z) v = normal();
    for (std::size_t i = 0; i < k; ++i) {
      double acc = shifted ? SynthConfig::mu1(i) : 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += cov.l(i, j) * z[j];
      cols[i][row] = acc;
    }
  }
}

}  // namespace detail

inline LabeledMatrix generate(const SynthConfig& config, std::size_t n, std::uint64_t seed, unsigned threads = 1) {
  config.validate();
  if (n < 4 || n % 2) throw Error(ErrorKind::ConfigInvalid, "sample size must be even and at least 4");

  const std::size_t k = config.block_size;
  const std::size_t groups = config.n_groups;
  const std::size_t n0 = n / 2;
  const std::size_t n1 = n - n0;
  const auto sub = subclass_sizes(n1, config.n_subclasses);

  std::vector<detail::GenUnit> units;
  std::size_t canon = 0;
  auto add_blocks = [&](FeatureRole role, std::size_t count) {
    for (std::size_t b = 0; b < count; ++b) {
      const std::size_t shifted = (b / groups + 1) % config.n_subclasses;
      units.push_back({role, b % groups, shifted, canon, k});
      canon += k;
    }
  };
  add_blocks(FeatureRole::Global, config.n_global / k);
  add_blocks(FeatureRole::Hetero, config.n_hetero / k);
  add_blocks(FeatureRole::LowVarNull, config.n_lowvar / k);
  for (std::size_t f = 0; f < config.n_highvar; ++f) {
    units.push_back({FeatureRole::HighVarNull, f % groups, 0, canon, 1});
    ++canon;
  }

  // Canonical feature index -> output column, shuffled by Fisher-Yates.
  std::vector<std::size_t> position(config.n_features);
  std::iota(position.begin(), position.end(), std::size_t{0});
  {
    rng::Xoshiro256 g(rng::mix(seed, 0));
    for (std::size_t i = position.size(); i > 1; --i) std::swap(position[i - 1], position[rng::uniform_below(g, i)]);
  }

  LabeledMatrix m;
  m.n_samples = n;
  m.n_features = config.n_features;
  m.values.assign(n * config.n_features, 0.0);
  m.labels.assign(n, 1);
  std::fill(m.labels.begin(), m.labels.begin() + static_cast<std::ptrdiff_t>(n0), std::uint8_t{0});
  m.truth.resize(config.n_features);
  m.group.resize(config.n_features);
  m.block.resize(config.n_features);
  m.slot.resize(config.n_features);
  m.seed = seed;
  m.config_digest = config.digest();

  std::vector<BlockCovariance> cov0;
  std::vector<BlockCovariance> cov1;
  for (const auto& [s0, s1] : config.group_sigmas) {
    cov0.push_back(block_covariance(k, config.rho, s0));
    cov1.push_back(block_covariance(k, config.rho, s1));
  }

  for (std::size_t ui = 0; ui < units.size(); ++ui)
    for (std::size_t j = 0; j < units[ui].width; ++j) {
      const std::size_t f = position[units[ui].first + j];
      m.truth[f] = units[ui].role;
      m.group[f] = units[ui].group;
      m.block[f] = ui;
      m.slot[f] = j;
    }

  parallel_for(units.size(), threads, [&](std::size_t ui) {
    const auto& u = units[ui];
    rng::NormalSource normal(rng::mix(seed, 1, ui));
    std::vector<double*> cols(u.width);
    for (std::size_t j = 0; j < u.width; ++j) cols[j] = m.values.data() + position[u.first + j] * n;
    const auto& c0 = cov0[u.group];
    const auto& c1 = cov1[u.group];
    switch (u.role) {
      case FeatureRole::Global:
        detail::draw_block(normal, c0, false, cols, 0, n0);
        detail::draw_block(normal, c1, true, cols, n0, n);
        break;
      case FeatureRole::Hetero: {
        detail::draw_block(normal, c0, false, cols, 0, n0);
        std::size_t row = n0;
        for (std::size_t s = 0; s < sub.size(); ++s) {
          const bool shifted = s == u.shifted_subclass;
          detail::draw_block(normal, shifted ? c1 : c0, shifted, cols, row, row + sub[s]);
          row += sub[s];
        }
        break;
      }
      case FeatureRole::LowVarNull:
        detail::draw_block(normal, c0, false, cols, 0, n);
        break;
      case FeatureRole::HighVarNull: {
        const double p = normal.uniform();
        const double sd0 = std::sqrt(config.group_sigmas[u.group].first);
        const double sd1 = std::sqrt(config.group_sigmas[u.group].second);
        for (std::size_t row = 0; row < n; ++row) {
          const bool first = normal.uniform() < p;
          const double z = normal();
          cols[0][row] = first ? sd0 * z : 1.0 + sd1 * z;
        }
        break;
      }
    }
  });
  return m;
}

// Digest of the generated values, labels and truth tags.
inline std::uint64_t matrix_digest(const LabeledMatrix& m) {
  Fnv1a h;
  h.update(m.values);
  h.update(m.labels.data(), m.labels.size());
  for (auto r : m.truth) h.update(to_string(r));
  return h.value();
}

}  // namespace obf
