// obf: Bayesian feature filtering from the command line.
//
//   obf rank        DATA.csv [--config C] [--out RANKED.csv]
//   obf select      DATA.csv|RANKED.csv [--config C] [--out SELECTED.csv]
//   obf roc         DATA.csv|RANKED.csv [--config C] [--out ROC.csv]
//   obf simulate    --n N --seed S --out DATA.csv [--config C]
//   obf consistency --out DIR [--config C] [--seed S] [--threads T]

#include <iostream>

#include "CLI11.hpp"
#include "obf/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal Bayesian feature filtering toolkit"};
  app.set_version_flag("--version", obf::cli::kToolVersion);
  app.require_subcommand(1);

  obf::cli::Options opt;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::string input;

  auto* config_opt = app.add_option("--config", config, "run configuration file (INI)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  auto* out_opt = app.add_option("--out", out, "output path (directory for consistency)");
  app.add_option("--threads", opt.threads, "worker threads, 0 = auto")->default_val(0);
  app.add_option("--label-column", opt.label_column, "name of the class label column")->default_val("label");
  app.add_flag("--transpose", opt.transpose, "features are rows instead of columns");

  auto* rank = app.add_subcommand("rank", "score and rank every feature of a dataset");
  auto* select = app.add_subcommand("select", "apply the configured selection criterion");
  auto* roc = app.add_subcommand("roc", "expected false/true positive curve over the ranking");
  auto* simulate = app.add_subcommand("simulate", "write a synthetic dataset and its truth file");
  auto* consistency = app.add_subcommand("consistency", "run a sample-size sweep and plot correctly labeled features");
  for (auto* sub : {rank, select, roc}) sub->add_option("input", input, "dataset or ranked CSV")->required();
  simulate->add_option("--n", opt.n, "sample size (even)")->default_val(200);
  for (auto* sub : {rank, select, roc, simulate, consistency}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  if (*config_opt) opt.config = config;
  if (*seed_opt) opt.seed = seed;
  if (*out_opt) opt.out = out;
  if (!input.empty()) opt.input = input;

  using namespace obf::cli;
  if (rank->parsed()) return run_guarded(cmd_rank, opt, std::cout, std::cerr);
  if (select->parsed()) return run_guarded(cmd_select, opt, std::cout, std::cerr);
  if (roc->parsed()) return run_guarded(cmd_roc, opt, std::cout, std::cerr);
  if (simulate->parsed()) return run_guarded(cmd_simulate, opt, std::cout, std::cerr);
  return run_guarded(cmd_consistency, opt, std::cout, std::cerr);
}
