#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "fmlmc/errors.hpp"
#include "fmlmc/experiment.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_flag, bool has_seed,
                std::uint64_t seed, bool full) {
  fmlmc::ExperimentConfig config = fmlmc::load_config(config_path);
  if (const char* env = std::getenv("FMLMC_OUT"); env && *env) config.output_dir = env;
  if (!out_flag.empty()) config.output_dir = out_flag;
  if (has_seed) config.seed = seed;
  if (full) fmlmc::apply_full_scale(config);

  const fmlmc::ExperimentResult result = fmlmc::run_experiment(config);
  for (const std::string& file : result.files) std::cout << file << "\n";
  return 0;
}

int cost_table_command(int dim, const std::string& filtered, int depth) {
  const fmlmc::FilterConfig filters =
      filtered == "yes" ? fmlmc::FilterConfig::filtered() : fmlmc::FilterConfig::unfiltered();
  const fmlmc::CostTable table =
      fmlmc::cost_table(fmlmc::CostModel::for_setup(dim, filters), depth);
  std::printf("level,offset,normalized_cost,ratio_to_coarser\n");
  for (int level = 0; level <= depth; ++level) {
    std::printf("%d,%d,%.12g,", level, level - depth, table.normalized[level]);
    if (level > 0) std::printf("%.12g", table.ratios[level - 1]);
    std::printf("\n");
  }
  return 0;
}

int damping_command(int n1) {
  std::fputs(fmlmc::damping_curves_csv(n1).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo, multilevel, and filtered multilevel estimation of "
               "discretized random fields"};
  app.require_subcommand(1);
  app.footer("Environment: FMLMC_OUT overrides the output directory, FMLMC_THREADS the\n"
             "ensemble thread count.  Exit codes: 0 success, 2 config error, 3 solver failure.");

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool full = false;
  CLI::App* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("config", config_path, "Path to the JSON config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides config and FMLMC_OUT)");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Root seed override");
  run->add_flag("--full", full, "Apply the config's full-scale overrides");

  int dim = 1;
  std::string filtered = "no";
  int table_depth = 5;
  CLI::App* cost = app.add_subcommand("cost-table", "Print normalized level costs as CSV");
  cost->add_option("--dim", dim, "Spatial dimension")->check(CLI::IsMember({1, 2}));
  cost->add_option("--filtered", filtered, "Smoothed transfers (yes/no)")
      ->check(CLI::IsMember({"yes", "no"}));
  cost->add_option("--depth", table_depth, "Number of levels below the finest")
      ->check(CLI::Range(0, 40));

  int damping_n = 32;
  CLI::App* damping =
      app.add_subcommand("damping", "Print two-grid damping factor curves as CSV");
  damping->add_option("--n", damping_n, "Fine-grid size (even)")->check(CLI::Range(2, 1 << 20));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // flag/usage problems are config errors
  }

  try {
    if (run->parsed()) return run_command(config_path, out_dir, seed_opt->count() > 0, seed, full);
    if (cost->parsed()) return cost_table_command(dim, filtered, table_depth);
    if (damping->parsed()) return damping_command(damping_n);
  } catch (const fmlmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fmlmc::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
