#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "plim/cli/commands.hpp"

using namespace plim;

namespace {

struct Overrides {
  std::string config;
  std::string atlas;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Overrides& o, const char* atlas_help) {
  cmd->add_option("--config", o.config, "YAML run configuration");
  cmd->add_option("--atlas", o.atlas, atlas_help);
  cmd->add_option("--preset", o.preset, "initial condition preset (L1..L4, H1, H2, C-Ex1, C-Ex2)");
  cmd->add_option("--seed", o.seed, "base seed of the sheet solves");
  cmd->add_option("--out", o.out, "output directory");
}

cli::RunConfig resolve(const Overrides& o, bool atlas_is_input) {
  cli::RunConfig c = o.config.empty() ? cli::RunConfig{} : cli::load_config(o.config);
  if (!o.preset.empty()) {
    c.preset = o.preset;
    c.initial.clear();
  }
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.out = o.out;
  if (atlas_is_input && !o.atlas.empty()) c.atlas.path = o.atlas;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametrized locally invariant manifolds: atlas precompute, coarse evolution and comparison"};
  app.require_subcommand(1);

  std::string init_path = "plim.yaml";
  auto* init = app.add_subcommand("init", "write a configuration template with every default");
  init->add_option("path", init_path, "file to create");

  Overrides pre, evo, cmp;
  auto* precompute = app.add_subcommand("precompute", "generate an atlas and write it");
  add_common(precompute, pre, "atlas file to write (default <out>/atlas.plim)");
  auto* evolve = app.add_subcommand("evolve", "run the coarse theory");
  add_common(evolve, evo, "atlas file to read (binary or text export)");
  auto* compare = app.add_subcommand("compare", "run fine and coarse and write comparison files");
  add_common(compare, cmp, "atlas file to read (binary or text export)");

  std::string avg_in, avg_out = "averages.csv";
  auto* average = app.add_subcommand("average", "running time averages of a CSV time series");
  average->add_option("input", avg_in, "CSV with time in the first column")->required();
  average->add_option("--out", avg_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kConfigError;
  }

  try {
    if (*init) return cli::cmd_init(init_path, std::cout);
    if (*precompute) return cli::cmd_precompute(resolve(pre, false), pre.atlas, std::cout);
    if (*evolve) return cli::cmd_evolve(resolve(evo, true), std::cout);
    if (*compare) return cli::cmd_compare(resolve(cmp, true), std::cout);
    if (*average) return cli::cmd_average(avg_in, avg_out, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kRunFailure;
  }
  return cli::kOk;
}
