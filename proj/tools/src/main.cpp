#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "immsim/cli.hpp"
#include "immsim/error.hpp"

int main(int argc, char** argv) {
  using namespace immsim::cli;

  CLI::App app{"Immigration under repulsion: kinetic solver, patch model, micro simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool lenient = false;
  app.add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides config)");
  app.add_option("--threads", threads, "Worker threads for replica simulation")->check(CLI::PositiveNumber);
  auto* strict_flag = app.add_flag("--strict", "Reject unknown configuration keys (default)");
  app.add_flag("--lenient", lenient, "Ignore unknown configuration keys")->excludes(strict_flag);
  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    std::ifstream in(config_path, std::ios::binary);
    std::stringstream text;
    text << in.rdbuf();
    cfg = parse_config(text.str(), !lenient);
  } catch (const immsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (*out_opt) cfg.output_dir = out_dir;
  if (*seed_opt) cfg.micro.seed = seed;
  return run(cfg, threads);
}
