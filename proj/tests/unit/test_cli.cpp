#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "immsim/cli.hpp"
#include "immsim/error.hpp"

using namespace immsim;
using namespace immsim::cli;
namespace fs = std::filesystem;

namespace {

const char* kKinetic = R"({
  "subcommand": "kinetic",
  "model": {
    "domain": {"dimension": 1, "length": 10, "cells": 100},
    "potential": {"kind": "tophat", "amplitude": 1, "radius": 0.5},
    "rate": {"kind": "constant", "value": 1}
  },
  "solver": {"t_end": 2, "snapshot_times": [0.5, 1]}
})";

const char* kMicro = R"({
  "subcommand": "micro",
  "model": {
    "domain": {"dimension": 1, "length": 10, "cells": 100},
    "potential": {"kind": "tophat", "amplitude": 1, "radius": 1},
    "rate": {"kind": "constant", "value": 1}
  },
  "solver": {"t_end": 20},
  "micro": {"seed": 4, "replicas": 30, "windows": [{"lo": [0], "hi": [1]}], "sample_times": [5, 10, 20]}
})";

std::string scratch(const std::string& name) {
  const fs::path p = fs::path(IMMSIM_TEST_SCRATCH) / name;
  fs::remove_all(p);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Errc parse_code(const std::string& text, bool strict = true) {
  try {
    parse_config(text, strict);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an immsim::Error");
  return Errc::range_error;
}

}  // namespace

TEST_CASE("defaults are applied") {
  const RunConfig cfg = parse_config(kKinetic);
  CHECK(cfg.subcommand == Subcommand::kinetic);
  CHECK(cfg.solver.dt == 0.01);
  CHECK(cfg.solver.method == KineticMethod::rk4);
  CHECK(cfg.domain == TorusDomain(1, 10.0, 100));
  CHECK(cfg.potential == Potential::tophat(1.0, 0.5));
  CHECK(cfg.initial_density == 0.0);
  CHECK(cfg.micro.epsilons == std::vector<double>{1.0, 0.5, 0.25, 0.125});
}

TEST_CASE("configurations survive a serialization round trip") {
  for (const char* text : {kKinetic, kMicro}) {
    const RunConfig cfg = parse_config(text);
    CHECK(parse_config(serialize_config(cfg)) == cfg);
  }
  RunConfig patches;
  patches.subcommand = Subcommand::patches;
  patches.patches.params = {1.0, 2.0, 0.5};
  patches.potential = Potential::zero();
  CHECK(parse_config(serialize_config(patches)).patches == patches.patches);
}

TEST_CASE("range, key and syntax errors") {
  std::string steep = kKinetic;
  steep.replace(steep.find("\"t_end\": 2"), 10, "\"t_end\": 2, \"dt\": 0.2");
  CHECK(parse_code(steep) == Errc::range_error);

  std::string extra = kKinetic;
  extra.replace(extra.find("\"t_end\": 2"), 10, "\"t_end\": 2, \"colour\": 3");
  CHECK(parse_code(extra) == Errc::unknown_key);
  CHECK(parse_config(extra, false).solver.t_end == 2.0);

  CHECK(parse_code("{\"subcommand\": ") == Errc::parse_error);
  CHECK(parse_code(R"({"subcommand": "teleport"})") == Errc::parse_error);
  std::string typed = kKinetic;
  typed.replace(typed.find("\"t_end\": 2"), 10, "\"t_end\": \"two\"");
  CHECK(parse_code(typed) == Errc::parse_error);
  std::string wide = kKinetic;
  wide.replace(wide.find("\"radius\": 0.5"), 13, "\"radius\": 7");
  CHECK(parse_code(wide) == Errc::range_error);
}

TEST_CASE("horizon run prints its values and succeeds") {
  RunConfig cfg;
  cfg.subcommand = Subcommand::horizon;
  cfg.output_dir = scratch("horizon");
  CHECK(run(cfg) == kExitOk);
  CHECK(fs::exists(fs::path(cfg.output_dir) / "horizon.csv"));
  CHECK(fs::exists(fs::path(cfg.output_dir) / "summary.json"));
}

TEST_CASE("kinetic run writes its artifacts") {
  RunConfig cfg = parse_config(kKinetic);
  cfg.output_dir = scratch("kinetic");
  CHECK(run(cfg) == kExitOk);
  const std::string density = slurp(fs::path(cfg.output_dir) / "kinetic_density.csv");
  CHECK(density.rfind("t,cell_index,rho\n", 0) == 0);
  CHECK(fs::exists(fs::path(cfg.output_dir) / "kinetic_bounds.csv"));
  const std::string summary = slurp(fs::path(cfg.output_dir) / "summary.txt");
  CHECK(summary.find("homogeneous_solution") != std::string::npos);
}

TEST_CASE("patches run succeeds") {
  RunConfig cfg;
  cfg.subcommand = Subcommand::patches;
  cfg.patches.params = {1.0, 2.0, 0.5};
  cfg.patches.t_end = 50.0;
  cfg.output_dir = scratch("patches");
  CHECK(run(cfg) == kExitOk);
}

TEST_CASE("a single replica cannot support window statistics") {
  RunConfig cfg = parse_config(kMicro);
  cfg.micro.replicas = 1;
  cfg.output_dir = scratch("micro_single");
  CHECK(run(cfg) == kExitNumeric);
}

TEST_CASE("micro artifacts do not depend on the worker count") {
  RunConfig cfg = parse_config(kMicro);
  cfg.output_dir = scratch("micro_1");
  CHECK(run(cfg, 1) == kExitOk);
  RunConfig other = cfg;
  other.output_dir = scratch("micro_3");
  CHECK(run(other, 3) == kExitOk);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(cfg.output_dir)) {
    if (entry.path().extension() != ".csv") continue;
    CHECK(slurp(entry.path()) == slurp(fs::path(other.output_dir) / entry.path().filename()));
    ++compared;
  }
  CHECK(compared >= 3);
}
