// cmilab: runs one named experiment from a JSON config and writes CSV
// results plus manifest.json into the output directory.
//
// Exit codes: 0 ok, 1 certified bound violated, 2 unknown experiment,
// 3 schema violation, 4 budget exceeded, 5 other failure. Runs that end in 1
// or in a reported failure (such as aborted training) keep their CSVs but
// get no manifest.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cmilab/errors.hpp"
#include "cmilab/parallel.hpp"
#include "experiments.hpp"

#ifndef CMILAB_VERSION
#define CMILAB_VERSION "unknown"
#endif

namespace {

using namespace cmilab;
using namespace cmilab::cli;

enum Exit { kOk = 0, kBound = 1, kUnknown = 2, kSchema = 3, kBudget = 4, kFailure = 5 };

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw SchemaError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw SchemaError("config '" + path + "': " + e.what());
  }
}

int run(const std::string& name, const std::string& config_path, std::optional<std::string> out_flag,
        std::optional<std::uint64_t> seed_flag, int threads) {
  const auto& table = experiments();
  const auto it = table.find(name);
  if (it == table.end()) {
    std::cerr << "cmilab: unknown experiment '" << name << "'\n";
    return kUnknown;
  }

  Params top(load_config(config_path), "config");
  if (top.has("experiment") && top.require<std::string>("experiment") != name) {
    std::cerr << "cmilab: config is for a different experiment\n";
    return kUnknown;
  }
  const auto seed = seed_flag ? *seed_flag : top.get<std::uint64_t>("seed", 1);
  const auto base_name = top.get<std::string>("log_base", "2");
  if (base_name != "2" && base_name != "e") throw SchemaError("config.log_base: \"2\" or \"e\"");
  const auto out = out_flag ? *out_flag : top.get<std::string>("out", "");
  if (out.empty()) throw SchemaError("no output directory: pass --out or set config.out");
  json params_echo = top.has("params") ? top.raw("params") : json::object();
  Params params(params_echo, "params");
  top.finish();

  set_num_threads(threads);
  RunContext ctx(seed, base_name == "2" ? LogBase::Two : LogBase::E, name);
  const auto t0 = std::chrono::steady_clock::now();
  it->second(params, ctx);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ctx.artifacts.commit(out);
  if (!ctx.violations.empty()) {
    for (const auto& v : ctx.violations) std::cerr << "cmilab: bound violated: " << v << "\n";
    return kBound;
  }
  if (!ctx.failures.empty()) {
    for (const auto& f : ctx.failures) std::cerr << "cmilab: " << f << "\n";
    return kFailure;
  }
  const json manifest = {{"tool", "cmilab"},
                         {"version", CMILAB_VERSION},
                         {"experiment", name},
                         {"config", {{"experiment", name},
                                     {"seed", seed},
                                     {"log_base", base_name},
                                     {"out", out},
                                     {"params", params_echo}}},
                         {"seed", seed},
                         {"threads", threads},
                         {"wall_time_s", wall},
                         {"outputs", ctx.artifacts.checksums()},
                         {"summary", ctx.summary}};
  write_atomically(std::filesystem::path(out) / "manifest.json", manifest.dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional mutual information experiments"};
  std::string name, config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string names;
  for (const auto& [k, v] : experiments()) names += (names.empty() ? "" : ", ") + k;
  app.add_option("experiment", name, "One of: " + names)->required();
  app.add_option("--config", config, "JSON config {experiment?, seed?, log_base?, out?, params}");
  app.add_option("--out", out, "Output directory (overrides config.out)");
  app.add_option("--seed", seed, "Master seed (overrides config.seed)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.set_version_flag("--version", CMILAB_VERSION);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kSchema;
  }

  try {
    return run(name, config, out, seed, threads);
  } catch (const BudgetError& e) {
    std::cerr << "cmilab: budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const SchemaError& e) {
    std::cerr << "cmilab: schema violation: " << e.what() << "\n";
    return kSchema;
  } catch (const std::invalid_argument& e) {
    std::cerr << "cmilab: invalid parameters: " << e.what() << "\n";
    return kSchema;
  } catch (const std::domain_error& e) {
    std::cerr << "cmilab: invalid parameters: " << e.what() << "\n";
    return kSchema;
  } catch (const std::exception& e) {
    std::cerr << "cmilab: " << e.what() << "\n";
    return kFailure;
  }
}
