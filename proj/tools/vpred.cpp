// vpred: run one pipeline stage.
//
//   vpred <stage> --config run.conf [--set section.key=value ...] [--jobs N]
//   vpred select --config run.conf --year 2023 --budget 1e6
//   vpred simulate --n 600 --k-sweep 1:600 --strategies random,distance,greedy --seeds 20
//
// Exit status: 0 success, 1 configuration or runtime error, 2 missing
// checkpoint from an earlier stage.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "vpred/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  unsigned jobs = 0;
  std::string output;
  std::string tag;
  std::string seed;
  std::string budget;
  std::string n, k_sweep, strategies, seeds, archive_vps;
  bool verbose = false;
};

std::map<std::string, std::string> overrides(const std::string& stage, const Options& o) {
  std::map<std::string, std::string> kv;
  for (const auto& s : o.sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw vpred::ConfigError("--set", "expected section.key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) kv[key] = v;
  };
  if (o.jobs) kv["run.jobs"] = std::to_string(o.jobs);
  put("run.output", o.output);
  put("run.tag", o.tag);
  put("run.seed", o.seed);
  put("selection.budget", o.budget);
  if (stage == "simulate") {
    put("simulate.n", o.n);
    put("simulate.k_sweep", o.k_sweep);
    put("simulate.strategies", o.strategies);
    put("simulate.seeds", o.seeds);
    put("simulate.archive_vps", o.archive_vps);
  }
  return kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BGP vantage point redundancy scoring and selection"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("-v,--verbose", o.verbose, "Debug logging");

  for (const auto& stage : vpred::stage_names()) {
    auto* sub = app.add_subcommand(stage);
    sub->add_option("--config", o.config, "Configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", o.sets, "Override a setting, section.key=value");
    sub->add_option("--jobs", o.jobs, "Worker threads for parallel stages");
    sub->add_option("--output", o.output, "Output directory");
    sub->add_option("--tag", o.tag, "Artifact tag (subdirectory of the output directory)");
    sub->add_option("--seed", o.seed, "Random seed");
    if (stage == "select") {
      sub->add_option("--year", o.tag, "Tag of the precomputed scores to select from");
      sub->add_option("--budget", o.budget, "Volume budget in updates per hour");
    }
    if (stage == "simulate") {
      sub->add_option("--n", o.n, "Number of ASes");
      sub->add_option("--k-sweep", o.k_sweep, "VP counts, first:last[:step] or a list");
      sub->add_option("--strategies", o.strategies, "random,distance,greedy");
      sub->add_option("--seeds", o.seeds, "Number of seeded topologies");
      sub->add_option("--archive-vps", o.archive_vps, "Also emit a churn archive seen by this many VPs");
    }
  }
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(o.verbose ? spdlog::level::debug : spdlog::level::info);
  const std::string stage = app.get_subcommands().front()->get_name();

  try {
    vpred::PipelineConfig cfg;
    auto kv = overrides(stage, o);
    if (!o.config.empty()) {
      cfg = vpred::load_config(o.config, kv);
    } else if (stage == "simulate") {
      cfg = vpred::make_config(kv);
    } else {
      throw vpred::ConfigError("--config", "required for stage " + stage);
    }
    vpred::run_stage(stage, cfg);
  } catch (const vpred::CheckpointError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const vpred::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
