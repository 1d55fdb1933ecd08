#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>

#include "helpers.hpp"
#include "vpred/pipeline.hpp"

using namespace vpred;
using namespace vpred::testing;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string err;
};

RunResult run_cli(const std::string& args, const fs::path& scratch) {
  const auto err = scratch / "stderr.txt";
  const std::string cmd = std::string(VPRED_CLI_PATH) + " " + args + " >/dev/null 2>" + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_file(err);
  return r;
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return out;
}

}  // namespace

TEST(ConfigText, SectionsCommentsAndQuotes) {
  auto kv = parse_config_text("# top\n[input]\nupdates = \"a.txt\" # trailing\n\n[ run ]\nseed=4\n", "x.conf");
  EXPECT_EQ(kv.at("input.updates"), "a.txt");
  EXPECT_EQ(kv.at("run.seed"), "4");
  EXPECT_EQ(kv.size(), 2u);
  try {
    parse_config_text("[run]\nseed\n", "x.conf");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "x.conf:2");
  }
  EXPECT_THROW(parse_config_text("[run\n", "x.conf"), ConfigError);
}

TEST(MakeConfig, ErrorsNameTheField) {
  auto field_of = [](std::map<std::string, std::string> kv) {
    try {
      make_config(kv, {}, true);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of({{"run.colour", "red"}}), "run.colour");
  EXPECT_EQ(field_of({{"selection.alpha", "0"}}), "selection.alpha");
  EXPECT_EQ(field_of({{"selection.alpha", "abc"}}), "selection.alpha");
  EXPECT_EQ(field_of({{"selection.budget", "-1"}}), "selection.budget");
  EXPECT_EQ(field_of({{"sampling.per_period", "10"}}), "sampling.per_period");
  EXPECT_EQ(field_of({{"sampling.start", "10"}}), "sampling.end");
  EXPECT_EQ(field_of({{"sampling.start", "10"}, {"sampling.end", "5"}}), "sampling.end");
  EXPECT_EQ(field_of({{"features.disabled", "9"}}), "features.disabled");
  EXPECT_EQ(field_of({{"input.updates", "/nonexistent/u.txt"}}), "input.updates");
  EXPECT_EQ(field_of({{"simulate.k_sweep", "5:1"}}), "simulate.k_sweep");
  EXPECT_EQ(field_of({{"simulate.n", "50"}, {"simulate.k_sweep", "1:60"}}), "simulate.k_sweep");
  EXPECT_EQ(field_of({{"simulate.strategies", "random,best"}}), "simulate.strategies");
  EXPECT_EQ(field_of({{"run.tag", "a/b"}}), "run.tag");
  EXPECT_EQ(field_of({{"sampling.mode", "random"}, {"sampling.per_period", "10"}}), "<none>");
}

TEST(MakeConfig, ParsesValuesAndResolvesPaths) {
  auto c = make_config({{"input.updates", "u1.txt, /abs/u2.txt"},
                        {"categories.tier1", "174,3356"},
                        {"simulate.k_sweep", "1:20:5"},
                        {"features.disabled", "0,8"},
                        {"benchmark.targets", "0.5,1"}},
                       "/base", false);
  EXPECT_EQ(c.updates, (std::vector<std::string>{"/base/u1.txt", "/abs/u2.txt"}));
  EXPECT_EQ(c.tier1, (std::set<Asn>{174, 3356}));
  EXPECT_EQ(c.simulate.ks, (std::vector<std::size_t>{1, 6, 11, 16}));
  EXPECT_TRUE(c.disabled.test(0));
  EXPECT_TRUE(c.disabled.test(8));
  EXPECT_EQ(c.targets, (std::vector<double>{0.5, 1.0}));
  EXPECT_TRUE(std::isinf(c.budget));
}

TEST(Artifacts, Sha256AndAtomicWrite) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  TempDir dir("atomic");
  write_atomic(dir / "sub/out.txt", [](std::ostream& os) { os << "hello\n"; });
  EXPECT_EQ(read_file(dir / "sub/out.txt"), "hello\n");
  EXPECT_FALSE(fs::exists(dir / "sub/out.txt.tmp"));
}

TEST(Artifacts, OutputRootFromEnvironment) {
  PipelineConfig c;
  c.output = "rel";
  c.tag = "t";
  ::setenv(kOutputRootEnv, "/tmp/root", 1);
  EXPECT_EQ(stage_dir(c), fs::path("/tmp/root/rel/t"));
  c.output = "/abs";
  EXPECT_EQ(stage_dir(c), fs::path("/abs/t"));
  ::unsetenv(kOutputRootEnv);
}

TEST(Cli, ConfigErrorExitsOneWithFieldPath) {
  TempDir dir("cli_cfg");
  write_text(dir / "bad.conf", "[selection]\nalpha = 2\n");
  auto r = run_cli("score --config " + (dir / "bad.conf").string(), dir.path());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("selection.alpha"), std::string::npos) << r.err;
  auto s = run_cli("score --config " + (dir / "bad.conf").string() + " --set run.nope=1", dir.path());
  EXPECT_EQ(s.code, 1);
  auto t = run_cli("features", dir.path());
  EXPECT_EQ(t.code, 1);
  EXPECT_NE(t.err.find("--config"), std::string::npos) << t.err;
}

TEST(Cli, MissingCheckpointExitsTwoNamingTheStage) {
  TempDir dir("cli_ckpt");
  write_text(dir / "u.txt", "10|a|A|p|1 2|\n");
  write_text(dir / "ok.conf", "[input]\nupdates = u.txt\n[run]\noutput = " + (dir / "out").string() + "\n");
  const auto conf = (dir / "ok.conf").string();
  const std::pair<const char*, const char*> cases[] = {{"detect-events", "ingest-check"},
                                                       {"sample-events", "detect-events"},
                                                       {"features", "sample-events"},
                                                       {"score", "features"},
                                                       {"select", "score"},
                                                       {"benchmark", "score"}};
  for (const auto& [stage, needed] : cases) {
    auto r = run_cli(std::string(stage) + " --config " + conf, dir.path());
    EXPECT_EQ(r.code, 2) << stage;
    EXPECT_NE(r.err.find(std::string("'") + needed + "'"), std::string::npos) << stage << ": " << r.err;
  }
  EXPECT_EQ(run_cli("ingest-check --config " + conf, dir.path()).code, 0);
  EXPECT_TRUE(fs::exists(dir / "out/default/ingest_summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "out/default/manifest.json"));
}

// Simulated archive through every stage; reruns and resumed stages are
// byte-identical.
TEST(Cli, EndToEndOnSimulatedArchiveIsReproducible) {
  TempDir dir("cli_e2e");
  const auto sim = (dir / "sim").string();
  auto r = run_cli("simulate --n 60 --seeds 2 --k-sweep 1,10,20,60 --archive-vps 10 --seed 5 --output " + sim +
                       " --set simulate.churn_changes=300",
                   dir.path());
  ASSERT_EQ(r.code, 0) << r.err;
  const fs::path sim_dir = fs::path(sim) / "default";
  auto coverage = read_file(sim_dir / "coverage.csv");
  EXPECT_EQ(coverage.substr(0, coverage.find('\n')), "strategy,k,seed,p2p_coverage,c2p_coverage");
  EXPECT_NE(coverage.find("greedy,60,6,1,1\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(sim_dir / "topologies/seed_5.rel"));

  const auto conf = (sim_dir / "archive/pipeline.conf").string();
  auto run_all = [&](const std::string& out, int jobs) {
    for (const auto& stage : {"ingest-check", "detect-events", "sample-events", "features", "score", "select",
                              "benchmark"}) {
      auto res = run_cli(std::string(stage) + " --config " + conf + " --output " + out + " --jobs " +
                             std::to_string(jobs),
                         dir.path());
      ASSERT_EQ(res.code, 0) << stage << ": " << res.err;
    }
  };
  const auto out1 = (dir / "run1").string(), out2 = (dir / "run2").string();
  run_all(out1, 2);
  auto a = snapshot_dir(out1);
  run_all(out1, 2);
  EXPECT_EQ(snapshot_dir(out1), a);
  run_all(out2, 1);
  auto b = snapshot_dir(out2);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [name, content] : a) {
    if (name.ends_with("manifest.json")) continue;  // input paths and --jobs differ
    EXPECT_EQ(content, b.at(name)) << name;
  }
  for (const auto* f : {"candidates.txt", "events.txt", "features.csv", "scores.csv", "volumes.csv", "selection.csv",
                        "benchmark.csv"}) {
    EXPECT_TRUE(a.contains(std::string("simulated/") + f)) << f;
  }

  fs::remove(fs::path(out1) / "simulated/scores.csv");
  fs::remove(fs::path(out1) / "simulated/selection.csv");
  ASSERT_EQ(run_cli("score --config " + conf + " --output " + out1, dir.path()).code, 0);
  ASSERT_EQ(run_cli("select --config " + conf + " --output " + out1 + " --year simulated --budget 1e6", dir.path()).code,
            0);
  EXPECT_EQ(read_file(fs::path(out1) / "simulated/scores.csv"), a.at("simulated/scores.csv"));
  auto sel = read_file(fs::path(out1) / "simulated/selection.csv");
  EXPECT_EQ(sel.substr(0, sel.find('\n')), "rank,vp_id,max_redundancy_at_pick,volume,cumulative_volume");

  auto manifest = nlohmann::json::parse(read_file(fs::path(out1) / "simulated/manifest.json"));
  for (const auto* stage : {"ingest-check", "detect-events", "sample-events", "features", "score", "select",
                            "benchmark"}) {
    ASSERT_TRUE(manifest.contains(stage)) << stage;
    EXPECT_EQ(manifest[stage]["version"], kVersion);
    EXPECT_EQ(manifest[stage]["seed"], 5);
  }
  EXPECT_EQ(manifest["score"]["outputs"]["scores.csv"], file_sha256(fs::path(out1) / "simulated/scores.csv"));

  auto unknown = run_cli("select --config " + conf + " --output " + out1 + " --year 1999", dir.path());
  EXPECT_EQ(unknown.code, 2) << unknown.err;
}
