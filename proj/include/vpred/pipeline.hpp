#pragma once

// Checkpointed pipeline stages behind the command-line tool.
//
// Every stage reads its inputs from the configured archive and from earlier
// checkpoints in <output>/<tag>/, writes its artifacts atomically, and
// records input and output SHA-256 digests in manifest.json.

#include <openssl/evp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "vpred/evaldefs.hpp"
#include "vpred/events.hpp"
#include "vpred/minimet.hpp"
#include "vpred/redundancy.hpp"
#include "vpred/selection.hpp"

namespace vpred {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputRootEnv = "VPRED_OUTPUT_ROOT";

/// Invalid configuration; `field` is the dotted key (or file:line).
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A stage was asked to run before the stage it depends on.
class CheckpointError : public Error {
 public:
  CheckpointError(std::string stage, const std::string& what)
      : Error(what + " (run stage '" + stage + "' first)"), stage_(std::move(stage)) {}
  const std::string& required_stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// ---------------------------------------------------------------------------
// Configuration

/// `[section]` headers and `key = value` lines; `#` starts a comment.
/// Keys are returned as "section.key".
inline std::map<std::string, std::string> parse_config_text(std::string_view text, const std::string& origin) {
  std::map<std::string, std::string> out;
  std::string section;
  std::size_t no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(no);
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ConfigError(where, "malformed section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where, "expected key = value");
    auto key = std::string(detail::trim(line.substr(0, eq)));
    auto value = detail::trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ConfigError(where, "empty key");
    out[section.empty() ? key : section + "." + key] = std::string(value);
  }
  return out;
}

struct SimulateSettings {
  std::size_t n = kDefaultAsCount;
  double avg_degree = kDefaultAvgDegree;
  double exponent = kDefaultExponent;
  std::vector<std::size_t> ks{20};
  std::vector<DeployStrategy> strategies{DeployStrategy::random, DeployStrategy::distance_based,
                                         DeployStrategy::greedy_specific};
  std::size_t seeds = 20;
  std::size_t archive_vps = 0;  // 0: no churn archive
  std::size_t churn_changes = 120;
  Timestamp churn_duration = 6 * 3600;
};

struct PipelineConfig {
  std::vector<std::string> snapshots;
  std::vector<std::string> updates;
  std::string relationships;
  std::set<Asn> tier1;
  std::set<Asn> hypergiants;
  std::optional<Timeframe> timeframe;
  std::size_t periods = 500;
  std::size_t per_period = kCategoryPairs;
  std::size_t redraw_cap = 10;
  std::string sampling_mode = "balanced";
  FeatureMask disabled;
  double alpha = kDefaultAlpha;
  double budget = std::numeric_limits<double>::infinity();
  std::vector<double> targets{0.5, 0.7, 0.9};
  std::uint64_t seed = 0;
  std::filesystem::path output = "vpred-out";
  std::string tag = "default";
  unsigned jobs = 1;
  SimulateSettings simulate;
  std::string source;  // effective settings, one key=value per line; hashed into the manifest
};

namespace detail {

template <class T>
T config_number(const std::string& key, const std::string& value) {
  T v{};
  if (!parse_number(trim(value), v)) throw ConfigError(key, "not a valid number: '" + value + "'");
  return v;
}

inline std::vector<std::string> config_list(const std::string& value) {
  std::vector<std::string> out;
  for (auto part : split(value, ',')) {
    part = trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

/// "a:b" or "a:b:step", inclusive; or a comma-separated list.
inline std::vector<std::size_t> parse_k_sweep(const std::string& key, const std::string& value) {
  std::vector<std::size_t> ks;
  if (value.find(':') != std::string::npos) {
    auto parts = split(value, ':');
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError(key, "expected first:last[:step]");
    auto a = config_number<std::size_t>(key, std::string(parts[0]));
    auto b = config_number<std::size_t>(key, std::string(parts[1]));
    auto step = parts.size() == 3 ? config_number<std::size_t>(key, std::string(parts[2])) : 1;
    if (step == 0 || a > b) throw ConfigError(key, "empty sweep");
    for (auto k = a; k <= b; k += step) ks.push_back(k);
  } else {
    for (const auto& s : config_list(value)) ks.push_back(config_number<std::size_t>(key, s));
    if (!std::is_sorted(ks.begin(), ks.end())) throw ConfigError(key, "k values must be ascending");
  }
  if (ks.empty()) throw ConfigError(key, "empty sweep");
  return ks;
}

}  // namespace detail

/// Builds a validated config from parsed keys. Relative input paths are
/// taken relative to `base_dir`.
inline PipelineConfig make_config(const std::map<std::string, std::string>& kv,
                                  const std::filesystem::path& base_dir = {}, bool check_inputs = true) {
  using detail::config_list;
  using detail::config_number;
  PipelineConfig c;
  std::optional<Timestamp> start, end;
  auto path_of = [&](const std::string& p) {
    std::filesystem::path x(p);
    return (x.is_relative() && !base_dir.empty() ? base_dir / x : x).string();
  };
  auto asn_set = [&](const std::string& key, const std::string& v) {
    std::set<Asn> s;
    for (const auto& x : config_list(v)) s.insert(config_number<Asn>(key, x));
    return s;
  };
  for (const auto& [key, v] : kv) {
    if (key == "input.snapshots") {
      for (const auto& p : config_list(v)) c.snapshots.push_back(path_of(p));
    } else if (key == "input.updates") {
      for (const auto& p : config_list(v)) c.updates.push_back(path_of(p));
    } else if (key == "input.relationships") {
      c.relationships = v.empty() ? "" : path_of(v);
    } else if (key == "categories.tier1") {
      c.tier1 = asn_set(key, v);
    } else if (key == "categories.hypergiants") {
      c.hypergiants = asn_set(key, v);
    } else if (key == "sampling.start") {
      start = config_number<Timestamp>(key, v);
    } else if (key == "sampling.end") {
      end = config_number<Timestamp>(key, v);
    } else if (key == "sampling.periods") {
      c.periods = config_number<std::size_t>(key, v);
      if (c.periods == 0) throw ConfigError(key, "must be at least 1");
    } else if (key == "sampling.per_period") {
      c.per_period = config_number<std::size_t>(key, v);
      if (c.per_period == 0) throw ConfigError(key, "must be at least 1");
    } else if (key == "sampling.redraw_cap") {
      c.redraw_cap = config_number<std::size_t>(key, v);
    } else if (key == "sampling.mode") {
      if (v != "balanced" && v != "random") throw ConfigError(key, "expected balanced or random");
      c.sampling_mode = v;
    } else if (key == "features.disabled") {
      for (const auto& x : config_list(v)) {
        auto i = config_number<std::size_t>(key, x);
        if (i >= kNodeFeatures + kPairFeatures) throw ConfigError(key, "feature index out of range 0..8");
        c.disabled.set(i);
      }
    } else if (key == "selection.alpha") {
      c.alpha = config_number<double>(key, v);
      if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError(key, "must be in (0, 1]");
    } else if (key == "selection.budget") {
      c.budget = config_number<double>(key, v);
      if (!(c.budget > 0.0)) throw ConfigError(key, "must be positive");
    } else if (key == "benchmark.targets") {
      c.targets.clear();
      for (const auto& x : config_list(v)) {
        double t = config_number<double>(key, x);
        if (!(t > 0.0 && t <= 1.0)) throw ConfigError(key, "targets must be in (0, 1]");
        c.targets.push_back(t);
      }
    } else if (key == "run.seed") {
      c.seed = config_number<std::uint64_t>(key, v);
    } else if (key == "run.output") {
      c.output = v;
    } else if (key == "run.tag") {
      if (v.empty() || v.find('/') != std::string::npos) throw ConfigError(key, "must be a plain name");
      c.tag = v;
    } else if (key == "run.jobs") {
      c.jobs = config_number<unsigned>(key, v);
      if (c.jobs == 0) throw ConfigError(key, "must be at least 1");
    } else if (key == "simulate.n") {
      c.simulate.n = config_number<std::size_t>(key, v);
      if (c.simulate.n < 10) throw ConfigError(key, "need at least 10 ASes");
    } else if (key == "simulate.avg_degree") {
      c.simulate.avg_degree = config_number<double>(key, v);
    } else if (key == "simulate.exponent") {
      c.simulate.exponent = config_number<double>(key, v);
      if (!(c.simulate.exponent > 2.0)) throw ConfigError(key, "must exceed 2");
    } else if (key == "simulate.k_sweep") {
      c.simulate.ks = detail::parse_k_sweep(key, v);
    } else if (key == "simulate.strategies") {
      c.simulate.strategies.clear();
      for (const auto& s : config_list(v)) {
        try {
          c.simulate.strategies.push_back(parse_deploy_strategy(s));
        } catch (const Error& e) {
          throw ConfigError(key, e.what());
        }
      }
      if (c.simulate.strategies.empty()) throw ConfigError(key, "no strategies");
    } else if (key == "simulate.seeds") {
      c.simulate.seeds = config_number<std::size_t>(key, v);
      if (c.simulate.seeds == 0) throw ConfigError(key, "must be at least 1");
    } else if (key == "simulate.archive_vps") {
      c.simulate.archive_vps = config_number<std::size_t>(key, v);
    } else if (key == "simulate.churn_changes") {
      c.simulate.churn_changes = config_number<std::size_t>(key, v);
    } else if (key == "simulate.churn_duration") {
      c.simulate.churn_duration = config_number<Timestamp>(key, v);
      if (c.simulate.churn_duration < 3600) throw ConfigError(key, "must be at least 3600 seconds");
    } else {
      throw ConfigError(key, "unknown setting");
    }
  }
  if (start.has_value() != end.has_value()) {
    throw ConfigError(start ? "sampling.end" : "sampling.start", "start and end must be given together");
  }
  if (start) {
    if (*end <= *start) throw ConfigError("sampling.end", "must be after sampling.start");
    c.timeframe = Timeframe{*start, *end};
  }
  for (const auto& [key, v] : kv) c.source += key + "=" + v + "\n";
  if (c.sampling_mode == "balanced" && c.per_period != kCategoryPairs) {
    throw ConfigError("sampling.per_period", "balanced sampling uses exactly 15 events per period");
  }
  if (c.simulate.ks.back() > c.simulate.n) throw ConfigError("simulate.k_sweep", "k exceeds simulate.n");
  if (c.simulate.archive_vps > c.simulate.n) throw ConfigError("simulate.archive_vps", "more VPs than ASes");
  if (check_inputs) {
    auto must_exist = [](const std::string& key, const std::string& p) {
      if (!std::filesystem::exists(p)) throw ConfigError(key, "file not found: " + p);
    };
    for (const auto& p : c.snapshots) must_exist("input.snapshots", p);
    for (const auto& p : c.updates) must_exist("input.updates", p);
    if (!c.relationships.empty()) must_exist("input.relationships", c.relationships);
  }
  return c;
}

inline PipelineConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides = {},
                                  bool check_inputs = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto kv = parse_config_text(ss.str(), path);
  for (const auto& [k, v] : overrides) kv[k] = v;
  return make_config(kv, std::filesystem::path(path).parent_path(), check_inputs);
}

// ---------------------------------------------------------------------------
// Artifacts

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string file_sha256(const std::filesystem::path& p) { return sha256_hex(read_file(p)); }

/// Writes through a temporary sibling and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    fill(out);
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::filesystem::path output_root(const PipelineConfig& cfg) {
  if (cfg.output.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) return std::filesystem::path(root) / cfg.output;
  }
  return cfg.output;
}

inline std::filesystem::path stage_dir(const PipelineConfig& cfg) { return output_root(cfg) / cfg.tag; }

struct Archive {
  std::map<std::string, RibTable> snapshots;
  std::vector<BgpUpdate> updates;  // sorted, files merged in config order

  std::vector<std::string> vp_ids() const {
    std::set<std::string> s;
    for (const auto& [vp, _] : snapshots) s.insert(vp);
    for (const auto& u : updates) s.insert(u.vp_id);
    return {s.begin(), s.end()};
  }
};

inline Archive load_archive(const PipelineConfig& cfg) {
  if (cfg.updates.empty() && cfg.snapshots.empty()) throw ConfigError("input.updates", "no archive files configured");
  Archive a;
  for (const auto& p : cfg.snapshots) {
    for (auto& rib : read_rib_snapshots(p)) {
      auto vp = rib.vp_id;
      if (!a.snapshots.emplace(vp, std::move(rib)).second) throw Error(p + ": second snapshot for VP " + vp);
    }
  }
  for (const auto& p : cfg.updates) {
    auto part = read_updates(p);
    a.updates.insert(a.updates.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  sort_stream(a.updates);
  return a;
}

/// Timeframe from the config, or the span of the archive's updates.
inline Timeframe effective_timeframe(const PipelineConfig& cfg, const Archive& a) {
  if (cfg.timeframe) return *cfg.timeframe;
  if (a.updates.empty()) throw ConfigError("sampling.start", "no timeframe configured and the archive has no updates");
  return {a.updates.front().timestamp, a.updates.back().timestamp + 1};
}

inline AsClassifier make_classifier(const PipelineConfig& cfg) {
  AsRelationships rel;
  if (!cfg.relationships.empty()) rel = read_as_relationships(cfg.relationships);
  return AsClassifier(std::move(rel), cfg.tier1, cfg.hypergiants);
}

/// Records one stage in <stage dir>/manifest.json.
inline void record_manifest(const PipelineConfig& cfg, const std::string& stage,
                            const std::vector<std::filesystem::path>& inputs,
                            const std::vector<std::filesystem::path>& outputs) {
  const auto dir = stage_dir(cfg);
  const auto path = dir / "manifest.json";
  nlohmann::json m = nlohmann::json::object();
  if (std::filesystem::exists(path)) m = nlohmann::json::parse(read_file(path));
  nlohmann::json entry;
  entry["version"] = kVersion;
  entry["seed"] = cfg.seed;
  entry["config_sha256"] = sha256_hex(cfg.source);
  entry["inputs"] = nlohmann::json::object();
  for (const auto& p : inputs) entry["inputs"][p.string()] = file_sha256(p);
  entry["outputs"] = nlohmann::json::object();
  for (const auto& p : outputs) entry["outputs"][p.filename().string()] = file_sha256(p);
  m[stage] = entry;
  write_atomic(path, [&](std::ostream& os) { os << m.dump(2) << '\n'; });
}

inline std::vector<std::filesystem::path> archive_inputs(const PipelineConfig& cfg) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : cfg.snapshots) out.emplace_back(p);
  for (const auto& p : cfg.updates) out.emplace_back(p);
  if (!cfg.relationships.empty()) out.emplace_back(cfg.relationships);
  return out;
}

inline std::filesystem::path require(const PipelineConfig& cfg, const std::string& file, const std::string& stage) {
  auto p = stage_dir(cfg) / file;
  if (!std::filesystem::exists(p)) throw CheckpointError(stage, "missing checkpoint " + p.string());
  return p;
}

// ---------------------------------------------------------------------------
// Stages

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"ingest-check", "detect-events", "sample-events", "features",
                                                 "score",        "select",        "benchmark",     "simulate"};
  return names;
}

/// Per-VP snapshot and update counts; also replays the whole archive so that
/// inconsistent streams fail here rather than in later stages.
inline void stage_ingest_check(const PipelineConfig& cfg) {
  auto a = load_archive(cfg);
  StreamReplayer replay(a.snapshots);
  struct Count {
    std::size_t routes = 0, announces = 0, withdraws = 0;
    std::optional<Timestamp> snapshot_time;
  };
  std::map<std::string, Count> counts;
  for (const auto& [vp, rib] : a.snapshots) {
    counts[vp].routes = rib.routes.size();
    counts[vp].snapshot_time = rib.as_of;
  }
  for (const auto& u : a.updates) {
    (u.is_announce() ? counts[u.vp_id].announces : counts[u.vp_id].withdraws) += 1;
    replay.apply(u);
  }
  const auto out = stage_dir(cfg) / "ingest_summary.csv";
  write_atomic(out, [&](std::ostream& os) {
    os << "vp_id,snapshot_time,snapshot_routes,announcements,withdrawals\n";
    for (const auto& [vp, c] : counts) {
      os << vp << ',' << (c.snapshot_time ? std::to_string(*c.snapshot_time) : "") << ',' << c.routes << ','
         << c.announces << ',' << c.withdraws << '\n';
    }
  });
  spdlog::info("ingest-check: {} VPs, {} updates", counts.size(), a.updates.size());
  record_manifest(cfg, "ingest-check", archive_inputs(cfg), {out});
}

inline void stage_detect_events(const PipelineConfig& cfg) {
  auto summary = require(cfg, "ingest_summary.csv", "ingest-check");
  auto a = load_archive(cfg);
  auto candidates = detect_candidates(a.updates, a.snapshots, a.vp_ids().size());
  assign_categories(candidates, make_classifier(cfg));
  const auto out = stage_dir(cfg) / "candidates.txt";
  write_atomic(out, [&](std::ostream& os) { write_candidates(os, candidates); });
  spdlog::info("detect-events: {} candidate events", candidates.size());
  auto inputs = archive_inputs(cfg);
  inputs.push_back(summary);
  record_manifest(cfg, "detect-events", inputs, {out});
}

inline void stage_sample_events(const PipelineConfig& cfg) {
  auto in = require(cfg, "candidates.txt", "detect-events");
  auto candidates = read_candidates(in.string());
  Timeframe tf;
  if (cfg.timeframe) {
    tf = *cfg.timeframe;
  } else {
    if (candidates.empty()) throw Error("sample-events: no candidate events to sample from");
    Timestamp lo = candidates.front().first_seen, hi = lo;
    for (const auto& c : candidates) {
      lo = std::min(lo, c.first_seen);
      hi = std::max(hi, c.first_seen);
    }
    tf = {lo, std::max(hi + 1, lo + kEventWindow)};
  }
  SamplingOptions opt{cfg.periods, cfg.per_period, cfg.redraw_cap, cfg.seed};
  auto set = cfg.sampling_mode == "balanced" ? balanced_sample(candidates, tf, opt) : random_sample(candidates, tf, opt);
  const auto out = stage_dir(cfg) / "events.txt";
  write_atomic(out, [&](std::ostream& os) { write_event_set(os, set); });
  spdlog::info("sample-events: {} events in {} periods (fill rate {:.3f})", set.size(), set.period_count(),
               set.fill_rate());
  record_manifest(cfg, "sample-events", {in}, {out});
}

inline void stage_features(const PipelineConfig& cfg) {
  auto in = require(cfg, "events.txt", "sample-events");
  auto set = read_event_set(in.string());
  auto a = load_archive(cfg);
  auto table = compute_feature_table(set, a.updates, a.snapshots, a.vp_ids(), cfg.jobs);
  const auto out = stage_dir(cfg) / "features.csv";
  write_atomic(out, [&](std::ostream& os) { write_feature_table(os, table); });
  spdlog::info("features: {} vectors", table.size());
  auto inputs = archive_inputs(cfg);
  inputs.push_back(in);
  record_manifest(cfg, "features", inputs, {out});
}

inline void stage_score(const PipelineConfig& cfg) {
  auto in = require(cfg, "features.csv", "features");
  auto r = score_feature_table(read_feature_table(in.string()), cfg.per_period, cfg.disabled);
  const auto out = stage_dir(cfg) / "scores.csv";
  write_atomic(out, [&](std::ostream& os) { write_scores_csv(os, r); });
  spdlog::info("score: {} VPs", r.size());
  record_manifest(cfg, "score", {in}, {out});
}

/// Score sets of every tag under the output root that has scores and volumes.
inline std::map<std::string, ScoreSet> load_score_store(const PipelineConfig& cfg) {
  std::map<std::string, ScoreSet> store;
  const auto root = output_root(cfg);
  if (!std::filesystem::exists(root)) return store;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    const auto scores = entry.path() / "scores.csv";
    const auto volumes = entry.path() / "volumes.csv";
    if (!entry.is_directory() || !std::filesystem::exists(scores) || !std::filesystem::exists(volumes)) continue;
    store.emplace(entry.path().filename().string(),
                  ScoreSet{read_scores_csv(scores.string()), read_volumes_csv(volumes.string()), scores.string()});
  }
  return store;
}

inline void stage_select(const PipelineConfig& cfg) {
  auto scores_path = require(cfg, "scores.csv", "score");
  auto scores = read_scores_csv(scores_path.string());
  auto a = load_archive(cfg);
  auto windows = daily_volume_windows(effective_timeframe(cfg, a), cfg.seed);
  auto volumes = estimate_volumes(a.updates, scores.vp_ids, windows);
  const auto dir = stage_dir(cfg);
  write_atomic(dir / "volumes.csv", [&](std::ostream& os) { write_volumes_csv(os, volumes); });
  auto report = emit_selection(load_score_store(cfg), cfg.tag, cfg.budget, cfg.alpha);
  write_atomic(dir / "selection.csv", [&](std::ostream& os) { write_selection_csv(os, report.result); });
  spdlog::info("select: {} of {} VPs within budget {}", report.result.size(), scores.size(), cfg.budget);
  auto inputs = archive_inputs(cfg);
  inputs.push_back(scores_path);
  record_manifest(cfg, "select", inputs, {dir / "volumes.csv", dir / "selection.csv"});
}

/// The AS a VP peers from: the most common first hop of its snapshot routes,
/// else of its announcements.
inline std::map<std::string, Asn> infer_vp_asns(const Archive& a) {
  std::map<std::string, std::map<Asn, std::size_t>> votes;
  for (const auto& [vp, rib] : a.snapshots) {
    for (const auto& [_, r] : rib.routes) {
      if (!r.as_path.empty()) ++votes[vp][r.as_path.front()];
    }
  }
  for (const auto& u : a.updates) {
    if (u.is_announce() && !u.as_path.empty() && !a.snapshots.contains(u.vp_id)) ++votes[u.vp_id][u.as_path.front()];
  }
  std::map<std::string, Asn> out;
  for (const auto& [vp, v] : votes) {
    out[vp] = std::max_element(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.second < y.second; })
                  ->first;
  }
  return out;
}

inline void stage_benchmark(const PipelineConfig& cfg) {
  auto scores_path = require(cfg, "scores.csv", "score");
  auto volumes_path = require(cfg, "volumes.csv", "select");
  auto scores = read_scores_csv(scores_path.string());
  auto volumes = read_volumes_csv(volumes_path.string());
  auto a = load_archive(cfg);
  const auto& vps = scores.vp_ids;

  std::map<std::string, std::size_t> counts;
  for (const auto& vp : vps) counts[vp] = 0;
  for (const auto& u : a.updates) {
    if (auto it = counts.find(u.vp_id); it != counts.end()) ++it->second;
  }
  auto detected = detectors(a.updates, a.snapshots, {vps.begin(), vps.end()});

  BaselineContext ctx;
  ctx.vp_asn = infer_vp_asns(a);
  auto classifier = make_classifier(cfg);
  for (const auto& vp : vps) {
    if (!ctx.vp_asn.contains(vp)) throw Error("benchmark: cannot tell which AS hosts VP " + vp);
    ctx.vp_category[vp] = classifier.classify(ctx.vp_asn.at(vp));
  }
  for (const auto& [vp, rib] : a.snapshots) {
    for (const auto& [_, r] : rib.routes) detail::add_route(ctx.union_graph, r.as_path, 1);
  }

  std::map<std::string, std::vector<std::string>> orders;
  orders["selected"] = greedy_select(scores, volumes, cfg.alpha, std::numeric_limits<double>::infinity()).vp_ids;
  orders["random"] = naive_order(NaiveStrategy::random, vps, ctx, cfg.seed);
  orders["as_distance"] = naive_order(NaiveStrategy::as_distance, vps, ctx, cfg.seed);
  orders["unbiased"] = naive_order(NaiveStrategy::unbiased, vps, ctx, cfg.seed);

  std::vector<BenchmarkRow> rows;
  for (auto use : {UseCase::transient_paths, UseCase::moas, UseCase::topology_links, UseCase::unnecessary_updates}) {
    const auto& events = detected.get(use);
    auto specific = greedy_specific_usecase(events, counts).vp_ids;
    for (double target : cfg.targets) {
      const auto mvp = prefix_cost(events, orders["selected"], counts, target);
      auto row_for = [&](const std::string& name, const std::vector<std::string>& order) {
        BenchmarkRow r{use, target, name, std::nullopt, std::nullopt};
        auto cost = prefix_cost(events, order, counts, target);
        r.updates_processed = cost.updates;
        if (cost.updates && mvp.updates) {
          r.reduction_factor = reduction_factor(events, target, order, orders["selected"], counts);
        }
        rows.push_back(r);
      };
      for (const auto& name : {"random", "as_distance", "unbiased"}) row_for(name, orders[name]);
      row_for("greedy_specific", specific);
      row_for("selected", orders["selected"]);
    }
  }
  const auto out = stage_dir(cfg) / "benchmark.csv";
  write_atomic(out, [&](std::ostream& os) { write_benchmark_csv(os, rows); });
  spdlog::info("benchmark: {} rows", rows.size());
  auto inputs = archive_inputs(cfg);
  inputs.push_back(scores_path);
  inputs.push_back(volumes_path);
  record_manifest(cfg, "benchmark", inputs, {out});
}

/// Coverage sweep over `seeds` topologies (seed, seed+1, ...), one
/// relationship file per topology, and optionally a churn archive with a
/// ready-to-run pipeline config for the first topology.
inline void stage_simulate(const PipelineConfig& cfg) {
  const auto& s = cfg.simulate;
  const auto dir = stage_dir(cfg);
  std::vector<CoverageRow> rows;
  std::vector<std::filesystem::path> outputs;
  for (std::size_t i = 0; i < s.seeds; ++i) {
    const std::uint64_t seed = cfg.seed + i;
    auto topo = generate_topology(s.n, s.avg_degree, s.exponent, seed);
    auto obs = observe(topo, propagate_routes(topo));
    auto part = coverage_sweep(topo, obs, s.strategies, s.ks, seed);
    rows.insert(rows.end(), part.begin(), part.end());
    const auto rel = dir / "topologies" / ("seed_" + std::to_string(seed) + ".rel");
    write_atomic(rel, [&](std::ostream& os) { write_topology(os, topo); });
    outputs.push_back(rel);
    spdlog::info("simulate: seed {} done ({} links, mean degree {:.2f})", seed, topo.edges.size(),
                 topo.mean_degree());
  }
  write_atomic(dir / "coverage.csv", [&](std::ostream& os) { write_coverage_csv(os, rows); });
  outputs.push_back(dir / "coverage.csv");

  if (s.archive_vps > 0) {
    auto topo = generate_topology(s.n, s.avg_degree, s.exponent, cfg.seed);
    auto rng = rng_stream(cfg.seed, "simulate/vps");
    std::vector<Asn> all(topo.n);
    std::iota(all.begin(), all.end(), Asn{1});
    std::shuffle(all.begin(), all.end(), rng);
    ChurnOptions opt;
    opt.vps.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(s.archive_vps));
    std::sort(opt.vps.begin(), opt.vps.end());
    opt.changes = s.churn_changes;
    opt.duration = s.churn_duration;
    opt.seed = cfg.seed;
    auto archive = simulate_churn(topo, opt);
    const auto adir = dir / "archive";
    write_atomic(adir / "snapshots.txt", [&](std::ostream& os) {
      for (const auto& [_, rib] : archive.snapshots) write_rib_snapshot(os, rib);
    });
    write_atomic(adir / "updates.txt", [&](std::ostream& os) { write_updates(os, archive.updates); });
    write_atomic(adir / "relationships.txt", [&](std::ostream& os) { write_topology(os, topo); });
    write_atomic(adir / "pipeline.conf", [&](std::ostream& os) {
      os << "[input]\nsnapshots = snapshots.txt\nupdates = updates.txt\nrelationships = relationships.txt\n\n"
         << "[categories]\ntier1 = ";
      auto t1 = topo.tier1();
      for (auto it = t1.begin(); it != t1.end(); ++it) os << (it == t1.begin() ? "" : ",") << *it;
      os << "\n\n[sampling]\nperiods = 20\n\n[run]\nseed = " << cfg.seed << "\ntag = simulated\n";
    });
    for (const auto* f : {"snapshots.txt", "updates.txt", "relationships.txt", "pipeline.conf"}) {
      outputs.push_back(adir / f);
    }
    spdlog::info("simulate: churn archive with {} VPs and {} updates", opt.vps.size(), archive.updates.size());
  }
  record_manifest(cfg, "simulate", {}, outputs);
}

inline void run_stage(const std::string& stage, const PipelineConfig& cfg) {
  if (stage == "ingest-check") return stage_ingest_check(cfg);
  if (stage == "detect-events") return stage_detect_events(cfg);
  if (stage == "sample-events") return stage_sample_events(cfg);
  if (stage == "features") return stage_features(cfg);
  if (stage == "score") return stage_score(cfg);
  if (stage == "select") return stage_select(cfg);
  if (stage == "benchmark") return stage_benchmark(cfg);
  if (stage == "simulate") return stage_simulate(cfg);
  throw ConfigError("stage", "unknown stage '" + stage + "'");
}

}  // namespace vpred
