#pragma once

// Greedy, volume-budgeted VP selection over a redundancy matrix.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vpred/ingest.hpp"
#include "vpred/redundancy.hpp"

namespace vpred {

inline constexpr double kDefaultAlpha = 0.25;
inline constexpr Timestamp kVolumeWindow = 3600;

/// Mean updates per sampled hour for each VP.
struct VolumeProfile {
  std::map<std::string, double> per_vp;
  std::size_t sample_count = 1;

  double at(const std::string& vp) const {
    auto it = per_vp.find(vp);
    if (it == per_vp.end()) throw Error("no volume estimate for VP " + vp);
    return it->second;
  }
};

/// One random hour in each day of the timeframe (partial days too short for
/// an hour are skipped).
inline std::vector<Timeframe> daily_volume_windows(const Timeframe& tf, std::uint64_t seed) {
  auto rng = rng_stream(seed, "volume-windows");
  std::vector<Timeframe> out;
  for (Timestamp day = tf.start; day < tf.end; day += 86400) {
    const Timestamp last_start = std::min(day + 86400, tf.end) - kVolumeWindow;
    if (last_start < day) continue;
    std::uniform_int_distribution<Timestamp> pick(day, last_start);
    Timestamp s = pick(rng);
    out.push_back({s, s + kVolumeWindow});
  }
  return out;
}

/// Mean number of `vp_id` updates per window.
inline double estimate_volume(std::span<const BgpUpdate> archive, const std::string& vp_id,
                              std::span<const Timeframe> windows) {
  if (windows.empty()) throw Error("estimate_volume: no sample windows");
  std::size_t count = 0;
  for (const auto& u : archive) {
    if (u.vp_id != vp_id) continue;
    for (const auto& w : windows) {
      if (u.timestamp >= w.start && u.timestamp < w.end) ++count;
    }
  }
  return static_cast<double>(count) / static_cast<double>(windows.size());
}

inline VolumeProfile estimate_volumes(std::span<const BgpUpdate> archive,
                                      std::span<const std::string> vp_ids,
                                      std::span<const Timeframe> windows) {
  if (windows.empty()) throw Error("estimate_volume: no sample windows");
  std::map<std::string, std::size_t> counts;
  for (const auto& vp : vp_ids) counts[vp] = 0;
  for (const auto& u : archive) {
    auto it = counts.find(u.vp_id);
    if (it == counts.end()) continue;
    for (const auto& w : windows) {
      if (u.timestamp >= w.start && u.timestamp < w.end) ++it->second;
    }
  }
  VolumeProfile p;
  p.sample_count = windows.size();
  for (const auto& [vp, c] : counts) p.per_vp[vp] = static_cast<double>(c) / static_cast<double>(windows.size());
  return p;
}

struct SelectionResult {
  std::vector<std::string> vp_ids;  // pick order
  std::vector<double> max_redundancy_at_pick;
  std::vector<double> volume;
  std::vector<double> cumulative_volume;
  double alpha = kDefaultAlpha;
  double budget = 0.0;

  std::size_t size() const { return vp_ids.size(); }
};

/// Size of the low-redundancy candidate set: ceil(alpha * remaining), at least 1.
inline std::size_t candidate_set_size(double alpha, std::size_t remaining) {
  if (remaining == 0) return 0;
  auto k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(remaining) - 1e-9));
  return std::clamp<std::size_t>(k, 1, remaining);
}

/// Seeds with the VP closest on average to all others, then repeatedly takes
/// the ceil(alpha * |unselected|) VPs with the lowest maximum redundancy to
/// the selection and adds the one with the smallest volume. Stops before the
/// first pick that would exceed `budget`. Ties go to the smaller vp_id.
inline SelectionResult greedy_select(const RedundancyMatrix& r, const VolumeProfile& volumes,
                                     double alpha, double budget) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("greedy_select: alpha must be in (0, 1]");
  if (!(budget > 0.0)) throw Error("greedy_select: budget must be positive");
  const std::size_t n = r.size();
  if (n == 0) throw Error("greedy_select: no VPs");
  if (volumes.per_vp.size() != n) throw Error("greedy_select: volume profile and scores cover different VPs");
  std::vector<double> vol(n);
  for (std::size_t i = 0; i < n; ++i) vol[i] = volumes.at(r.vp_ids[i]);

  std::size_t seed = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += i == j ? 0.0 : r.raw_mean_distances(i, j);
    if (sum < best) {
      best = sum;
      seed = i;
    }
  }

  SelectionResult out;
  out.alpha = alpha;
  out.budget = budget;
  if (vol[seed] > budget) {
    throw Error("greedy_select: budget is smaller than the volume of the first VP (" + r.vp_ids[seed] + ")");
  }
  std::vector<bool> taken(n, false);
  std::vector<double> max_red(n, -std::numeric_limits<double>::infinity());
  double cumulative = 0.0;
  auto take = [&](std::size_t i, double red) {
    taken[i] = true;
    cumulative += vol[i];
    out.vp_ids.push_back(r.vp_ids[i]);
    out.max_redundancy_at_pick.push_back(red);
    out.volume.push_back(vol[i]);
    out.cumulative_volume.push_back(cumulative);
    for (std::size_t j = 0; j < n; ++j) max_red[j] = std::max(max_red[j], r.scores(j, i));
  };
  take(seed, 0.0);

  while (out.size() < n) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i]) rest.push_back(i);
    }
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) { return max_red[a] < max_red[b]; });
    rest.resize(candidate_set_size(alpha, rest.size()));
    std::size_t pick = *std::min_element(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
      return vol[a] < vol[b] || (vol[a] == vol[b] && a < b);
    });
    if (cumulative + vol[pick] > budget) break;
    take(pick, max_red[pick]);
  }
  return out;
}

/// Precomputed scores and volumes under one tag (a year).
struct ScoreSet {
  RedundancyMatrix scores;
  VolumeProfile volumes;
  std::string scores_csv;  // where the full score table lives
};

struct SelectionReport {
  std::string tag;
  SelectionResult result;
  std::string scores_csv;
};

inline SelectionReport emit_selection(const std::map<std::string, ScoreSet>& store, const std::string& tag,
                                      double budget, double alpha = kDefaultAlpha) {
  auto it = store.find(tag);
  if (it == store.end()) {
    std::string known;
    for (const auto& [t, _] : store) known += (known.empty() ? "" : ", ") + t;
    throw Error("unknown tag '" + tag + "'; available: " + (known.empty() ? "none" : known));
  }
  return {tag, greedy_select(it->second.scores, it->second.volumes, alpha, budget), it->second.scores_csv};
}

/// `rank,vp_id,max_redundancy_at_pick,volume,cumulative_volume`; the first
/// pick has no prior selection and reports 0.
inline void write_selection_csv(std::ostream& os, const SelectionResult& s) {
  os << "rank,vp_id,max_redundancy_at_pick,volume,cumulative_volume\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << i + 1 << ',' << s.vp_ids[i] << ',' << detail::format_double(s.max_redundancy_at_pick[i]) << ','
       << detail::format_double(s.volume[i]) << ',' << detail::format_double(s.cumulative_volume[i]) << '\n';
  }
}

inline void write_volumes_csv(std::ostream& os, const VolumeProfile& v) {
  os << "vp_id,updates_per_hour,sample_count\n";
  for (const auto& [vp, x] : v.per_vp) os << vp << ',' << detail::format_double(x) << ',' << v.sample_count << '\n';
}

inline VolumeProfile read_volumes_csv(const std::string& path) {
  VolumeProfile v;
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    line = detail::trim(line);
    if (line.empty() || no == 1) return;
    auto f = detail::split(line, ',');
    double x = 0;
    if (f.size() != 3 || !detail::parse_number(f[1], x) || !detail::parse_number(f[2], v.sample_count) || x < 0) {
      throw Error(path + ": " + ParseError(no, "record", "expected vp_id,updates_per_hour,sample_count").what());
    }
    v.per_vp[std::string(f[0])] = x;
  });
  return v;
}

}  // namespace vpred
