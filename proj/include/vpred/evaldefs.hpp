#pragma once

// Evaluation harness: update-level redundancy definitions, use-case event
// detectors, greedy-specific and naive baseline selectors, and the data
// reduction factor.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vpred/events.hpp"
#include "vpred/graph.hpp"
#include "vpred/ingest.hpp"

namespace vpred {

inline constexpr Timestamp kConvergenceWindow = 300;

/// Level 1: same prefix within the window. Level 2: additionally the AS
/// links the update adds are a subset of those the other update adds.
/// Level 3: additionally the same subset relation for added communities.
struct RedundancyDefinition {
  int level = 1;
  Timestamp window = kConvergenceWindow;
};

/// What one update changed relative to its VP's route just before it.
struct UpdateDelta {
  std::string vp_id;
  Timestamp t = 0;
  std::string prefix;
  std::vector<Link> added_links;         // sorted
  std::vector<std::string> added_comms;  // sorted
};

namespace detail {

inline std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

template <class T>
std::vector<T> set_minus(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace detail

/// Delta of `u` against `prior`, the RIB of u's VP immediately before u.
inline UpdateDelta update_delta(const BgpUpdate& u, const RibTable& prior) {
  if (prior.vp_id != u.vp_id) throw Error("redundancy check: no prior state for VP " + u.vp_id);
  UpdateDelta d{u.vp_id, u.timestamp, u.prefix, {}, {}};
  std::vector<Link> before_links;
  std::vector<std::string> before_comms;
  if (auto it = prior.routes.find(u.prefix); it != prior.routes.end()) {
    before_links = path_links(it->second.as_path);
    before_comms = detail::sorted_unique(it->second.communities);
  }
  if (u.is_announce()) {
    d.added_links = detail::set_minus(path_links(u.as_path), before_links);
    d.added_comms = detail::set_minus(detail::sorted_unique(u.communities), before_comms);
  }
  return d;
}

inline bool is_redundant(const RedundancyDefinition& def, const UpdateDelta& u1, const UpdateDelta& u2) {
  const Timestamp dt = u1.t > u2.t ? u1.t - u2.t : u2.t - u1.t;
  if (dt >= def.window || u1.prefix != u2.prefix) return false;
  if (def.level >= 2 &&
      !std::includes(u2.added_links.begin(), u2.added_links.end(), u1.added_links.begin(), u1.added_links.end())) {
    return false;
  }
  if (def.level >= 3 &&
      !std::includes(u2.added_comms.begin(), u2.added_comms.end(), u1.added_comms.begin(), u1.added_comms.end())) {
    return false;
  }
  return true;
}

/// Whether u1 (seen by VP1 with prior RIB state1) is redundant with u2.
inline bool is_redundant(const RedundancyDefinition& def, const BgpUpdate& u1, const BgpUpdate& u2,
                         const RibTable& state1, const RibTable& state2) {
  return is_redundant(def, update_delta(u1, state1), update_delta(u2, state2));
}

/// Deltas of every update of each VP, replayed from the given snapshots.
inline std::map<std::string, std::vector<UpdateDelta>> observe_streams(
    std::span<const BgpUpdate> updates, const std::map<std::string, RibTable>& snapshots) {
  StreamReplayer replay(snapshots);
  std::map<std::string, std::vector<UpdateDelta>> out;
  for (const auto& [vp, _] : snapshots) out[vp];
  for (const auto& u : updates) {
    if (replay.applies(u)) out[u.vp_id].push_back(update_delta(u, replay.state(u.vp_id).rib()));
    replay.apply(u);
  }
  return out;
}

/// Deltas grouped by prefix and sorted by time, for window lookups.
class DeltaIndex {
 public:
  DeltaIndex() = default;
  explicit DeltaIndex(std::span<const UpdateDelta> deltas) { add(deltas); }

  void add(std::span<const UpdateDelta> deltas) {
    for (const auto& d : deltas) by_prefix_[d.prefix].push_back(&d);
    for (auto& [_, v] : by_prefix_) {
      std::stable_sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->t < b->t; });
    }
  }

  /// Calls fn on every indexed delta with the same prefix within the window
  /// of `d`; stops early when fn returns true. Returns whether it did.
  template <class Fn>
  bool any_near(const UpdateDelta& d, Timestamp window, Fn fn) const {
    auto it = by_prefix_.find(d.prefix);
    if (it == by_prefix_.end()) return false;
    const auto& v = it->second;
    auto lo = std::lower_bound(v.begin(), v.end(), d.t - window + 1, [](auto* x, Timestamp t) { return x->t < t; });
    for (; lo != v.end() && (*lo)->t < d.t + window; ++lo) {
      if (fn(**lo)) return true;
    }
    return false;
  }

 private:
  std::map<std::string, std::vector<const UpdateDelta*>> by_prefix_;
};

/// Fraction of U1 redundant with at least one update of U2.
inline double vp_pair_redundancy(const RedundancyDefinition& def, std::span<const UpdateDelta> u1,
                                 std::span<const UpdateDelta> u2) {
  if (u1.empty()) throw Error("vp_pair_redundancy: first stream is empty");
  DeltaIndex index(u2);
  std::size_t hits = 0;
  for (const auto& d : u1) {
    if (index.any_near(d, def.window, [&](const UpdateDelta& o) { return is_redundant(def, d, o); })) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(u1.size());
}

/// Greedy selection minimizing the share of redundant updates in the
/// combined stream of the selected VPs; an update counts as redundant when
/// it is redundant with any other update of that stream. Ties go to the
/// smaller vp_id.
inline std::vector<std::string> greedy_specific_def(const RedundancyDefinition& def,
                                                    const std::map<std::string, std::vector<UpdateDelta>>& streams,
                                                    std::size_t k) {
  if (k > streams.size()) throw Error("greedy_specific_def: k exceeds the number of VPs");
  std::vector<std::string> chosen;
  std::vector<const UpdateDelta*> pool;  // deltas of chosen VPs
  std::vector<bool> pool_redundant;
  DeltaIndex pool_index;
  std::size_t redundant_total = 0;
  std::set<std::string> remaining;
  for (const auto& [vp, _] : streams) remaining.insert(vp);

  while (chosen.size() < k) {
    std::string best;
    double best_share = std::numeric_limits<double>::infinity();
    for (const auto& vp : remaining) {
      const auto& mine = streams.at(vp);
      DeltaIndex own(mine);
      std::size_t redundant = redundant_total;
      for (const auto& d : mine) {
        bool hit = own.any_near(d, def.window, [&](const UpdateDelta& o) { return &o != &d && is_redundant(def, d, o); }) ||
                   pool_index.any_near(d, def.window, [&](const UpdateDelta& o) { return is_redundant(def, d, o); });
        if (hit) ++redundant;
      }
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool_redundant[i]) continue;
        if (own.any_near(*pool[i], def.window, [&](const UpdateDelta& o) { return is_redundant(def, *pool[i], o); })) {
          ++redundant;
        }
      }
      const std::size_t total = pool.size() + mine.size();
      const double share = total ? static_cast<double>(redundant) / static_cast<double>(total) : 0.0;
      if (share < best_share) {
        best_share = share;
        best = vp;
      }
    }
    const auto& mine = streams.at(best);
    DeltaIndex own(mine);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!pool_redundant[i] &&
          own.any_near(*pool[i], def.window, [&](const UpdateDelta& o) { return is_redundant(def, *pool[i], o); })) {
        pool_redundant[i] = true;
        ++redundant_total;
      }
    }
    for (const auto& d : mine) {
      bool hit = own.any_near(d, def.window, [&](const UpdateDelta& o) { return &o != &d && is_redundant(def, d, o); }) ||
                 pool_index.any_near(d, def.window, [&](const UpdateDelta& o) { return is_redundant(def, d, o); });
      pool.push_back(&d);
      pool_redundant.push_back(hit);
      if (hit) ++redundant_total;
    }
    pool_index.add(mine);
    chosen.push_back(best);
    remaining.erase(best);
  }
  return chosen;
}

// ---------------------------------------------------------------------------
// Use cases

enum class UseCase { transient_paths, moas, topology_links, unnecessary_updates };

inline std::string to_string(UseCase u) {
  switch (u) {
    case UseCase::transient_paths: return "transient_paths";
    case UseCase::moas: return "moas";
    case UseCase::topology_links: return "topology_links";
    case UseCase::unnecessary_updates: return "unnecessary_updates";
  }
  return "?";
}

/// An event is detected by a VP set when the union of the tokens the VPs
/// contribute reaches `threshold` (1 for most events, 2 distinct origins
/// for MOAS).
struct ObjectiveEvent {
  std::string key;
  std::map<std::string, std::set<std::string>> tokens_by_vp;
  std::size_t threshold = 1;
};

struct UseCaseEvents {
  UseCase use_case = UseCase::topology_links;
  std::vector<ObjectiveEvent> events;
};

struct ObjectiveSpec {
  UseCase use_case = UseCase::topology_links;
  double target_fraction = 0.9;
};

struct DetectorOutput {
  UseCaseEvents transient_paths{UseCase::transient_paths, {}};
  UseCaseEvents moas{UseCase::moas, {}};
  UseCaseEvents topology_links{UseCase::topology_links, {}};
  UseCaseEvents unnecessary_updates{UseCase::unnecessary_updates, {}};

  const UseCaseEvents& get(UseCase u) const {
    switch (u) {
      case UseCase::transient_paths: return transient_paths;
      case UseCase::moas: return moas;
      case UseCase::topology_links: return topology_links;
      case UseCase::unnecessary_updates: return unnecessary_updates;
    }
    throw Error("unknown use case");
  }
};

namespace detail {

inline std::string path_key(const AsPath& p) {
  std::string s;
  for (Asn a : collapse_path(p)) s += (s.empty() ? "" : " ") + std::to_string(a);
  return s;
}

inline std::string comm_key(std::vector<std::string> c) {
  std::string s;
  for (const auto& x : sorted_unique(std::move(c))) s += (s.empty() ? "" : " ") + x;
  return s;
}

inline UseCaseEvents collect(UseCase u, std::map<std::string, ObjectiveEvent>& m) {
  UseCaseEvents out{u, {}};
  for (auto& [k, e] : m) {
    e.key = k;
    out.events.push_back(std::move(e));
  }
  return out;
}

}  // namespace detail

/// Ground-truth events of the four use cases in an archive (snapshots plus
/// sorted updates), restricted to `vps` when non-empty.
///  - transient path: a route replaced by a different path, or withdrawn,
///    less than 300 s after it was installed; keyed by prefix and path.
///  - MOAS: a prefix with at least two distinct origin ASes overall.
///  - unnecessary update: same AS path as the installed route but a
///    different community set; keyed by prefix and community change.
///  - topology link: every distinct undirected AS link.
inline DetectorOutput detectors(std::span<const BgpUpdate> updates,
                                const std::map<std::string, RibTable>& snapshots,
                                const std::set<std::string>& vps = {}) {
  auto wanted = [&](const std::string& vp) { return vps.empty() || vps.contains(vp); };
  std::map<std::string, ObjectiveEvent> transient, moas, links, unnecessary;
  std::map<std::string, std::map<std::string, std::set<std::string>>> origins;  // prefix -> vp -> origins
  std::map<std::pair<std::string, std::string>, std::pair<AsPath, Timestamp>> installed;

  auto see_route = [&](const std::string& vp, const std::string& prefix, const AsPath& path) {
    auto collapsed = collapse_path(path);
    if (!collapsed.empty()) origins[prefix][vp].insert(std::to_string(collapsed.back()));
    for (const auto& l : path_links(path)) {
      auto key = std::to_string(l.a) + "-" + std::to_string(l.b);
      links[key].tokens_by_vp[vp].insert(key);
    }
  };

  for (const auto& [vp, rib] : snapshots) {
    if (!wanted(vp)) continue;
    for (const auto& [prefix, route] : rib.routes) {
      see_route(vp, prefix, route.as_path);
      installed[{vp, prefix}] = {route.as_path, route.last_update_time};
    }
  }
  StreamReplayer replay(snapshots);
  for (const auto& u : updates) {
    if (!wanted(u.vp_id) || !replay.applies(u)) {
      replay.apply(u);
      continue;
    }
    const auto& rib = replay.state(u.vp_id).rib();
    auto prior = rib.routes.find(u.prefix);
    auto slot = installed.find({u.vp_id, u.prefix});
    const bool same_path = u.is_announce() && prior != rib.routes.end() && prior->second.as_path == u.as_path;

    if (slot != installed.end() && !same_path && u.timestamp - slot->second.second < kConvergenceWindow) {
      auto key = u.prefix + "|" + detail::path_key(slot->second.first);
      transient[key].tokens_by_vp[u.vp_id].insert(key);
    }
    if (same_path && detail::comm_key(prior->second.communities) != detail::comm_key(u.communities)) {
      auto key = u.prefix + "|" + detail::comm_key(prior->second.communities) + ">" + detail::comm_key(u.communities);
      unnecessary[key].tokens_by_vp[u.vp_id].insert(key);
    }
    if (u.is_announce()) {
      see_route(u.vp_id, u.prefix, u.as_path);
      if (!same_path) installed[{u.vp_id, u.prefix}] = {u.as_path, u.timestamp};
    } else {
      installed.erase({u.vp_id, u.prefix});
    }
    replay.apply(u);
  }

  for (const auto& [prefix, by_vp] : origins) {
    std::set<std::string> all;
    for (const auto& [_, o] : by_vp) all.insert(o.begin(), o.end());
    if (all.size() < 2) continue;
    auto& e = moas[prefix];
    e.threshold = 2;
    e.tokens_by_vp = by_vp;
  }

  DetectorOutput out;
  out.transient_paths = detail::collect(UseCase::transient_paths, transient);
  out.moas = detail::collect(UseCase::moas, moas);
  out.topology_links = detail::collect(UseCase::topology_links, links);
  out.unnecessary_updates = detail::collect(UseCase::unnecessary_updates, unnecessary);
  return out;
}

/// Tracks which events a growing VP set detects.
class CoverageTracker {
 public:
  explicit CoverageTracker(const UseCaseEvents& events)
      : events_(&events), seen_(events.events.size()), done_(events.events.size(), false) {}

  /// Events newly detected if `vp` were added.
  std::size_t gain(const std::string& vp) const {
    std::size_t g = 0;
    for (std::size_t i = 0; i < seen_.size(); ++i) {
      if (done_[i]) continue;
      const auto& e = events_->events[i];
      auto it = e.tokens_by_vp.find(vp);
      if (it == e.tokens_by_vp.end()) continue;
      std::size_t extra = 0;
      for (const auto& t : it->second) extra += seen_[i].contains(t) ? 0 : 1;
      if (seen_[i].size() + extra >= e.threshold) ++g;
    }
    return g;
  }

  void add(const std::string& vp) {
    for (std::size_t i = 0; i < seen_.size(); ++i) {
      const auto& e = events_->events[i];
      auto it = e.tokens_by_vp.find(vp);
      if (it == e.tokens_by_vp.end()) continue;
      seen_[i].insert(it->second.begin(), it->second.end());
      if (seen_[i].size() >= e.threshold && !done_[i]) {
        done_[i] = true;
        ++detected_;
      }
    }
  }

  std::size_t detected() const noexcept { return detected_; }
  std::size_t total() const noexcept { return seen_.size(); }
  double fraction() const {
    return total() ? static_cast<double>(detected_) / static_cast<double>(total()) : 1.0;
  }

 private:
  const UseCaseEvents* events_;
  std::vector<std::set<std::string>> seen_;
  std::vector<bool> done_;
  std::size_t detected_ = 0;
};

struct UseCaseOrder {
  std::vector<std::string> vp_ids;
  std::vector<double> coverage;  // fraction detected after each pick
  double max_fraction = 0.0;
};

/// Orders every VP by marginal events detected per marginal update volume.
/// A VP with no volume but positive gain ranks first; zero gain ranks last.
/// Ties: larger gain, then smaller volume, then smaller vp_id.
inline UseCaseOrder greedy_specific_usecase(const UseCaseEvents& events,
                                            const std::map<std::string, std::size_t>& update_counts) {
  CoverageTracker tracker(events);
  std::set<std::string> remaining;
  for (const auto& [vp, _] : update_counts) remaining.insert(vp);
  UseCaseOrder out;
  while (!remaining.empty()) {
    std::string best;
    double best_ratio = -1.0;
    std::size_t best_gain = 0, best_volume = 0;
    for (const auto& vp : remaining) {
      const std::size_t g = tracker.gain(vp);
      const std::size_t v = update_counts.at(vp);
      const double ratio = g == 0 ? 0.0
                           : v == 0 ? std::numeric_limits<double>::infinity()
                                    : static_cast<double>(g) / static_cast<double>(v);
      const bool better = best.empty() || ratio > best_ratio ||
                          (ratio == best_ratio && (g > best_gain || (g == best_gain && v < best_volume)));
      if (better) {
        best = vp;
        best_ratio = ratio;
        best_gain = g;
        best_volume = v;
      }
    }
    tracker.add(best);
    out.vp_ids.push_back(best);
    out.coverage.push_back(tracker.fraction());
    remaining.erase(best);
  }
  out.max_fraction = tracker.fraction();
  return out;
}

inline UseCaseOrder greedy_specific_usecase(const ObjectiveSpec& objective, const DetectorOutput& detected,
                                            const std::map<std::string, std::size_t>& update_counts) {
  return greedy_specific_usecase(detected.get(objective.use_case), update_counts);
}

/// Updates processed by the shortest prefix of `order` meeting the target,
/// or nullopt with the best fraction reached.
struct PrefixCost {
  std::optional<std::size_t> updates;
  std::size_t vps = 0;
  double max_fraction = 0.0;
};

inline PrefixCost prefix_cost(const UseCaseEvents& events, std::span<const std::string> order,
                              const std::map<std::string, std::size_t>& update_counts, double target) {
  if (!(target > 0.0 && target <= 1.0)) throw Error("objective target must be in (0, 1]");
  CoverageTracker tracker(events);
  PrefixCost cost;
  std::size_t updates = 0;
  for (const auto& vp : order) {
    tracker.add(vp);
    auto it = update_counts.find(vp);
    updates += it == update_counts.end() ? 0 : it->second;
    ++cost.vps;
    cost.max_fraction = tracker.fraction();
    if (tracker.fraction() >= target) {
      cost.updates = updates;
      return cost;
    }
  }
  return cost;
}

/// |U_baseline| / |U_selected| for the smallest prefixes meeting the target.
inline double reduction_factor(const UseCaseEvents& events, double target, std::span<const std::string> baseline,
                               std::span<const std::string> selected,
                               const std::map<std::string, std::size_t>& update_counts) {
  auto b = prefix_cost(events, baseline, update_counts, target);
  auto s = prefix_cost(events, selected, update_counts, target);
  if (!b.updates) {
    throw Error("reduction_factor: baseline reaches only " + std::to_string(b.max_fraction) + " of the events");
  }
  if (!s.updates) {
    throw Error("reduction_factor: selection reaches only " + std::to_string(s.max_fraction) + " of the events");
  }
  if (*b.updates == *s.updates) return 1.0;
  return static_cast<double>(*b.updates) / static_cast<double>(*s.updates);
}

// ---------------------------------------------------------------------------
// Naive baselines

enum class NaiveStrategy { random, as_distance, unbiased };

struct BaselineContext {
  std::map<std::string, Asn> vp_asn;  // where each VP sits
  VpGraph union_graph;                // for AS-hop distances
  std::map<std::string, AsCategory> vp_category;
};

namespace detail {

inline std::map<Asn, std::size_t> hop_distances(const VpGraph& g, Asn src) {
  std::map<Asn, std::size_t> d{{src, 0}};
  std::queue<Asn> q;
  q.push(src);
  while (!q.empty()) {
    Asn u = q.front();
    q.pop();
    auto it = g.adjacency.find(u);
    if (it == g.adjacency.end()) continue;
    for (const auto& [v, _] : it->second) {
      if (d.emplace(v, d[u] + 1).second) q.push(v);
    }
  }
  return d;
}

/// Total variation distance between the category mix of `members` and the
/// uniform mix over `categories`.
inline double category_bias(const std::vector<std::string>& members, const std::set<AsCategory>& categories,
                            const std::map<std::string, AsCategory>& cat) {
  if (members.empty() || categories.empty()) return 0.0;
  std::map<AsCategory, double> share;
  for (const auto& m : members) share[cat.at(m)] += 1.0 / static_cast<double>(members.size());
  double tv = 0.0;
  for (auto c : categories) tv += std::abs(share[c] - 1.0 / static_cast<double>(categories.size()));
  return tv / 2.0;
}

}  // namespace detail

/// Full ordering of `vps` under a naive strategy; a k-VP baseline is the
/// first k entries.
///  - random: uniform shuffle.
///  - as_distance: random first VP, then repeatedly the VP farthest (in AS
///    hops on the union graph) from the nearest selected VP.
///  - unbiased: starting from all VPs, repeatedly drop the VP whose removal
///    leaves the category mix closest to uniform; the order is the reverse
///    of the removal order.
inline std::vector<std::string> naive_order(NaiveStrategy strategy, std::vector<std::string> vps,
                                            const BaselineContext& ctx, std::uint64_t seed) {
  std::sort(vps.begin(), vps.end());
  auto rng = rng_stream(seed, "naive-baseline");
  switch (strategy) {
    case NaiveStrategy::random: {
      std::shuffle(vps.begin(), vps.end(), rng);
      return vps;
    }
    case NaiveStrategy::as_distance: {
      if (vps.empty()) return vps;
      std::vector<std::string> order;
      std::uniform_int_distribution<std::size_t> pick(0, vps.size() - 1);
      std::vector<std::string> rest = vps;
      auto first = rest.begin() + static_cast<std::ptrdiff_t>(pick(rng));
      order.push_back(*first);
      rest.erase(first);
      constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();
      std::map<std::string, std::size_t> nearest;
      auto relax = [&](const std::string& chosen) {
        auto d = detail::hop_distances(ctx.union_graph, ctx.vp_asn.at(chosen));
        for (const auto& vp : rest) {
          auto it = d.find(ctx.vp_asn.at(vp));
          std::size_t dist = it == d.end() ? kUnreachable : it->second;
          auto [jt, inserted] = nearest.try_emplace(vp, dist);
          if (!inserted) jt->second = std::min(jt->second, dist);
        }
      };
      relax(order.back());
      while (!rest.empty()) {
        auto best = rest.begin();
        for (auto it = rest.begin(); it != rest.end(); ++it) {
          if (nearest[*it] > nearest[*best]) best = it;
        }
        order.push_back(*best);
        rest.erase(best);
        relax(order.back());
      }
      return order;
    }
    case NaiveStrategy::unbiased: {
      std::set<AsCategory> categories;
      for (const auto& vp : vps) categories.insert(ctx.vp_category.at(vp));
      std::vector<std::string> remaining = vps;
      std::shuffle(remaining.begin(), remaining.end(), rng);  // tie order
      std::vector<std::string> removed;
      while (remaining.size() > 1) {
        std::size_t best = 0;
        double best_bias = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < remaining.size(); ++i) {
          auto trial = remaining;
          trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
          double b = detail::category_bias(trial, categories, ctx.vp_category);
          if (b < best_bias - 1e-12) {
            best_bias = b;
            best = i;
          }
        }
        removed.push_back(remaining[best]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
      }
      std::vector<std::string> order(remaining.begin(), remaining.end());
      order.insert(order.end(), removed.rbegin(), removed.rend());
      return order;
    }
  }
  throw Error("unknown strategy");
}

inline std::vector<std::string> naive_baselines(NaiveStrategy strategy, std::vector<std::string> vps, std::size_t k,
                                                const BaselineContext& ctx, std::uint64_t seed) {
  if (k > vps.size()) throw Error("naive_baselines: k exceeds the number of VPs");
  auto order = naive_order(strategy, std::move(vps), ctx, seed);
  order.resize(k);
  return order;
}

struct BenchmarkRow {
  UseCase use_case;
  double target;
  std::string strategy;
  std::optional<std::size_t> updates_processed;
  std::optional<double> reduction_factor;
};

/// `use_case,target,strategy,updates_processed,reduction_factor`; empty
/// fields where the objective was unreachable.
inline void write_benchmark_csv(std::ostream& os, std::span<const BenchmarkRow> rows) {
  os << "use_case,target,strategy,updates_processed,reduction_factor\n";
  for (const auto& r : rows) {
    os << to_string(r.use_case) << ',' << detail::format_double(r.target) << ',' << r.strategy << ',';
    if (r.updates_processed) os << *r.updates_processed;
    os << ',';
    if (r.reduction_factor) os << detail::format_double(*r.reduction_factor);
    os << '\n';
  }
}

}  // namespace vpred
