#pragma once

// New-AS-link events: detection from a merged update stream, AS category
// classification, and period-stratified balanced sampling.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <spdlog/spdlog.h>

#include "vpred/graph.hpp"
#include "vpred/ingest.hpp"

namespace vpred {

enum class AsCategory : int { stub = 1, transit1 = 2, transit2 = 3, hypergiant = 4, tier1 = 5 };

inline constexpr int kCategoryCount = 5;
inline constexpr std::size_t kCategoryPairs = 15;
inline constexpr Timestamp kEventWindow = 600;

/// Unordered pair of categories, stored low ID first.
struct CategoryPair {
  AsCategory lo = AsCategory::stub;
  AsCategory hi = AsCategory::stub;

  CategoryPair() = default;
  CategoryPair(AsCategory x, AsCategory y) : lo(std::min(x, y)), hi(std::max(x, y)) {}

  /// 0..14 in the order (1,1) (1,2) .. (1,5) (2,2) .. (5,5).
  std::size_t index() const {
    int l = static_cast<int>(lo) - 1, h = static_cast<int>(hi) - 1;
    return static_cast<std::size_t>(l * kCategoryCount - l * (l - 1) / 2 + (h - l));
  }

  static CategoryPair from_index(std::size_t idx) {
    for (int l = 1; l <= kCategoryCount; ++l) {
      for (int h = l; h <= kCategoryCount; ++h) {
        CategoryPair p(static_cast<AsCategory>(l), static_cast<AsCategory>(h));
        if (p.index() == idx) return p;
      }
    }
    throw Error("category pair index out of range: " + std::to_string(idx));
  }

  std::string str() const {
    return std::to_string(static_cast<int>(lo)) + "-" + std::to_string(static_cast<int>(hi));
  }

  friend auto operator<=>(const CategoryPair&, const CategoryPair&) = default;
};

/// Customer lists and peerings, as in a serial-1 relationship file.
struct AsRelationships {
  std::map<Asn, std::set<Asn>> customers;
  std::map<Asn, std::set<Asn>> peers;

  bool knows(Asn a) const {
    if (customers.contains(a) || peers.contains(a)) return true;
    for (const auto& [_, cs] : customers) {
      if (cs.contains(a)) return true;
    }
    return false;
  }
};

/// Reads `provider|customer|-1` and `peer|peer|0` lines.
inline AsRelationships read_as_relationships(const std::string& path) {
  AsRelationships rel;
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') return;
    auto f = detail::split(line, '|');
    Asn a = 0, b = 0;
    int kind = 0;
    if (f.size() < 3 || !detail::parse_number(f[0], a) || !detail::parse_number(f[1], b) ||
        !detail::parse_number(f[2], kind) || (kind != -1 && kind != 0)) {
      throw Error(path + ": " + ParseError(no, "relationship", "expected a|b|-1 or a|b|0").what());
    }
    if (kind == -1) {
      rel.customers[a].insert(b);
    } else {
      rel.peers[a].insert(b);
      rel.peers[b].insert(a);
    }
  });
  return rel;
}

/// Customer-cone size of every AS that has customers; the cone includes the AS.
inline std::map<Asn, std::size_t> customer_cone_sizes(const AsRelationships& rel) {
  std::map<Asn, std::size_t> out;
  for (const auto& [root, _] : rel.customers) {
    std::set<Asn> seen{root};
    std::vector<Asn> stack{root};
    while (!stack.empty()) {
      Asn a = stack.back();
      stack.pop_back();
      auto it = rel.customers.find(a);
      if (it == rel.customers.end()) continue;
      for (Asn c : it->second) {
        if (seen.insert(c).second) stack.push_back(c);
      }
    }
    out[root] = seen.size();
  }
  return out;
}

class AsClassifier {
 public:
  AsClassifier(AsRelationships rel, std::map<Asn, std::size_t> cones, std::set<Asn> tier1,
               std::set<Asn> hypergiants)
      : rel_(std::move(rel)),
        cones_(std::move(cones)),
        tier1_(std::move(tier1)),
        hypergiants_(std::move(hypergiants)) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [a, cs] : rel_.customers) {
      if (cs.empty()) continue;
      sum += static_cast<double>(cone(a));
      ++n;
    }
    average_transit_cone_ = n ? sum / static_cast<double>(n) : 0.0;
  }

  explicit AsClassifier(AsRelationships rel, std::set<Asn> tier1 = {}, std::set<Asn> hypergiants = {})
      : AsClassifier(rel, customer_cone_sizes(rel), std::move(tier1), std::move(hypergiants)) {}

  AsCategory classify(Asn a) const {
    if (tier1_.contains(a)) return AsCategory::tier1;
    if (hypergiants_.contains(a)) return AsCategory::hypergiant;
    auto it = rel_.customers.find(a);
    if (it == rel_.customers.end() || it->second.empty()) {
      if (!rel_.knows(a)) spdlog::debug("AS{} has no relationship data, classified as stub", a);
      return AsCategory::stub;
    }
    return static_cast<double>(cone(a)) < average_transit_cone_ ? AsCategory::transit1
                                                                 : AsCategory::transit2;
  }

  double average_transit_cone() const noexcept { return average_transit_cone_; }

 private:
  std::size_t cone(Asn a) const {
    auto it = cones_.find(a);
    return it == cones_.end() ? 1 : it->second;
  }

  AsRelationships rel_;
  std::map<Asn, std::size_t> cones_;
  std::set<Asn> tier1_;
  std::set<Asn> hypergiants_;
  double average_transit_cone_ = 0.0;
};

inline AsCategory classify_as(Asn a, const AsRelationships& rel,
                              const std::map<Asn, std::size_t>& cones, const std::set<Asn>& tier1,
                              const std::set<Asn>& hypergiants) {
  return AsClassifier(rel, cones, tier1, hypergiants).classify(a);
}

struct CandidateEvent {
  Link link;
  std::string prefix;
  Timestamp first_seen = 0;
  std::vector<std::string> observers;  // sorted; empty after import
  std::size_t observer_count = 0;
  CategoryPair category_pair;

  friend bool operator==(const CandidateEvent&, const CandidateEvent&) = default;
};

/// Links a VP begins to use: present in its new route for a prefix and
/// absent from its graph just before the update.
struct Adoption {
  Timestamp t;
  Link link;
  std::string prefix;
  std::string vp_id;
};

/// Replays `updates` (sorted) over the given initial RIBs and returns every
/// adoption in stream order. VPs without a snapshot start from an empty RIB.
inline std::vector<Adoption> find_adoptions(std::span<const BgpUpdate> updates,
                                            const std::map<std::string, RibTable>& snapshots) {
  if (!is_sorted_stream(updates)) throw Error("detect: update stream is not sorted by timestamp");
  StreamReplayer replay(snapshots);
  std::vector<Adoption> out;
  for (const auto& u : updates) {
    if (u.is_announce() && replay.applies(u)) {
      const auto& g = replay.state(u.vp_id).graph();
      for (const auto& l : path_links(u.as_path)) {
        if (!g.has_edge(l.a, l.b)) out.push_back({u.timestamp, l, u.prefix, u.vp_id});
      }
    }
    replay.apply(u);
  }
  return out;
}

/// Groups adoptions of the same (link, prefix) into windows opened by the
/// earliest adoption not yet covered; a window with at least two and fewer
/// than half of `vp_count` distinct VPs is a candidate.
inline std::vector<CandidateEvent> detect_candidates(std::span<const BgpUpdate> updates,
                                                     const std::map<std::string, RibTable>& snapshots,
                                                     std::size_t vp_count,
                                                     Timestamp window = kEventWindow) {
  if (window <= 0) throw Error("detect: window must be positive");
  std::map<std::pair<Link, std::string>, std::vector<std::pair<Timestamp, std::string>>> grouped;
  for (auto& a : find_adoptions(updates, snapshots)) {
    grouped[{a.link, a.prefix}].emplace_back(a.t, std::move(a.vp_id));
  }
  std::vector<CandidateEvent> out;
  for (auto& [key, list] : grouped) {
    std::size_t i = 0;
    while (i < list.size()) {
      const Timestamp start = list[i].first;
      std::set<std::string> vps;
      std::size_t j = i;
      while (j < list.size() && list[j].first < start + window) vps.insert(list[j++].second);
      if (vps.size() >= 2 && 2 * vps.size() < vp_count) {
        CandidateEvent e;
        e.link = key.first;
        e.prefix = key.second;
        e.first_seen = start;
        e.observers.assign(vps.begin(), vps.end());
        e.observer_count = vps.size();
        out.push_back(std::move(e));
      }
      i = j;
    }
  }
  std::sort(out.begin(), out.end(), [](const CandidateEvent& x, const CandidateEvent& y) {
    return std::tie(x.first_seen, x.link, x.prefix) < std::tie(y.first_seen, y.link, y.prefix);
  });
  return out;
}

inline void assign_categories(std::span<CandidateEvent> events, const AsClassifier& classifier) {
  for (auto& e : events) e.category_pair = CategoryPair(classifier.classify(e.link.a), classifier.classify(e.link.b));
}

struct Period {
  std::size_t index = 0;
  Timestamp start = 0;

  Timestamp end() const { return start + kEventWindow; }
  friend bool operator==(const Period&, const Period&) = default;
};

struct EventSet {
  std::vector<Period> periods;
  // (period index, slot) -> event; slot is the category-pair index for
  // balanced sets.
  std::map<std::pair<std::size_t, std::size_t>, CandidateEvent> events;
  std::size_t per_period = kCategoryPairs;

  std::size_t period_count() const { return periods.size(); }
  std::size_t size() const { return events.size(); }
  double fill_rate() const {
    const auto slots = periods.size() * per_period;
    return slots ? static_cast<double>(events.size()) / static_cast<double>(slots) : 0.0;
  }
  bool period_full(std::size_t p) const {
    for (std::size_t s = 0; s < per_period; ++s) {
      if (!events.contains({p, s})) return false;
    }
    return true;
  }

  friend bool operator==(const EventSet&, const EventSet&) = default;
};

struct Timeframe {
  Timestamp start = 0;
  Timestamp end = 0;  // exclusive
};

struct SamplingOptions {
  std::size_t periods = 500;
  std::size_t per_period = kCategoryPairs;
  std::size_t redraw_cap = 10;
  std::uint64_t seed = 0;
};

namespace detail {

inline Timestamp draw_period_start(std::mt19937_64& rng, const Timeframe& tf,
                                   const std::vector<Period>& taken) {
  if (tf.end - tf.start < kEventWindow) throw Error("sample: timeframe shorter than one period");
  std::uniform_int_distribution<Timestamp> dist(tf.start, tf.end - kEventWindow);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Timestamp s = dist(rng);
    bool clash = std::any_of(taken.begin(), taken.end(), [&](const Period& p) {
      return (s > p.start ? s - p.start : p.start - s) < kEventWindow;
    });
    if (!clash) return s;
  }
  throw Error("sample: cannot place another nonoverlapping period in the timeframe");
}

/// Candidates of each slot, sorted by first_seen.
template <class SlotOf>
std::vector<std::vector<const CandidateEvent*>> bucket(std::span<const CandidateEvent> candidates,
                                                       std::size_t slots, SlotOf slot_of) {
  std::vector<std::vector<const CandidateEvent*>> out(slots);
  for (const auto& c : candidates) {
    auto s = slot_of(c);
    if (s < slots) out[s].push_back(&c);
  }
  for (auto& b : out) {
    std::stable_sort(b.begin(), b.end(), [](auto* x, auto* y) { return x->first_seen < y->first_seen; });
  }
  return out;
}

inline std::vector<const CandidateEvent*> in_period(const std::vector<const CandidateEvent*>& sorted,
                                                    const Period& p) {
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), p.start,
                             [](auto* c, Timestamp t) { return c->first_seen < t; });
  auto hi = std::lower_bound(lo, sorted.end(), p.end(),
                             [](auto* c, Timestamp t) { return c->first_seen < t; });
  return {lo, hi};
}

}  // namespace detail

/// Draws nonoverlapping 10-minute periods and, in each, one uniformly chosen
/// candidate per category pair. A period with an empty slot is redrawn up to
/// `redraw_cap` times; the best-filled draw is kept and reported.
inline EventSet balanced_sample(std::span<const CandidateEvent> candidates, const Timeframe& timeframe,
                                const SamplingOptions& opt) {
  if (opt.per_period != kCategoryPairs) {
    throw Error("sample: a balanced period holds exactly one event per category pair (15)");
  }
  auto rng = rng_stream(opt.seed, "sample-events");
  auto buckets = detail::bucket(candidates, kCategoryPairs,
                                [](const CandidateEvent& c) { return c.category_pair.index(); });
  EventSet set;
  set.per_period = opt.per_period;
  std::size_t partial = 0;
  for (std::size_t p = 0; p < opt.periods; ++p) {
    std::optional<Period> best_period;
    std::map<std::size_t, const CandidateEvent*> best;
    for (std::size_t attempt = 0; attempt <= opt.redraw_cap; ++attempt) {
      Period period{p, detail::draw_period_start(rng, timeframe, set.periods)};
      std::map<std::size_t, const CandidateEvent*> chosen;
      for (std::size_t slot = 0; slot < kCategoryPairs; ++slot) {
        auto pool = detail::in_period(buckets[slot], period);
        if (pool.empty()) continue;
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        chosen[slot] = pool[pick(rng)];
      }
      if (!best_period || chosen.size() > best.size()) {
        best_period = period;
        best = std::move(chosen);
      }
      if (best.size() == kCategoryPairs) break;
    }
    set.periods.push_back(*best_period);
    for (const auto& [slot, c] : best) set.events.emplace(std::pair{p, slot}, *c);
    if (best.size() < kCategoryPairs) ++partial;
  }
  if (partial) {
    spdlog::warn("balanced sample: {} of {} periods not fully filled (fill rate {:.3f})", partial,
                 opt.periods, set.fill_rate());
  }
  return set;
}

/// Unstratified baseline: per period, `per_period` candidates drawn uniformly
/// from everything first seen in the period, whatever their categories.
inline EventSet random_sample(std::span<const CandidateEvent> candidates, const Timeframe& timeframe,
                              const SamplingOptions& opt) {
  auto rng = rng_stream(opt.seed, "random-sample");
  auto all = detail::bucket(candidates, 1, [](const CandidateEvent&) { return std::size_t{0}; });
  EventSet set;
  set.per_period = opt.per_period;
  for (std::size_t p = 0; p < opt.periods; ++p) {
    Period period{p, detail::draw_period_start(rng, timeframe, set.periods)};
    auto pool = detail::in_period(all[0], period);
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t s = 0; s < std::min(pool.size(), opt.per_period); ++s) {
      set.events.emplace(std::pair{p, s}, *pool[s]);
    }
    set.periods.push_back(period);
  }
  return set;
}

/// `l-h|a|b|prefix|first_seen|observer_count|observers` lines, observers
/// space separated.
inline void write_candidates(std::ostream& os, std::span<const CandidateEvent> candidates) {
  for (const auto& e : candidates) {
    os << e.category_pair.str() << '|' << e.link.a << '|' << e.link.b << '|' << e.prefix << '|' << e.first_seen
       << '|' << e.observer_count << '|';
    for (std::size_t i = 0; i < e.observers.size(); ++i) os << (i ? " " : "") << e.observers[i];
    os << '\n';
  }
}

inline std::vector<CandidateEvent> read_candidates(const std::string& path) {
  std::vector<CandidateEvent> out;
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') return;
    auto fail = [&](std::string_view field) {
      throw Error(path + ": " + ParseError(no, field, "malformed").what());
    };
    auto f = detail::split(line, '|');
    if (f.size() != 7) fail("record");
    CandidateEvent e;
    auto cats = detail::split(f[0], '-');
    int lo = 0, hi = 0;
    if (cats.size() != 2 || !detail::parse_number(cats[0], lo) || !detail::parse_number(cats[1], hi) ||
        lo < 1 || hi < 1 || lo > kCategoryCount || hi > kCategoryCount) {
      fail("category_pair");
    }
    e.category_pair = CategoryPair(static_cast<AsCategory>(lo), static_cast<AsCategory>(hi));
    Asn a = 0, b = 0;
    if (!detail::parse_number(f[1], a) || !detail::parse_number(f[2], b) || a == b) fail("link");
    e.link = Link(a, b);
    e.prefix = std::string(f[3]);
    if (!detail::parse_number(f[4], e.first_seen)) fail("first_seen");
    if (!detail::parse_number(f[5], e.observer_count)) fail("observer_count");
    for (auto o : detail::split_ws(f[6])) e.observers.emplace_back(o);
    out.push_back(std::move(e));
  });
  return out;
}

/// Event counts per category pair index.
inline std::array<std::size_t, kCategoryPairs> category_pair_histogram(const EventSet& set) {
  std::array<std::size_t, kCategoryPairs> h{};
  for (const auto& [_, e] : set.events) ++h[e.category_pair.index()];
  return h;
}

inline void write_event_set(std::ostream& os, const EventSet& set) {
  os << "#per_period " << set.per_period << '\n';
  for (const auto& p : set.periods) os << "#period " << p.index << ' ' << p.start << '\n';
  for (const auto& [key, e] : set.events) {
    os << key.first << '|' << e.category_pair.str() << '|' << e.link.a << '|' << e.link.b << '|'
       << e.prefix << '|' << e.first_seen << '|' << e.observer_count << '\n';
  }
}

/// Inverse of write_event_set. Observers are not stored, only their count.
/// Slots are the category-pair index, or file order within the period when
/// a period holds several events of one pair.
inline EventSet read_event_set(const std::string& path) {
  EventSet set;
  std::map<std::size_t, std::size_t> next_free;
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    line = detail::trim(line);
    if (line.empty()) return;
    auto fail = [&](std::string_view field) {
      throw Error(path + ": " + ParseError(no, field, "malformed").what());
    };
    if (line.front() == '#') {
      auto parts = detail::split_ws(line);
      if (parts[0] == "#per_period" && parts.size() == 2) {
        if (!detail::parse_number(parts[1], set.per_period)) fail("per_period");
      } else if (parts[0] == "#period" && parts.size() == 3) {
        Period p;
        if (!detail::parse_number(parts[1], p.index) || !detail::parse_number(parts[2], p.start)) fail("period");
        set.periods.push_back(p);
      }
      return;
    }
    auto f = detail::split(line, '|');
    if (f.size() != 7) fail("record");
    std::size_t period = 0;
    CandidateEvent e;
    Asn a = 0, b = 0;
    if (!detail::parse_number(f[0], period)) fail("period_index");
    auto cats = detail::split(f[1], '-');
    int lo = 0, hi = 0;
    if (cats.size() != 2 || !detail::parse_number(cats[0], lo) || !detail::parse_number(cats[1], hi) ||
        lo < 1 || hi < 1 || lo > kCategoryCount || hi > kCategoryCount) {
      fail("category_pair");
    }
    e.category_pair = CategoryPair(static_cast<AsCategory>(lo), static_cast<AsCategory>(hi));
    if (!detail::parse_number(f[2], a) || !detail::parse_number(f[3], b) || a == b) fail("link");
    e.link = Link(a, b);
    e.prefix = std::string(f[4]);
    if (!detail::parse_number(f[5], e.first_seen)) fail("first_seen");
    if (!detail::parse_number(f[6], e.observer_count)) fail("observer_count");
    std::size_t slot = e.category_pair.index();
    if (set.events.contains({period, slot}) || set.per_period != kCategoryPairs) slot = next_free[period];
    while (set.events.contains({period, slot})) ++slot;
    next_free[period] = slot + 1;
    set.events.emplace(std::pair{period, slot}, std::move(e));
  });
  return set;
}

}  // namespace vpred
