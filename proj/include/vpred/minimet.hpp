#pragma once

// Mini-Internet: power-law AS topology with tiered business relationships,
// Gao-Rexford route propagation, VP deployment strategies, link coverage,
// and a link-churn generator that emits archives in the canonical format.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vpred/common.hpp"
#include "vpred/events.hpp"
#include "vpred/ingest.hpp"

namespace vpred {

inline constexpr std::size_t kDefaultAsCount = 600;
inline constexpr double kDefaultAvgDegree = 6.1;
inline constexpr double kDefaultExponent = 2.1;
inline constexpr std::size_t kTier1Count = 3;

enum class Relationship { p2p, c2p };

struct EdgeInfo {
  Relationship rel = Relationship::p2p;
  Asn provider = 0;  // c2p only
};

/// ASNs are 1..n.
struct AsTopology {
  std::size_t n = 0;
  std::map<Link, EdgeInfo> edges;
  std::vector<int> tiers;  // indexed by ASN; tiers[0] unused
  std::uint64_t seed = 0;

  std::vector<std::vector<Asn>> adjacency() const {
    std::vector<std::vector<Asn>> adj(n + 1);
    for (const auto& [l, _] : edges) {
      adj[l.a].push_back(l.b);
      adj[l.b].push_back(l.a);
    }
    return adj;
  }

  double mean_degree() const { return n ? 2.0 * static_cast<double>(edges.size()) / static_cast<double>(n) : 0.0; }

  std::set<Asn> tier1() const {
    std::set<Asn> out;
    for (Asn a = 1; a <= n; ++a) {
      if (tiers[a] == 1) out.insert(a);
    }
    return out;
  }
};

/// What `b` is to `a`.
enum class NeighborRole { customer = 0, peer = 1, provider = 2 };

inline NeighborRole role_of(const AsTopology& t, Asn a, Asn b) {
  auto it = t.edges.find(Link(a, b));
  if (it == t.edges.end()) throw Error("topology: no edge " + std::to_string(a) + "-" + std::to_string(b));
  if (it->second.rel == Relationship::p2p) return NeighborRole::peer;
  return it->second.provider == b ? NeighborRole::provider : NeighborRole::customer;
}

inline std::string prefix_of(Asn a) {
  return "10." + std::to_string(a / 256) + "." + std::to_string(a % 256) + ".0/24";
}

inline std::string vp_name(Asn a) { return "AS" + std::to_string(a); }

namespace detail {

inline std::vector<std::vector<Asn>> components(std::size_t n, const std::set<Link>& edges) {
  std::vector<std::vector<Asn>> adj(n + 1);
  for (const auto& l : edges) {
    adj[l.a].push_back(l.b);
    adj[l.b].push_back(l.a);
  }
  std::vector<bool> seen(n + 1, false);
  std::vector<std::vector<Asn>> out;
  for (Asn s = 1; s <= n; ++s) {
    if (seen[s]) continue;
    out.emplace_back();
    std::vector<Asn> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      Asn u = stack.back();
      stack.pop_back();
      out.back().push_back(u);
      for (Asn v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
  }
  return out;
}

inline std::vector<std::size_t> scaled_degrees(const std::vector<double>& raw, double scale, std::size_t cap) {
  std::vector<std::size_t> d(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    d[i] = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(raw[i] * scale)), 1, cap);
  }
  return d;
}

inline double mean_of(const std::vector<std::size_t>& d) {
  return static_cast<double>(std::accumulate(d.begin(), d.end(), std::size_t{0})) / static_cast<double>(d.size());
}

}  // namespace detail

/// Configuration-model graph with a power-law degree sequence rescaled to
/// the target mean. Self-loops and multi-edges are dropped, smaller
/// components are joined to the largest, and the target is corrected and
/// redrawn until the realized mean is within 5% (10% after the retry cap).
inline AsTopology generate_topology(std::size_t n = kDefaultAsCount, double avg_degree = kDefaultAvgDegree,
                                    double exponent = kDefaultExponent, std::uint64_t seed = 0,
                                    std::size_t max_degree = 0) {
  const std::size_t cap = max_degree ? std::min(max_degree, n - 1) : n - 1;
  if (n < 10) throw Error("generate_topology: need at least 10 ASes");
  if (!(exponent > 2.0)) throw Error("generate_topology: exponent must exceed 2");
  if (!(avg_degree >= 2.0) || avg_degree > static_cast<double>(n - 1) / 2.0) {
    throw Error("generate_topology: average degree not achievable for this size");
  }
  constexpr int kAttempts = 40;
  double target = avg_degree;
  std::optional<AsTopology> best;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    auto rng = rng_stream(seed, "topology/" + std::to_string(attempt));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> raw(n);
    for (auto& x : raw) x = std::pow(1.0 - unif(rng), -1.0 / (exponent - 1.0));

    double lo = 1e-3, hi = 1e3;
    for (int it = 0; it < 100; ++it) {
      const double mid = std::sqrt(lo * hi);
      (detail::mean_of(detail::scaled_degrees(raw, mid, cap)) < target ? lo : hi) = mid;
    }
    auto degrees = detail::scaled_degrees(raw, hi, cap);
    if (std::accumulate(degrees.begin(), degrees.end(), std::size_t{0}) % 2 == 1) {
      auto low = std::min_element(degrees.begin(), degrees.end());
      ++*low;
    }

    std::vector<Asn> stubs;
    for (std::size_t i = 0; i < n; ++i) stubs.insert(stubs.end(), degrees[i], static_cast<Asn>(i + 1));
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::set<Link> edges;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      if (stubs[i] != stubs[i + 1]) edges.emplace(stubs[i], stubs[i + 1]);
    }

    auto comps = detail::components(n, edges);
    std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
      return a.size() > b.size() || (a.size() == b.size() && a.front() < b.front());
    });
    std::vector<std::size_t> deg(n + 1, 0);
    for (const auto& l : edges) {
      ++deg[l.a];
      ++deg[l.b];
    }
    const auto& giant = comps.front();
    for (std::size_t c = 1; c < comps.size(); ++c) {
      Asn hub = *std::max_element(comps[c].begin(), comps[c].end(), [&](Asn a, Asn b) {
        return deg[a] < deg[b] || (deg[a] == deg[b] && a > b);
      });
      std::uniform_int_distribution<std::size_t> pick(0, giant.size() - 1);
      Asn anchor = giant[pick(rng)];
      edges.emplace(hub, anchor);
      ++deg[hub];
      ++deg[anchor];
    }

    std::vector<Asn> by_degree(n);
    std::iota(by_degree.begin(), by_degree.end(), Asn{1});
    std::stable_sort(by_degree.begin(), by_degree.end(), [&](Asn a, Asn b) { return deg[a] > deg[b]; });
    std::vector<Asn> tier1(by_degree.begin(), by_degree.begin() + kTier1Count);
    for (std::size_t i = 0; i < tier1.size(); ++i) {
      for (std::size_t j = i + 1; j < tier1.size(); ++j) edges.emplace(tier1[i], tier1[j]);
    }

    AsTopology t;
    t.n = n;
    t.seed = seed;
    t.tiers.assign(n + 1, 0);
    std::vector<std::vector<Asn>> adj(n + 1);
    for (const auto& l : edges) {
      adj[l.a].push_back(l.b);
      adj[l.b].push_back(l.a);
    }
    std::queue<Asn> q;
    for (Asn a : tier1) {
      t.tiers[a] = 1;
      q.push(a);
    }
    while (!q.empty()) {
      Asn u = q.front();
      q.pop();
      for (Asn v : adj[u]) {
        if (t.tiers[v] == 0) {
          t.tiers[v] = t.tiers[u] + 1;
          q.push(v);
        }
      }
    }
    for (const auto& l : edges) {
      EdgeInfo e;
      if (t.tiers[l.a] == t.tiers[l.b]) {
        e.rel = Relationship::p2p;
      } else {
        e.rel = Relationship::c2p;
        e.provider = t.tiers[l.a] < t.tiers[l.b] ? l.a : l.b;
      }
      t.edges.emplace(l, e);
    }

    const double realized = t.mean_degree();
    const double err = std::abs(realized - avg_degree) / avg_degree;
    if (!best || err < std::abs(best->mean_degree() - avg_degree) / avg_degree) best = t;
    if (err <= 0.05) return t;
    target *= avg_degree / realized;
  }
  if (best && std::abs(best->mean_degree() - avg_degree) / avg_degree <= 0.10) return *best;
  throw Error("generate_topology: could not realize the requested degree sequence");
}

/// CAIDA-style `provider|customer|-1` and `peer|peer|0` lines, ordered by link.
inline void write_topology(std::ostream& os, const AsTopology& t) {
  for (const auto& [l, e] : t.edges) {
    if (e.rel == Relationship::p2p) {
      os << l.a << '|' << l.b << "|0\n";
    } else {
      os << e.provider << '|' << (e.provider == l.a ? l.b : l.a) << "|-1\n";
    }
  }
}

inline AsRelationships to_relationships(const AsTopology& t) {
  AsRelationships rel;
  for (const auto& [l, e] : t.edges) {
    if (e.rel == Relationship::p2p) {
      rel.peers[l.a].insert(l.b);
      rel.peers[l.b].insert(l.a);
    } else {
      rel.customers[e.provider].insert(e.provider == l.a ? l.b : l.a);
    }
  }
  return rel;
}

/// Best route of every AS towards every AS's prefix, as next hops.
struct RoutingTable {
  std::size_t n = 0;
  // next_hop[d][x]: next AS on x's path to d's prefix; x itself when x == d,
  // 0 when unreachable.
  std::vector<std::vector<Asn>> next_hop;
  std::vector<std::vector<std::uint16_t>> length;

  bool reachable(Asn x, Asn d) const { return next_hop[d][x] != 0; }

  /// AS path from x to d, starting with x; empty if unreachable.
  AsPath path(Asn x, Asn d) const {
    AsPath p;
    if (!reachable(x, d)) return p;
    p.push_back(x);
    while (x != d) {
      x = next_hop[d][x];
      p.push_back(x);
    }
    return p;
  }
};

namespace detail {

struct Candidate {
  NeighborRole role;
  std::size_t length;
  Asn next_hop;
};

/// Route ranking: customer over peer over provider, then shorter path, then
/// lower next-hop ASN. The last tie-break is a local choice.
inline bool prefer(const Candidate& a, const Candidate& b) {
  return std::tie(a.role, a.length, a.next_hop) < std::tie(b.role, b.length, b.next_hop);
}

}  // namespace detail

/// Gao-Rexford propagation iterated to a fixed point, one destination at a
/// time. Links in `down` are treated as absent.
inline RoutingTable propagate_routes(const AsTopology& t, const std::set<Link>& down = {}) {
  const std::size_t n = t.n;
  std::vector<std::vector<std::pair<Asn, NeighborRole>>> nbrs(n + 1);
  for (const auto& [l, e] : t.edges) {
    if (down.contains(l)) continue;
    nbrs[l.a].emplace_back(l.b, role_of(t, l.a, l.b));
    nbrs[l.b].emplace_back(l.a, role_of(t, l.b, l.a));
  }
  RoutingTable rt;
  rt.n = n;
  rt.next_hop.assign(n + 1, {});
  rt.length.assign(n + 1, {});
  const std::size_t cap = 4 * n + 16;

  for (Asn d = 1; d <= n; ++d) {
    auto& nh = rt.next_hop[d];
    auto& len = rt.length[d];
    nh.assign(n + 1, 0);
    len.assign(n + 1, 0);
    std::vector<NeighborRole> learned(n + 1, NeighborRole::customer);
    nh[d] = d;

    auto on_path = [&](Asn from, Asn x) {
      for (std::size_t steps = 0; steps <= n; ++steps) {
        if (from == x) return true;
        if (from == d || nh[from] == 0) return false;
        from = nh[from];
      }
      return true;  // inconsistent chain; treat as a loop
    };

    bool changed = true;
    std::size_t rounds = 0;
    while (changed) {
      if (++rounds > cap) throw Error("propagate_routes: no fixed point for prefix of AS" + std::to_string(d));
      changed = false;
      for (Asn x = 1; x <= n; ++x) {
        if (x == d) continue;
        std::optional<detail::Candidate> best;
        for (const auto& [y, role] : nbrs[x]) {
          if (nh[y] == 0) continue;
          // y exports to x: own or customer-learned routes to everyone, the
          // rest only to customers (x is y's customer iff y is x's provider).
          const bool exportable = y == d || learned[y] == NeighborRole::customer || role == NeighborRole::provider;
          if (!exportable || on_path(y, x)) continue;
          detail::Candidate c{role, static_cast<std::size_t>(len[y]) + 1, y};
          if (!best || detail::prefer(c, *best)) best = c;
        }
        const Asn new_nh = best ? best->next_hop : 0;
        const auto new_len = static_cast<std::uint16_t>(best ? best->length : 0);
        const auto new_role = best ? best->role : NeighborRole::customer;
        if (new_nh != nh[x] || new_len != len[x] || new_role != learned[x]) {
          nh[x] = new_nh;
          len[x] = new_len;
          learned[x] = new_role;
          changed = true;
        }
      }
    }
  }
  return rt;
}

/// Zero or more customer-to-provider steps, at most one peering step, then
/// zero or more provider-to-customer steps, reading the path from its first AS.
inline bool is_valley_free(const AsTopology& t, const AsPath& path) {
  int phase = 0;  // 0 uphill, 1 after the peering step or while downhill
  for (std::size_t i = 1; i < path.size(); ++i) {
    switch (role_of(t, path[i - 1], path[i])) {
      case NeighborRole::provider:
        if (phase != 0) return false;
        break;
      case NeighborRole::peer:
        if (phase != 0) return false;
        phase = 1;
        break;
      case NeighborRole::customer:
        phase = 1;
        break;
    }
  }
  return true;
}

/// RIB of every AS at time `as_of`; routes carry the given communities per
/// origin (none when absent).
inline std::map<Asn, RibTable> to_ribs(const RoutingTable& rt, Timestamp as_of,
                                       const std::map<Asn, std::vector<std::string>>& communities = {}) {
  std::map<Asn, RibTable> out;
  for (Asn x = 1; x <= rt.n; ++x) {
    RibTable rib{vp_name(x), as_of, {}};
    for (Asn d = 1; d <= rt.n; ++d) {
      if (!rt.reachable(x, d)) continue;
      RibRoute r;
      r.as_path = rt.path(x, d);
      if (auto it = communities.find(d); it != communities.end()) r.communities = it->second;
      r.last_update_time = as_of;
      rib.routes.emplace(prefix_of(d), std::move(r));
    }
    out.emplace(x, std::move(rib));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Deployment and coverage

enum class DeployStrategy { random, distance_based, greedy_specific };

inline std::string to_string(DeployStrategy s) {
  switch (s) {
    case DeployStrategy::random: return "random";
    case DeployStrategy::distance_based: return "distance";
    case DeployStrategy::greedy_specific: return "greedy";
  }
  return "?";
}

inline DeployStrategy parse_deploy_strategy(std::string_view s) {
  if (s == "random") return DeployStrategy::random;
  if (s == "distance" || s == "distance_based") return DeployStrategy::distance_based;
  if (s == "greedy" || s == "greedy_specific") return DeployStrategy::greedy_specific;
  throw Error("unknown deployment strategy '" + std::string(s) + "'");
}

/// Links each AS observes in its RIB, as indices into `links`.
struct Observation {
  std::vector<Link> links;                        // sorted, all topology links
  std::vector<bool> is_p2p;                       // per link
  std::vector<std::vector<std::uint32_t>> by_as;  // indexed by ASN, sorted
  std::size_t p2p_total = 0;
  std::size_t c2p_total = 0;
};

inline Observation observe(const AsTopology& t, const RoutingTable& rt) {
  Observation o;
  std::map<Link, std::uint32_t> index;
  for (const auto& [l, e] : t.edges) {
    index.emplace(l, static_cast<std::uint32_t>(o.links.size()));
    o.links.push_back(l);
    o.is_p2p.push_back(e.rel == Relationship::p2p);
    (e.rel == Relationship::p2p ? o.p2p_total : o.c2p_total) += 1;
  }
  o.by_as.assign(t.n + 1, {});
  std::vector<std::uint32_t> mark(o.links.size(), 0);
  for (Asn x = 1; x <= t.n; ++x) {
    auto& seen = o.by_as[x];
    for (Asn d = 1; d <= t.n; ++d) {
      if (!rt.reachable(x, d)) continue;
      for (Asn a = x; a != d; a = rt.next_hop[d][a]) {
        auto id = index.at(Link(a, rt.next_hop[d][a]));
        if (mark[id] != x) {
          mark[id] = x;
          seen.push_back(id);
        }
      }
    }
    std::sort(seen.begin(), seen.end());
  }
  return o;
}

/// Which link class a greedy deployment maximizes.
enum class GreedyTarget { all_links, p2p, c2p };

/// Full deployment order of all n ASes; a k-VP deployment is its first k.
///  - random: uniform permutation.
///  - distance_based: random first AS, then farthest-point traversal on hop
///    distance (ties: lower ASN).
///  - greedy_specific: most newly observed links of the target class (ties:
///    lower ASN); ASes adding nothing follow in ASN order.
inline std::vector<Asn> deployment_order(const AsTopology& t, const Observation& obs, DeployStrategy s,
                                         std::uint64_t seed, GreedyTarget target = GreedyTarget::all_links) {
  std::vector<Asn> all(t.n);
  std::iota(all.begin(), all.end(), Asn{1});
  switch (s) {
    case DeployStrategy::random: {
      auto rng = rng_stream(seed, "deploy/random");
      std::shuffle(all.begin(), all.end(), rng);
      return all;
    }
    case DeployStrategy::distance_based: {
      auto rng = rng_stream(seed, "deploy/distance");
      std::uniform_int_distribution<std::size_t> pick(1, t.n);
      const auto adj = t.adjacency();
      constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max();
      std::vector<std::size_t> nearest(t.n + 1, kFar);
      std::vector<bool> taken(t.n + 1, false);
      std::vector<Asn> order;
      auto add = [&](Asn a) {
        order.push_back(a);
        taken[a] = true;
        std::queue<Asn> q;
        std::vector<std::size_t> d(t.n + 1, kFar);
        d[a] = 0;
        q.push(a);
        while (!q.empty()) {
          Asn u = q.front();
          q.pop();
          nearest[u] = std::min(nearest[u], d[u]);
          for (Asn v : adj[u]) {
            if (d[v] == kFar) {
              d[v] = d[u] + 1;
              q.push(v);
            }
          }
        }
      };
      add(static_cast<Asn>(pick(rng)));
      while (order.size() < t.n) {
        Asn best = 0;
        for (Asn a = 1; a <= t.n; ++a) {
          if (!taken[a] && (best == 0 || nearest[a] > nearest[best])) best = a;
        }
        add(best);
      }
      return order;
    }
    case DeployStrategy::greedy_specific: {
      auto counts = [&](std::uint32_t id) {
        switch (target) {
          case GreedyTarget::all_links: return true;
          case GreedyTarget::p2p: return static_cast<bool>(obs.is_p2p[id]);
          case GreedyTarget::c2p: return !obs.is_p2p[id];
        }
        return true;
      };
      std::vector<bool> covered(obs.links.size(), false), taken(t.n + 1, false);
      std::vector<Asn> order;
      while (order.size() < t.n) {
        Asn best = 0;
        std::size_t best_gain = 0;
        for (Asn a = 1; a <= t.n; ++a) {
          if (taken[a]) continue;
          std::size_t g = 0;
          for (auto id : obs.by_as[a]) g += (!covered[id] && counts(id)) ? 1 : 0;
          if (best == 0 || g > best_gain) {
            best = a;
            best_gain = g;
          }
        }
        taken[best] = true;
        order.push_back(best);
        for (auto id : obs.by_as[best]) covered[id] = true;
      }
      return order;
    }
  }
  throw Error("unknown deployment strategy");
}

struct Coverage {
  double p2p = 0.0;
  double c2p = 0.0;
};

/// Coverage of the first k ASes of `order` for every k in `ks`.
inline std::vector<Coverage> coverage_curve(const Observation& obs, std::span<const Asn> order,
                                            std::span<const std::size_t> ks) {
  std::vector<Coverage> out;
  std::vector<bool> covered(obs.links.size(), false);
  std::size_t p2p = 0, c2p = 0, used = 0;
  for (std::size_t k : ks) {
    if (k > order.size()) throw Error("coverage: k exceeds the number of ASes");
    if (k < used) throw Error("coverage: k values must be nondecreasing");
    for (; used < k; ++used) {
      for (auto id : obs.by_as[order[used]]) {
        if (covered[id]) continue;
        covered[id] = true;
        (obs.is_p2p[id] ? p2p : c2p) += 1;
      }
    }
    Coverage c;
    c.p2p = obs.p2p_total ? static_cast<double>(p2p) / static_cast<double>(obs.p2p_total) : 1.0;
    c.c2p = obs.c2p_total ? static_cast<double>(c2p) / static_cast<double>(obs.c2p_total) : 1.0;
    out.push_back(c);
  }
  return out;
}

/// Coverage split by link class for a k-VP deployment. The greedy strategy
/// is specific to the measured class: p2p coverage comes from a deployment
/// maximizing p2p links, c2p coverage from one maximizing c2p links.
inline Coverage deploy_and_measure(const AsTopology& t, const Observation& obs, DeployStrategy s, std::size_t k,
                                   std::uint64_t seed) {
  if (k > t.n) throw Error("deploy_and_measure: k exceeds the number of ASes");
  std::size_t ks[] = {k};
  if (s != DeployStrategy::greedy_specific) return coverage_curve(obs, deployment_order(t, obs, s, seed), ks).front();
  Coverage c;
  c.p2p = coverage_curve(obs, deployment_order(t, obs, s, seed, GreedyTarget::p2p), ks).front().p2p;
  c.c2p = coverage_curve(obs, deployment_order(t, obs, s, seed, GreedyTarget::c2p), ks).front().c2p;
  return c;
}

struct CoverageRow {
  DeployStrategy strategy;
  std::size_t k;
  std::uint64_t seed;
  Coverage coverage;
};

/// Rows for every strategy and k on one topology; greedy is class-specific
/// as in deploy_and_measure.
inline std::vector<CoverageRow> coverage_sweep(const AsTopology& t, const Observation& obs,
                                               std::span<const DeployStrategy> strategies,
                                               std::span<const std::size_t> ks, std::uint64_t seed) {
  std::vector<CoverageRow> rows;
  for (auto s : strategies) {
    std::vector<Coverage> curve;
    if (s == DeployStrategy::greedy_specific) {
      auto p = coverage_curve(obs, deployment_order(t, obs, s, seed, GreedyTarget::p2p), ks);
      auto c = coverage_curve(obs, deployment_order(t, obs, s, seed, GreedyTarget::c2p), ks);
      for (std::size_t i = 0; i < ks.size(); ++i) curve.push_back({p[i].p2p, c[i].c2p});
    } else {
      curve = coverage_curve(obs, deployment_order(t, obs, s, seed), ks);
    }
    for (std::size_t i = 0; i < ks.size(); ++i) rows.push_back({s, ks[i], seed, curve[i]});
  }
  return rows;
}

inline void write_coverage_csv(std::ostream& os, std::span<const CoverageRow> rows, bool header = true) {
  if (header) os << "strategy,k,seed,p2p_coverage,c2p_coverage\n";
  for (const auto& r : rows) {
    os << to_string(r.strategy) << ',' << r.k << ',' << r.seed << ',' << detail::format_double(r.coverage.p2p)
       << ',' << detail::format_double(r.coverage.c2p) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Churn: link outages and community retagging, observed by a set of VP ASes.

struct ChurnOptions {
  std::vector<Asn> vps;
  Timestamp start = 1'700'000'000;
  Timestamp duration = 6 * 3600;
  std::size_t changes = 120;  // outages plus retags
  double retag_share = 0.25;
  Timestamp min_outage = 30;
  Timestamp max_outage = 1800;
  std::uint64_t seed = 0;
};

struct SimulatedArchive {
  std::map<std::string, RibTable> snapshots;  // at opt.start
  std::vector<BgpUpdate> updates;             // sorted
};

/// Replays random link outages (each later restored) and origin community
/// changes, recomputing routes after every state change and emitting each
/// VP's differences as updates. A VP hears a change a few seconds after it
/// happens (its new path length in seconds); state changes are at least a
/// minute apart so per-VP order is preserved.
inline SimulatedArchive simulate_churn(const AsTopology& t, const ChurnOptions& opt) {
  if (opt.vps.empty()) throw Error("simulate_churn: no VPs");
  for (Asn v : opt.vps) {
    if (v == 0 || v > t.n) throw Error("simulate_churn: VP AS" + std::to_string(v) + " not in topology");
  }
  auto rng = rng_stream(opt.seed, "churn");
  std::vector<Link> links;
  for (const auto& [l, _] : t.edges) links.push_back(l);

  struct Change {
    Timestamp t;
    int kind;  // 0 fail, 1 restore, 2 retag
    Link link;
    Asn origin;
  };
  std::vector<Change> changes;
  std::uniform_int_distribution<Timestamp> when(opt.start + 60, opt.start + opt.duration - 1);
  std::uniform_int_distribution<Timestamp> outage(opt.min_outage, opt.max_outage);
  std::uniform_int_distribution<std::size_t> pick_link(0, links.size() - 1);
  std::uniform_int_distribution<Asn> pick_as(1, static_cast<Asn>(t.n));
  std::bernoulli_distribution retag(opt.retag_share);
  for (std::size_t i = 0; i < opt.changes; ++i) {
    const Timestamp at = when(rng);
    if (retag(rng)) {
      changes.push_back({at, 2, {}, pick_as(rng)});
    } else {
      Link l = links[pick_link(rng)];
      changes.push_back({at, 0, l, 0});
      changes.push_back({at + outage(rng), 1, l, 0});
    }
  }
  std::stable_sort(changes.begin(), changes.end(), [](const Change& a, const Change& b) { return a.t < b.t; });
  for (std::size_t i = 1; i < changes.size(); ++i) changes[i].t = std::max(changes[i].t, changes[i - 1].t + 60);

  std::map<Asn, int> tags;
  auto communities = [&]() {
    std::map<Asn, std::vector<std::string>> c;
    for (Asn a = 1; a <= t.n; ++a) c[a] = {std::to_string(a) + ":" + std::to_string(100 + tags[a])};
    return c;
  };

  SimulatedArchive out;
  std::map<Link, int> down_count;
  auto down_set = [&]() {
    std::set<Link> s;
    for (const auto& [l, c] : down_count) {
      if (c > 0) s.insert(l);
    }
    return s;
  };
  auto rt = propagate_routes(t);
  auto comms = communities();
  std::map<Asn, RibTable> current;
  {
    auto ribs = to_ribs(rt, opt.start, comms);
    for (Asn v : opt.vps) {
      current[v] = ribs.at(v);
      out.snapshots.emplace(vp_name(v), ribs.at(v));
    }
  }
  for (const auto& ch : changes) {
    if (ch.kind == 0) ++down_count[ch.link];
    if (ch.kind == 1) --down_count[ch.link];
    if (ch.kind == 2) ++tags[ch.origin];
    if (ch.kind != 2) rt = propagate_routes(t, down_set());
    comms = communities();
    for (Asn v : opt.vps) {
      auto& rib = current[v];
      for (Asn d = 1; d <= t.n; ++d) {
        const auto prefix = prefix_of(d);
        auto it = rib.routes.find(prefix);
        BgpUpdate u;
        u.vp_id = vp_name(v);
        u.prefix = prefix;
        if (rt.reachable(v, d)) {
          auto path = rt.path(v, d);
          const auto& c = comms.at(d);
          if (it != rib.routes.end() && it->second.as_path == path && it->second.communities == c) continue;
          u.kind = UpdateKind::announce;
          u.as_path = std::move(path);
          u.communities = c;
          u.timestamp = ch.t + static_cast<Timestamp>(u.as_path.size());
        } else {
          if (it == rib.routes.end()) continue;
          u.kind = UpdateKind::withdraw;
          u.timestamp = ch.t + 1;
        }
        apply_update(rib, u);
        out.updates.push_back(std::move(u));
      }
    }
  }
  sort_stream(out.updates);
  return out;
}

}  // namespace vpred
