#pragma once

// Undirected weighted AS graph of one VP's RIB. The weight of an edge is the
// number of RIB routes whose (prepending-collapsed) AS path crosses it.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "vpred/common.hpp"
#include "vpred/ingest.hpp"

namespace vpred {

/// Removes consecutive duplicate ASNs (prepending). Loops are kept.
inline AsPath collapse_path(const AsPath& path) {
  AsPath out;
  out.reserve(path.size());
  for (Asn a : path) {
    if (out.empty() || out.back() != a) out.push_back(a);
  }
  return out;
}

/// Distinct undirected links of a path, sorted.
inline std::vector<Link> path_links(const AsPath& path) {
  auto collapsed = collapse_path(path);
  std::vector<Link> links;
  for (std::size_t i = 1; i < collapsed.size(); ++i) links.emplace_back(collapsed[i - 1], collapsed[i]);
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  return links;
}

struct VpGraph {
  std::string vp_id;
  Timestamp as_of = 0;
  // Symmetric: adjacency[a][b] == adjacency[b][a].
  std::map<Asn, std::map<Asn, std::int64_t>> adjacency;
  // Routes whose collapsed path is a single AS keep that AS as a node.
  std::map<Asn, std::int64_t> singleton_routes;

  bool contains(Asn a) const { return adjacency.contains(a) || singleton_routes.contains(a); }

  std::int64_t weight(Asn a, Asn b) const {
    auto it = adjacency.find(a);
    if (it == adjacency.end()) return 0;
    auto jt = it->second.find(b);
    return jt == it->second.end() ? 0 : jt->second;
  }

  bool has_edge(Asn a, Asn b) const { return weight(a, b) > 0; }

  std::size_t degree(Asn a) const {
    auto it = adjacency.find(a);
    return it == adjacency.end() ? 0 : it->second.size();
  }

  std::vector<Asn> nodes() const {
    std::set<Asn> all;
    for (const auto& [a, _] : adjacency) all.insert(a);
    for (const auto& [a, _] : singleton_routes) all.insert(a);
    return {all.begin(), all.end()};
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& [_, nbrs] : adjacency) n += nbrs.size();
    return n / 2;
  }

  std::int64_t total_weight() const {
    std::int64_t w = 0;
    for (const auto& [a, nbrs] : adjacency) {
      for (const auto& [b, x] : nbrs) {
        if (a < b) w += x;
      }
    }
    return w;
  }

  std::map<Link, std::int64_t> edges() const {
    std::map<Link, std::int64_t> out;
    for (const auto& [a, nbrs] : adjacency) {
      for (const auto& [b, x] : nbrs) {
        if (a < b) out.emplace(Link(a, b), x);
      }
    }
    return out;
  }

  bool same_topology(const VpGraph& o) const {
    return adjacency == o.adjacency && singleton_routes == o.singleton_routes;
  }
};

inline VpGraph build_graph(const RibTable& rib) {
  VpGraph g;
  g.vp_id = rib.vp_id;
  g.as_of = rib.as_of;
  std::map<Link, std::int64_t> counts;
  for (const auto& [_, route] : rib.routes) {
    auto collapsed = collapse_path(route.as_path);
    if (collapsed.size() == 1) ++g.singleton_routes[collapsed.front()];
    for (const auto& l : path_links(route.as_path)) ++counts[l];
  }
  for (const auto& [l, w] : counts) {
    g.adjacency[l.a][l.b] = w;
    g.adjacency[l.b][l.a] = w;
  }
  return g;
}

namespace detail {

inline void add_route(VpGraph& g, const AsPath& path, std::int64_t delta) {
  auto collapsed = collapse_path(path);
  if (collapsed.size() == 1) {
    auto& c = g.singleton_routes[collapsed.front()];
    c += delta;
    if (c < 0) throw Error("graph: singleton route count went negative");
    if (c == 0) g.singleton_routes.erase(collapsed.front());
  }
  for (const auto& l : path_links(path)) {
    for (auto [x, y] : {std::pair{l.a, l.b}, std::pair{l.b, l.a}}) {
      auto& w = g.adjacency[x][y];
      w += delta;
      if (w < 0) {
        throw Error("graph: decrement of missing edge " + std::to_string(l.a) + "-" +
                    std::to_string(l.b));
      }
      if (w == 0) {
        auto it = g.adjacency.find(x);
        it->second.erase(y);
        if (it->second.empty()) g.adjacency.erase(it);
      }
    }
  }
}

}  // namespace detail

/// Replaces `old_route` with `new_route` in place; either may be absent.
inline void apply_route_change(VpGraph& graph, const std::optional<AsPath>& old_route,
                               const std::optional<AsPath>& new_route) {
  if (old_route) detail::add_route(graph, *old_route, -1);
  if (new_route) detail::add_route(graph, *new_route, +1);
}

inline VpGraph with_route_change(VpGraph graph, const std::optional<AsPath>& old_route,
                                 const std::optional<AsPath>& new_route) {
  apply_route_change(graph, old_route, new_route);
  return graph;
}

/// `asn_a asn_b weight` lines ordered by (asn_a, asn_b), asn_a < asn_b.
inline void write_edge_list(std::ostream& os, const VpGraph& g) {
  for (const auto& [l, w] : g.edges()) os << l.a << ' ' << l.b << ' ' << w << '\n';
}

/// RIB and graph of one VP, kept in step while an update stream is replayed.
class VpState {
 public:
  VpState() = default;
  explicit VpState(RibTable snapshot) : rib_(std::move(snapshot)), graph_(build_graph(rib_)) {}

  RouteChange apply(const BgpUpdate& u) {
    auto change = apply_update(rib_, u);
    std::optional<AsPath> before, after;
    if (change.before) before = change.before->as_path;
    if (change.after) after = change.after->as_path;
    apply_route_change(graph_, before, after);
    graph_.as_of = rib_.as_of;
    return change;
  }

  const RibTable& rib() const noexcept { return rib_; }
  const VpGraph& graph() const noexcept { return graph_; }

 private:
  RibTable rib_;
  VpGraph graph_;
};

/// Per-VP states for replaying a merged, sorted stream. Updates at or before
/// a VP's snapshot time are skipped; VPs without a snapshot start empty.
class StreamReplayer {
 public:
  StreamReplayer() = default;
  explicit StreamReplayer(const std::map<std::string, RibTable>& snapshots) {
    for (const auto& [vp, rib] : snapshots) {
      states_.emplace(vp, VpState(rib));
      snapshot_time_[vp] = rib.as_of;
    }
  }

  /// State before `u` is applied; creates an empty one for a new VP.
  VpState& state(const std::string& vp_id) {
    auto it = states_.find(vp_id);
    if (it == states_.end()) it = states_.emplace(vp_id, VpState(RibTable{vp_id, 0, {}})).first;
    return it->second;
  }

  bool applies(const BgpUpdate& u) const {
    auto it = snapshot_time_.find(u.vp_id);
    return it == snapshot_time_.end() || u.timestamp > it->second;
  }

  std::optional<RouteChange> apply(const BgpUpdate& u) {
    if (u.timestamp < last_) throw Error("replay: update stream is not sorted by timestamp");
    last_ = u.timestamp;
    if (!applies(u)) return std::nullopt;
    return state(u.vp_id).apply(u);
  }

  const std::map<std::string, VpState>& states() const noexcept { return states_; }

 private:
  std::map<std::string, VpState> states_;
  std::map<std::string, Timestamp> snapshot_time_;
  Timestamp last_ = std::numeric_limits<Timestamp>::min();
};

}  // namespace vpred
