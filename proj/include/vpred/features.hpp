#pragma once

// Topological features of the two endpoints of an AS link, as seen in one
// VP's graph.
//
//   index  feature                      weighted
//   0      closeness centrality         yes
//   1      harmonic centrality          yes
//   2      average neighbor degree      yes
//   3      eccentricity                 yes
//   4      triangle count               no
//   5      clustering coefficient       yes
//   6      Jaccard coefficient          no
//   7      Adamic-Adar index            no
//   8      preferential attachment      no
//
// Shortest-path metrics use edge length 1/weight. A node missing from the
// graph, or isolated in it, gets zeros.

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "vpred/graph.hpp"

namespace vpred {

inline constexpr std::size_t kNodeFeatures = 6;
inline constexpr std::size_t kPairFeatures = 3;
inline constexpr std::size_t kFeatureDim = 2 * kNodeFeatures + kPairFeatures;  // 15

using NodeFeatures = std::array<double, kNodeFeatures>;
using PairFeatures = std::array<double, kPairFeatures>;

/// [f0(a1), f0(a2), f1(a1), f1(a2), ..., f5(a2), f6, f7, f8], a1 < a2.
struct FeatureVector {
  std::array<double, kFeatureDim> values{};
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline const std::array<std::string, kFeatureDim>& feature_names() {
  static const std::array<std::string, kFeatureDim> names = {
      "closeness_as1",  "closeness_as2",  "harmonic_as1",   "harmonic_as2",
      "avg_nbr_deg_as1", "avg_nbr_deg_as2", "eccentricity_as1", "eccentricity_as2",
      "triangles_as1",  "triangles_as2",  "clustering_as1", "clustering_as2",
      "jaccard",        "adamic_adar",    "pref_attachment"};
  return names;
}

/// Single-source shortest distances with edge length 1/weight.
inline std::unordered_map<Asn, double> weighted_distances(const VpGraph& g, Asn source) {
  std::unordered_map<Asn, double> dist;
  if (!g.contains(source)) return dist;
  using Item = std::pair<double, Asn>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    auto it = g.adjacency.find(u);
    if (it == g.adjacency.end()) continue;
    for (const auto& [v, w] : it->second) {
      double nd = d + 1.0 / static_cast<double>(w);
      auto [jt, inserted] = dist.try_emplace(v, nd);
      if (inserted || nd < jt->second) {
        jt->second = nd;
        queue.emplace(nd, v);
      }
    }
  }
  return dist;
}

inline NodeFeatures node_features(const VpGraph& g, Asn x) {
  NodeFeatures f{};
  auto self = g.adjacency.find(x);
  if (self == g.adjacency.end()) return f;  // absent or isolated
  const auto& nbrs = self->second;

  auto dist = weighted_distances(g, x);
  double sum = 0.0, harmonic = 0.0, ecc = 0.0;
  for (const auto& [v, d] : dist) {
    if (v == x) continue;
    sum += d;
    harmonic += 1.0 / d;
    ecc = std::max(ecc, d);
  }
  const double reach = static_cast<double>(dist.size());
  const double n = static_cast<double>(g.nodes().size());
  if (reach > 1.0 && sum > 0.0) f[0] = ((reach - 1.0) / (n - 1.0)) * ((reach - 1.0) / sum);
  f[1] = harmonic;
  f[3] = ecc;

  double strength = 0.0, weighted_nbr = 0.0;
  for (const auto& [v, w] : nbrs) {
    double nbr_strength = 0.0;
    for (const auto& [_, wv] : g.adjacency.at(v)) nbr_strength += static_cast<double>(wv);
    strength += static_cast<double>(w);
    weighted_nbr += static_cast<double>(w) * nbr_strength;
  }
  f[2] = strength > 0.0 ? weighted_nbr / strength : 0.0;

  std::vector<std::pair<Asn, std::int64_t>> list(nbrs.begin(), nbrs.end());
  double triangles = 0.0, intensity = 0.0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& row = g.adjacency.at(list[i].first);
    for (std::size_t j = i + 1; j < list.size(); ++j) {
      auto it = row.find(list[j].first);
      if (it == row.end()) continue;
      triangles += 1.0;
      intensity += std::cbrt(static_cast<double>(list[i].second) *
                             static_cast<double>(list[j].second) * static_cast<double>(it->second));
    }
  }
  const double k = static_cast<double>(list.size());
  f[4] = triangles;
  f[5] = k >= 2.0 ? 2.0 * intensity / (k * (k - 1.0)) : 0.0;
  return f;
}

inline PairFeatures pair_features(const VpGraph& g, Asn a, Asn b) {
  PairFeatures f{};
  if (!g.contains(a) || !g.contains(b)) return f;
  auto ia = g.adjacency.find(a);
  auto ib = g.adjacency.find(b);
  if (ia == g.adjacency.end() || ib == g.adjacency.end()) return f;  // isolated: f8 = 0 too
  const auto& na = ia->second;
  const auto& nb = ib->second;
  std::size_t common = 0;
  double adamic = 0.0;
  for (const auto& [z, _] : na) {
    if (!nb.contains(z)) continue;
    ++common;
    adamic += 1.0 / std::log(static_cast<double>(g.degree(z)));
  }
  const std::size_t uni = na.size() + nb.size() - common;
  f[0] = uni ? static_cast<double>(common) / static_cast<double>(uni) : 0.0;
  f[1] = adamic;
  f[2] = static_cast<double>(na.size()) * static_cast<double>(nb.size());
  return f;
}

inline FeatureVector event_feature_vector(const VpGraph& g, Link link) {
  FeatureVector out;
  auto fa = node_features(g, link.a);
  auto fb = node_features(g, link.b);
  for (std::size_t i = 0; i < kNodeFeatures; ++i) {
    out.values[2 * i] = fa[i];
    out.values[2 * i + 1] = fb[i];
  }
  auto fp = pair_features(g, link.a, link.b);
  for (std::size_t i = 0; i < kPairFeatures; ++i) out.values[2 * kNodeFeatures + i] = fp[i];
  return out;
}

}  // namespace vpred
