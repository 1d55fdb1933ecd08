#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "vpred/events.hpp"
#include "vpred/graph.hpp"
#include "vpred/ingest.hpp"

namespace vpred::testing {

inline BgpUpdate announce(Timestamp t, std::string vp, std::string prefix, AsPath path,
                          std::vector<std::string> comms = {}) {
  return {t, std::move(vp), UpdateKind::announce, std::move(prefix), std::move(path), std::move(comms)};
}

inline BgpUpdate withdraw(Timestamp t, std::string vp, std::string prefix) {
  return {t, std::move(vp), UpdateKind::withdraw, std::move(prefix), {}, {}};
}

/// Random connected-ish weighted graph on ASNs 1..n, symmetric.
inline VpGraph random_graph(std::mt19937_64& rng, std::size_t n, double p, int max_weight) {
  std::bernoulli_distribution edge(p);
  std::uniform_int_distribution<int> weight(1, max_weight);
  VpGraph g;
  for (Asn a = 1; a <= n; ++a) {
    for (Asn b = a + 1; b <= n; ++b) {
      if (!edge(rng)) continue;
      auto w = weight(rng);
      g.adjacency[a][b] = w;
      g.adjacency[b][a] = w;
    }
  }
  return g;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() / ("vpred_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& f) const { return path_ / f; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

/// Candidates for every category pair, one per pair every `step` seconds
/// over [0, span).
inline std::vector<CandidateEvent> full_pool(Timestamp span, Timestamp step) {
  std::vector<CandidateEvent> pool;
  Asn next = 1;
  for (Timestamp t = 0; t < span; t += step) {
    for (std::size_t i = 0; i < kCategoryPairs; ++i) {
      CandidateEvent e;
      e.link = Link(next, next + 1);
      next += 2;
      e.prefix = "10.0.0.0/24";
      e.first_seen = t;
      e.observer_count = 2;
      e.observers = {"a", "b"};
      e.category_pair = CategoryPair::from_index(i);
      pool.push_back(e);
    }
  }
  return pool;
}

/// A random update of `vp` together with that VP's RIB just before it,
/// drawn from a small universe so that overlaps are common.
struct UpdateWithPrior {
  BgpUpdate update;
  RibTable prior;
};

inline UpdateWithPrior random_update_with_prior(std::mt19937_64& rng, const std::string& vp) {
  auto path = [&] {
    AsPath p;
    for (std::size_t i = 0; i < 1 + rng() % 4; ++i) p.push_back(static_cast<Asn>(1 + rng() % 6));
    return p;
  };
  auto comms = [&] {
    std::vector<std::string> c;
    for (int i = 1; i <= 3; ++i)
      if (rng() % 2) c.push_back("1:" + std::to_string(i));
    return c;
  };
  UpdateWithPrior out;
  out.prior = RibTable{vp, 0, {}};
  const std::string prefix = rng() % 4 ? "p" : "q";
  if (rng() % 3) out.prior.routes[prefix] = RibRoute{path(), comms(), 0};
  const Timestamp t = static_cast<Timestamp>(1 + rng() % 700);
  out.update = rng() % 5 ? announce(t, vp, prefix, path(), comms()) : withdraw(t, vp, prefix);
  return out;
}

}  // namespace vpred::testing
