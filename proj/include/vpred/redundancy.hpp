#pragma once

// Pairwise VP redundancy from per-event feature vectors:
//   1. concatenate each VP's vectors for the events of one period,
//   2. standardize every column over the VPs,
//   3. squared Euclidean distance between every pair of VP rows,
//   4. average over periods, min-max scale the off-diagonal averages and
//      flip them so that 1 marks the closest pair and 0 the farthest.

#include <algorithm>
#include <atomic>
#include <exception>
#include <bitset>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "vpred/events.hpp"
#include "vpred/features.hpp"
#include "vpred/graph.hpp"
#include "vpred/ingest.hpp"

namespace vpred {

/// Dense n x n matrix, row major.
struct SquareMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t size, double fill = 0.0) : n(size), data(size * size, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;
};

/// Feature indices 0..8 to leave out (feature-category ablations).
using FeatureMask = std::bitset<kNodeFeatures + kPairFeatures>;

struct PeriodMatrix {
  std::size_t period = 0;
  std::size_t slots = kCategoryPairs;
  std::vector<std::string> vp_ids;  // row order, sorted
  std::vector<double> values;       // rows x cols, row major
  std::vector<bool> live;           // per column

  std::size_t rows() const { return vp_ids.size(); }
  std::size_t cols() const { return slots * kFeatureDim; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  std::size_t live_count() const { return static_cast<std::size_t>(std::count(live.begin(), live.end(), true)); }
};

/// Feature index (0..8) of a position inside one 15-wide event block.
inline std::size_t feature_of_position(std::size_t pos) {
  return pos < 2 * kNodeFeatures ? pos / 2 : pos - kNodeFeatures;
}

/// Builds the period matrix from per-(VP, slot) vectors. Every VP must have
/// the same set of filled slots; unfilled slots and masked features become
/// dead zero columns.
inline PeriodMatrix assemble_period_matrix(
    const std::map<std::pair<std::string, std::size_t>, FeatureVector>& vectors, std::size_t period,
    std::size_t slots = kCategoryPairs, FeatureMask disabled = {}) {
  std::map<std::string, std::set<std::size_t>> slot_sets;
  for (const auto& [key, _] : vectors) {
    if (key.second >= slots) throw Error("assemble: slot index out of range");
    slot_sets[key.first].insert(key.second);
  }
  PeriodMatrix m;
  m.period = period;
  m.slots = slots;
  for (const auto& [vp, set] : slot_sets) {
    if (set != slot_sets.begin()->second) {
      throw Error("assemble: VP " + vp + " has a different event-slot set in period " +
                  std::to_string(period));
    }
    m.vp_ids.push_back(vp);
  }
  m.values.assign(m.rows() * m.cols(), 0.0);
  m.live.assign(m.cols(), false);
  if (m.vp_ids.empty()) return m;
  for (std::size_t s : slot_sets.begin()->second) {
    for (std::size_t pos = 0; pos < kFeatureDim; ++pos) {
      m.live[s * kFeatureDim + pos] = !disabled.test(feature_of_position(pos));
    }
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t s : slot_sets.begin()->second) {
      const auto& v = vectors.at({m.vp_ids[r], s}).values;
      for (std::size_t pos = 0; pos < kFeatureDim; ++pos) {
        const std::size_t c = s * kFeatureDim + pos;
        if (m.live[c]) m.at(r, c) = v[pos];
      }
    }
  }
  return m;
}

/// Column-wise zero mean, unit population standard deviation. Constant
/// columns become zero and are marked dead.
inline PeriodMatrix standard_scale(PeriodMatrix m) {
  if (m.rows() < 2) throw Error("standard_scale: need at least two VPs");
  const double n = static_cast<double>(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (!m.live[c]) continue;
    double lo = m.at(0, c), hi = m.at(0, c), mean = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      lo = std::min(lo, m.at(r, c));
      hi = std::max(hi, m.at(r, c));
      mean += m.at(r, c);
    }
    if (lo == hi) {
      for (std::size_t r = 0; r < m.rows(); ++r) m.at(r, c) = 0.0;
      m.live[c] = false;
      continue;
    }
    mean /= n;
    double var = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) var += (m.at(r, c) - mean) * (m.at(r, c) - mean);
    const double sd = std::sqrt(var / n);
    for (std::size_t r = 0; r < m.rows(); ++r) m.at(r, c) = (m.at(r, c) - mean) / sd;
  }
  return m;
}

/// Sum of squared coordinate differences between every pair of rows.
inline SquareMatrix pairwise_sq_distance(const PeriodMatrix& m) {
  SquareMatrix d(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.rows(); ++j) {
      double sum = 0.0;
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (!m.live[c]) continue;
        const double diff = m.at(i, c) - m.at(j, c);
        sum += diff * diff;
      }
      d(i, j) = sum;
      d(j, i) = sum;
    }
  }
  return d;
}

struct RedundancyMatrix {
  std::vector<std::string> vp_ids;  // sorted
  SquareMatrix scores;              // 1 on the diagonal
  SquareMatrix raw_mean_distances;  // 0 on the diagonal

  std::size_t size() const { return vp_ids.size(); }

  std::size_t index_of(const std::string& vp) const {
    auto it = std::lower_bound(vp_ids.begin(), vp_ids.end(), vp);
    if (it == vp_ids.end() || *it != vp) throw Error("unknown VP " + vp);
    return static_cast<std::size_t>(it - vp_ids.begin());
  }

  double score(const std::string& a, const std::string& b) const { return scores(index_of(a), index_of(b)); }
};

/// Averages per-period distances and min-max scales the off-diagonal means.
inline RedundancyMatrix redundancy_scores(std::vector<std::string> vp_ids,
                                          std::span<const SquareMatrix> distances) {
  const std::size_t n = vp_ids.size();
  if (n < 2) throw Error("redundancy: need at least two VPs");
  if (distances.empty()) throw Error("redundancy: no period distance matrices");
  RedundancyMatrix r;
  r.vp_ids = std::move(vp_ids);
  r.raw_mean_distances = SquareMatrix(n);
  for (const auto& d : distances) {
    if (d.n != n) throw Error("redundancy: period matrices disagree on the VP set");
    for (std::size_t k = 0; k < d.data.size(); ++k) r.raw_mean_distances.data[k] += d.data[k];
  }
  const double periods = static_cast<double>(distances.size());
  for (auto& x : r.raw_mean_distances.data) x /= periods;

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      lo = std::min(lo, r.raw_mean_distances(i, j));
      hi = std::max(hi, r.raw_mean_distances(i, j));
    }
  }
  if (!(hi > lo)) throw Error("redundancy: degenerate score spread (all pair distances equal)");
  r.scores = SquareMatrix(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) r.scores(i, j) = 1.0 - (r.raw_mean_distances(i, j) - lo) / (hi - lo);
    }
  }
  return r;
}

/// Per-(VP, period, slot) feature vectors for a whole event set.
using FeatureTable = std::map<std::tuple<std::string, std::size_t, std::size_t>, FeatureVector>;

/// Feature vectors of every event in `set` as seen by each VP: the VP's
/// graph once all of its updates up to the event's first_seen time are
/// applied. VPs are processed independently on up to `jobs` threads.
inline FeatureTable compute_feature_table(const EventSet& set, std::span<const BgpUpdate> updates,
                                          const std::map<std::string, RibTable>& snapshots,
                                          std::vector<std::string> vps, unsigned jobs = 1) {
  if (!is_sorted_stream(updates)) throw Error("features: update stream is not sorted by timestamp");
  std::sort(vps.begin(), vps.end());
  std::map<std::string, std::vector<const BgpUpdate*>> per_vp;
  for (const auto& vp : vps) per_vp[vp];
  for (const auto& u : updates) {
    if (auto it = per_vp.find(u.vp_id); it != per_vp.end()) it->second.push_back(&u);
  }
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (const auto& [key, _] : set.events) order.push_back(key);
  std::stable_sort(order.begin(), order.end(), [&](const auto& x, const auto& y) {
    return set.events.at(x).first_seen < set.events.at(y).first_seen;
  });

  std::vector<FeatureTable> partial(vps.size());
  auto work = [&](std::size_t i) {
    const auto& vp = vps[i];
    auto snap = snapshots.find(vp);
    VpState state(snap != snapshots.end() ? snap->second : RibTable{vp, 0, {}});
    const Timestamp as_of = snap != snapshots.end() ? snap->second.as_of : std::numeric_limits<Timestamp>::min();
    const auto& mine = per_vp.at(vp);
    std::size_t next = 0;
    for (const auto& key : order) {
      const auto& e = set.events.at(key);
      for (; next < mine.size() && mine[next]->timestamp <= e.first_seen; ++next) {
        if (mine[next]->timestamp > as_of) state.apply(*mine[next]);
      }
      partial[i][{vp, key.first, key.second}] = event_feature_vector(state.graph(), e.link);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(vps.size(), 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < vps.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = cursor++; i < vps.size(); i = cursor++) work(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  FeatureTable table;
  for (auto& p : partial) table.merge(p);
  return table;
}

/// `vp_id,period,slot,<15 feature columns>`.
inline void write_feature_table(std::ostream& os, const FeatureTable& table) {
  os << "vp_id,period,slot";
  for (const auto& n : feature_names()) os << ',' << n;
  os << '\n';
  for (const auto& [key, v] : table) {
    const auto& [vp, period, slot] = key;
    os << vp << ',' << period << ',' << slot;
    for (double x : v.values) os << ',' << detail::format_double(x);
    os << '\n';
  }
}

inline FeatureTable read_feature_table(const std::string& path) {
  FeatureTable table;
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    line = detail::trim(line);
    if (line.empty() || no == 1) return;
    auto f = detail::split(line, ',');
    std::size_t period = 0, slot = 0;
    FeatureVector v;
    bool ok = f.size() == 3 + kFeatureDim && detail::parse_number(f[1], period) && detail::parse_number(f[2], slot);
    for (std::size_t i = 0; ok && i < kFeatureDim; ++i) ok = detail::parse_number(f[3 + i], v.values[i]);
    if (!ok) throw Error(path + ": " + ParseError(no, "record", "expected vp_id,period,slot and 15 features").what());
    table[{std::string(f[0]), period, slot}] = v;
  });
  return table;
}

/// Steps 1-4 over every period that has at least one event.
inline RedundancyMatrix score_feature_table(const FeatureTable& table, std::size_t slots = kCategoryPairs,
                                            FeatureMask disabled = {}) {
  std::map<std::size_t, std::map<std::pair<std::string, std::size_t>, FeatureVector>> by_period;
  std::set<std::string> vps;
  for (const auto& [key, v] : table) {
    const auto& [vp, period, slot] = key;
    by_period[period][{vp, slot}] = v;
    vps.insert(vp);
  }
  std::vector<SquareMatrix> distances;
  for (const auto& [period, vectors] : by_period) {
    auto m = assemble_period_matrix(vectors, period, slots, disabled);
    if (m.vp_ids.size() != vps.size()) {
      throw Error("score: period " + std::to_string(period) + " lacks vectors for some VPs");
    }
    distances.push_back(pairwise_sq_distance(standard_scale(std::move(m))));
  }
  return redundancy_scores({vps.begin(), vps.end()}, distances);
}

/// `vp_a,vp_b,score,raw_mean_distance` for every unordered pair.
inline void write_scores_csv(std::ostream& os, const RedundancyMatrix& r) {
  os << "vp_a,vp_b,score,raw_mean_distance\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size(); ++j) {
      os << r.vp_ids[i] << ',' << r.vp_ids[j] << ',' << detail::format_double(r.scores(i, j)) << ','
         << detail::format_double(r.raw_mean_distances(i, j)) << '\n';
    }
  }
}

inline RedundancyMatrix read_scores_csv(const std::string& path) {
  struct Row {
    std::string a, b;
    double score, dist;
  };
  std::vector<Row> rows;
  std::set<std::string> vps;
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    line = detail::trim(line);
    if (line.empty() || no == 1) return;
    auto f = detail::split(line, ',');
    Row r{};
    if (f.size() != 4 || !detail::parse_number(f[2], r.score) || !detail::parse_number(f[3], r.dist)) {
      throw Error(path + ": " + ParseError(no, "record", "expected vp_a,vp_b,score,raw_mean_distance").what());
    }
    r.a = std::string(f[0]);
    r.b = std::string(f[1]);
    vps.insert(r.a);
    vps.insert(r.b);
    rows.push_back(std::move(r));
  });
  RedundancyMatrix m;
  m.vp_ids.assign(vps.begin(), vps.end());
  m.scores = SquareMatrix(m.size(), 1.0);
  m.raw_mean_distances = SquareMatrix(m.size(), 0.0);
  if (rows.size() != m.size() * (m.size() - 1) / 2) throw Error(path + ": score table is not complete");
  for (const auto& r : rows) {
    auto i = m.index_of(r.a), j = m.index_of(r.b);
    m.scores(i, j) = m.scores(j, i) = r.score;
    m.raw_mean_distances(i, j) = m.raw_mean_distances(j, i) = r.dist;
  }
  return m;
}

}  // namespace vpred
