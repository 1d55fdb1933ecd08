// Acceptance checks, one PASS/FAIL line per criterion. Exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <spdlog/spdlog.h>

#include "helpers.hpp"
#include "oracle.hpp"
#include "vpred/evaldefs.hpp"
#include "vpred/minimet.hpp"
#include "vpred/redundancy.hpp"
#include "vpred/selection.hpp"

using namespace vpred;
using namespace vpred::testing;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Shared between criteria 1 and 2.
struct MiniInternetRun {
  std::vector<double> random_p2p, distance_p2p, greedy_p2p;
  std::vector<double> mean_degree;
  std::vector<Coverage> full;
  double seconds = 0.0;
};

MiniInternetRun run_mini_internet() {
  MiniInternetRun r;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto topo = generate_topology(kDefaultAsCount, kDefaultAvgDegree, kDefaultExponent, seed);
    auto obs = observe(topo, propagate_routes(topo));
    r.mean_degree.push_back(topo.mean_degree());
    r.random_p2p.push_back(deploy_and_measure(topo, obs, DeployStrategy::random, 20, seed).p2p);
    r.distance_p2p.push_back(deploy_and_measure(topo, obs, DeployStrategy::distance_based, 20, seed).p2p);
    r.greedy_p2p.push_back(deploy_and_measure(topo, obs, DeployStrategy::greedy_specific, 20, seed).p2p);
    auto order = deployment_order(topo, obs, DeployStrategy::random, seed);
    std::size_t ks[] = {topo.n};
    r.full.push_back(coverage_curve(obs, order, ks).front());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Verdict criterion1(const MiniInternetRun& r) {
  Verdict v;
  const double rnd = median(r.random_p2p), dist = median(r.distance_p2p), greedy = median(r.greedy_p2p);
  for (double d : r.mean_degree) v.check(std::abs(d - kDefaultAvgDegree) <= 0.1 * kDefaultAvgDegree, "mean degree");
  v.check(greedy >= 2.5 * rnd, "greedy >= 2.5x random");
  v.check(dist <= rnd, "distance <= random");
  v.check(r.seconds <= 600.0, "runtime <= 10 min");
  v.detail << " median p2p coverage at k=20: random " << rnd << ", distance " << dist << ", greedy " << greedy
           << " (ratio " << greedy / rnd << "); " << r.seconds << " s";
  return v;
}

Verdict criterion2(const MiniInternetRun& r) {
  Verdict v;
  std::size_t ok = 0;
  for (const auto& c : r.full) ok += c.p2p == 1.0 && c.c2p == 1.0;
  v.check(ok == r.full.size(), "k=n coverage");
  v.detail << " " << ok << "/" << r.full.size() << " seeds fully covered at k=n";
  return v;
}

Verdict criterion3() {
  Verdict v;
  std::size_t events_total = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto topo = generate_topology(120, kDefaultAvgDegree, kDefaultExponent, 100 + seed);
    auto rng = rng_stream(seed, "acceptance/vps");
    std::vector<Asn> all(topo.n);
    std::iota(all.begin(), all.end(), Asn{1});
    std::shuffle(all.begin(), all.end(), rng);
    ChurnOptions opt;
    opt.vps.assign(all.begin(), all.begin() + 9);
    opt.changes = 400;
    opt.duration = 12 * 3600;
    opt.seed = seed;
    auto arch = simulate_churn(topo, opt);

    const std::string orig = vp_name(opt.vps.front()), clone = orig + "-clone";
    auto snap = arch.snapshots.at(orig);
    snap.vp_id = clone;
    arch.snapshots.emplace(clone, snap);
    std::vector<BgpUpdate> copies;
    for (const auto& u : arch.updates) {
      if (u.vp_id != orig) continue;
      copies.push_back(u);
      copies.back().vp_id = clone;
    }
    arch.updates.insert(arch.updates.end(), copies.begin(), copies.end());
    sort_stream(arch.updates);
    std::vector<std::string> vps;
    for (const auto& [vp, _] : arch.snapshots) vps.push_back(vp);

    std::set<Asn> hypergiants;
    for (Asn a : all)
      if (hypergiants.size() < 3 && topo.tiers[a] > 2) hypergiants.insert(a);
    AsClassifier classifier(to_relationships(topo), topo.tier1(), hypergiants);
    auto candidates = detect_candidates(arch.updates, arch.snapshots, vps.size());
    assign_categories(candidates, classifier);
    const Timeframe tf{opt.start, opt.start + opt.duration + 3600};
    auto set = balanced_sample(candidates, tf, SamplingOptions{20, kCategoryPairs, 10, seed});
    events_total += set.size();
    if (set.size() == 0) {
      v.check(false, "no sampled events for seed " + std::to_string(seed));
      continue;
    }
    auto table = compute_feature_table(set, arch.updates, arch.snapshots, vps, 1);
    auto r = score_feature_table(table);
    const auto i = r.index_of(orig), j = r.index_of(clone);
    v.check(r.raw_mean_distances(i, j) <= 1e-9, "clone distance 0");
    v.check(std::abs(r.scores(i, j) - 1.0) <= 1e-9, "clone score 1");

    auto windows = daily_volume_windows(tf, seed);
    auto volumes = estimate_volumes(arch.updates, r.vp_ids, windows);
    auto sel = greedy_select(r, volumes, 0.25, std::numeric_limits<double>::infinity());
    std::size_t distinct_before_second = 0, clones_seen = 0;
    for (const auto& vp : sel.vp_ids) {
      if (vp == orig || vp == clone) {
        if (++clones_seen == 2) break;
      } else {
        ++distinct_before_second;
      }
    }
    v.check(distinct_before_second == 8, "second clone picked before all 8 distinct VPs (seed " +
                                             std::to_string(seed) + ")");
  }
  v.detail << " 5 synthetic archives of 10 VPs, " << events_total << " sampled events in total";
  return v;
}

Verdict criterion4() {
  Verdict v;
  std::mt19937_64 rng(44);
  std::size_t compared = 0, mismatches = 0;
  std::array<bool, kFeatureDim> changed{};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    auto g = random_graph(rng, n, 0.05 + 0.4 * std::uniform_real_distribution<>(0, 1)(rng), 9);
    auto big = g;
    for (auto& [_, nbrs] : big.adjacency)
      for (auto& [__, w] : nbrs) w *= 7;
    std::vector<Link> links;
    for (const auto& [l, _] : g.edges()) {
      links.push_back(l);
      break;
    }
    for (int k = 0; k < 4; ++k) {
      Asn a = static_cast<Asn>(1 + rng() % n), b = static_cast<Asn>(1 + rng() % n);
      if (a != b) links.emplace_back(a, b);
    }
    for (const auto& l : links) {
      auto got = event_feature_vector(g, l).values;
      auto want = oracle_features(g, l.a, l.b);
      for (std::size_t i = 0; i < kFeatureDim; ++i) {
        ++compared;
        mismatches += !close_rel(got[i], want[i]);
      }
      auto scaled = event_feature_vector(big, l).values;
      for (std::size_t i = 0; i < kFeatureDim; ++i) changed[i] = changed[i] || !close_rel(got[i], scaled[i], 1e-12);
    }
  }
  std::set<std::size_t> changed_features;
  for (std::size_t i = 0; i < kFeatureDim; ++i)
    if (changed[i]) changed_features.insert(feature_of_position(i));
  v.check(mismatches == 0, "oracle agreement");
  v.check(changed_features == std::set<std::size_t>{0, 1, 2, 3, 5}, "weighted feature set under scaling");
  v.detail << " " << compared - mismatches << "/" << compared << " feature values match; changed under x7:";
  for (auto f : changed_features) v.detail << ' ' << f;
  return v;
}

Verdict criterion5() {
  Verdict v;
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-10.0, 100.0);
  std::size_t matrices = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t vps = 3 + rng() % 12, periods = 1 + rng() % 5;
    std::vector<SquareMatrix> ds;
    std::vector<std::string> ids;
    for (std::size_t p = 0; p < periods; ++p) {
      std::map<std::pair<std::string, std::size_t>, FeatureVector> vecs;
      for (std::size_t r = 0; r < vps; ++r) {
        for (std::size_t s = 0; s < 15; s += 1 + rng() % 3) {
          FeatureVector f;
          for (std::size_t i = 0; i < kFeatureDim; ++i) f.values[i] = i % 5 == 4 ? 1.0 : u(rng);
          vecs[{"vp" + std::to_string(r), s}] = f;
        }
      }
      // make every VP share the slot set of vp0
      std::set<std::size_t> slots;
      for (const auto& [key, _] : vecs)
        if (key.first == "vp0") slots.insert(key.second);
      std::erase_if(vecs, [&](const auto& kv) { return !slots.contains(kv.first.second); });
      for (std::size_t r = 0; r < vps; ++r)
        for (auto s : slots)
          if (!vecs.contains({"vp" + std::to_string(r), s})) {
            FeatureVector f;
            for (std::size_t i = 0; i < kFeatureDim; ++i) f.values[i] = i % 5 == 4 ? 1.0 : u(rng);
            vecs[{"vp" + std::to_string(r), s}] = f;
          }
      auto m = standard_scale(assemble_period_matrix(vecs, p));
      ++matrices;
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (!m.live[c]) continue;
        double mean = 0, sq = 0;
        for (std::size_t r = 0; r < m.rows(); ++r) mean += m.at(r, c);
        mean /= static_cast<double>(m.rows());
        for (std::size_t r = 0; r < m.rows(); ++r) sq += (m.at(r, c) - mean) * (m.at(r, c) - mean);
        const double sd = std::sqrt(sq / static_cast<double>(m.rows()));
        if (std::abs(mean) >= 1e-9 || std::abs(sd - 1.0) >= 1e-9) v.check(false, "scaled column moments");
      }
      ids = m.vp_ids;
      ds.push_back(pairwise_sq_distance(m));
    }
    auto r = redundancy_scores(ids, ds);
    double lo = 2.0, hi = -1.0;
    for (std::size_t i = 0; i < vps; ++i) {
      for (std::size_t j = 0; j < vps; ++j) {
        const double s = r.scores(i, j);
        if (s < 0.0 || s > 1.0) v.check(false, "score range");
        if (s != r.scores(j, i)) v.check(false, "symmetry");
        if (i != j) {
          lo = std::min(lo, s);
          hi = std::max(hi, s);
        }
      }
    }
    if (lo != 0.0 || hi != 1.0) v.check(false, "off-diagonal extremes");
  }
  v.detail << " " << matrices << " period matrices, 100 score matrices";
  return v;
}

Verdict criterion6() {
  Verdict v;
  std::mt19937_64 rng(66);
  const RedundancyDefinition d1{1, kConvergenceWindow}, d2{2, kConvergenceWindow}, d3{3, kConvergenceWindow};
  std::size_t violations = 0, asymmetric = 0, r1n = 0, r2n = 0, r3n = 0;
  for (int i = 0; i < 10000; ++i) {
    auto x = random_update_with_prior(rng, "v1");
    auto y = random_update_with_prior(rng, "v2");
    const bool r1 = is_redundant(d1, x.update, y.update, x.prior, y.prior);
    const bool r2 = is_redundant(d2, x.update, y.update, x.prior, y.prior);
    const bool r3 = is_redundant(d3, x.update, y.update, x.prior, y.prior);
    violations += (r3 && !r2) || (r2 && !r1);
    asymmetric += r2 != is_redundant(d2, y.update, x.update, y.prior, x.prior);
    r1n += r1;
    r2n += r2;
    r3n += r3;
  }
  v.check(violations == 0, "nesting");
  v.check(asymmetric > 0, "Def2 asymmetry witness");
  v.detail << " 10000 pairs: def1 " << r1n << ", def2 " << r2n << ", def3 " << r3n << ", violations " << violations
           << ", asymmetric def2 pairs " << asymmetric;
  return v;
}

Verdict criterion7() {
  Verdict v;
  const Timestamp span = 20 * 600 * 4;
  auto pool = full_pool(span, 90);
  auto set = balanced_sample(pool, {0, span}, SamplingOptions{20, kCategoryPairs, 10, 7});
  std::size_t full = 0;
  for (std::size_t p = 0; p < set.period_count(); ++p) {
    if (!set.period_full(p)) continue;
    ++full;
    std::array<int, kCategoryPairs> per_pair{};
    for (std::size_t s = 0; s < kCategoryPairs; ++s) ++per_pair[set.events.at({p, s}).category_pair.index()];
    for (int c : per_pair) v.check(c == 1, "one event per pair in period " + std::to_string(p));
  }
  v.check(set.size() == 20 * kCategoryPairs, "total = P x 15");
  v.detail << " P=20: " << full << " full periods, " << set.size() << " events";
  return v;
}

Verdict criterion8() {
  Verdict v;
  std::mt19937_64 rng(88);
  std::size_t cases = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng() % 25;
    std::vector<SquareMatrix> ds{SquareMatrix(n)};
    std::vector<std::string> ids;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
      ids.push_back("vp" + std::to_string(100 + i));
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) ds[0](i, j) = std::hypot(x[i] - x[j], y[i] - y[j]);
    auto r = redundancy_scores(ids, ds);
    VolumeProfile vol;
    double total = 0.0;
    for (const auto& id : ids) total += vol.per_vp[id] = static_cast<double>(1 + rng() % 500);
    const double alpha = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    double b1 = std::uniform_real_distribution<double>(500.0, total)(rng);
    double b2 = std::uniform_real_distribution<double>(b1, total * 1.5)(rng);
    if (b1 == b2) continue;
    auto s1 = greedy_select(r, vol, alpha, b1);
    auto s2 = greedy_select(r, vol, alpha, b2);
    ++cases;
    bool prefix = s1.size() <= s2.size() && std::equal(s1.vp_ids.begin(), s1.vp_ids.end(), s2.vp_ids.begin());
    v.check(prefix, "prefix property (trial " + std::to_string(trial) + ")");
    v.check(s1.cumulative_volume.back() <= b1, "final volume within budget");

    UseCaseEvents ev;
    for (int e = 0; e < 20; ++e) {
      ObjectiveEvent oe;
      oe.key = std::to_string(e);
      for (const auto& id : ids)
        if (rng() % 4 == 0) oe.tokens_by_vp[id].insert("t");
      if (!oe.tokens_by_vp.empty()) ev.events.push_back(oe);
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& id : ids) counts[id] = static_cast<std::size_t>(vol.per_vp[id]);
    auto order = greedy_select(r, vol, alpha, std::numeric_limits<double>::infinity()).vp_ids;
    for (double target : {0.5, 0.7, 0.9, 1.0}) {
      v.check(reduction_factor(ev, target, order, order, counts) == 1.0, "self reduction factor");
    }
  }
  v.detail << " " << cases << " budget pairs; self reduction factor at 4 targets each";
  return v;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  bool all = true;
  auto report = [&](int id, const std::string& name, const std::function<Verdict()>& fn) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " exception: " << e.what();
    }
    all = all && v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "):" << v.detail.str()
              << std::endl;
  };
  MiniInternetRun mini;
  bool mini_ok = true;
  try {
    mini = run_mini_internet();
  } catch (const std::exception& e) {
    mini_ok = false;
    std::cout << "mini-internet run failed: " << e.what() << std::endl;
  }
  report(1, "mini-internet ordering", [&] {
    if (!mini_ok) throw Error("no mini-internet results");
    return criterion1(mini);
  });
  report(2, "full-deployment completeness", [&] {
    if (!mini_ok) throw Error("no mini-internet results");
    return criterion2(mini);
  });
  report(3, "end-to-end clone discrimination", criterion3);
  report(4, "feature oracle suite", criterion4);
  report(5, "pipeline invariants", criterion5);
  report(6, "definition nesting", criterion6);
  report(7, "balanced sampler", criterion7);
  report(8, "selection prefix and budget", criterion8);
  return all ? 0 : 1;
}
