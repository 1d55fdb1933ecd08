#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "vpred/redundancy.hpp"

using namespace vpred;
using namespace vpred::testing;

namespace {

std::map<std::pair<std::string, std::size_t>, FeatureVector> random_vectors(std::mt19937_64& rng, std::size_t vps,
                                                                             std::size_t slots) {
  std::uniform_real_distribution<double> u(-5.0, 50.0);
  std::map<std::pair<std::string, std::size_t>, FeatureVector> out;
  for (std::size_t v = 0; v < vps; ++v) {
    for (std::size_t s = 0; s < slots; ++s) {
      FeatureVector f;
      for (std::size_t i = 0; i < kFeatureDim; ++i) f.values[i] = i == 8 ? 3.0 : u(rng);
      out[{"vp" + std::to_string(v), s}] = f;
    }
  }
  return out;
}

}  // namespace

TEST(Assemble, UnfilledSlotsAndMaskedFeaturesAreDead) {
  std::map<std::pair<std::string, std::size_t>, FeatureVector> vecs;
  FeatureVector f;
  f.values.fill(1.0);
  vecs[{"a", 2}] = f;
  vecs[{"b", 2}] = f;
  FeatureMask off;
  off.set(6);  // jaccard
  auto m = assemble_period_matrix(vecs, 0, kCategoryPairs, off);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), kCategoryPairs * kFeatureDim);
  EXPECT_EQ(m.live_count(), kFeatureDim - 1);
  EXPECT_FALSE(m.live[2 * kFeatureDim + 12]);
  EXPECT_TRUE(m.live[2 * kFeatureDim + 0]);
  EXPECT_EQ(feature_of_position(11), 5u);
  EXPECT_EQ(feature_of_position(14), 8u);
  vecs[{"c", 3}] = f;
  EXPECT_THROW(assemble_period_matrix(vecs, 0), Error);
}

TEST(StandardScale, LiveColumnsHaveZeroMeanUnitSd) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t vps = 2 + rng() % 12;
    auto m = standard_scale(assemble_period_matrix(random_vectors(rng, vps, 1 + rng() % 15), 0));
    for (std::size_t c = 0; c < m.cols(); ++c) {
      double mean = 0, sq = 0;
      for (std::size_t r = 0; r < m.rows(); ++r) mean += m.at(r, c);
      mean /= static_cast<double>(m.rows());
      for (std::size_t r = 0; r < m.rows(); ++r) sq += (m.at(r, c) - mean) * (m.at(r, c) - mean);
      const double sd = std::sqrt(sq / static_cast<double>(m.rows()));
      if (m.live[c]) {
        EXPECT_LT(std::fabs(mean), 1e-9);
        EXPECT_LT(std::fabs(sd - 1.0), 1e-9);
      } else {
        for (std::size_t r = 0; r < m.rows(); ++r) EXPECT_EQ(m.at(r, c), 0.0);
      }
      if (c % kFeatureDim == 8) {
        EXPECT_FALSE(m.live[c]);
      }
    }
  }
  PeriodMatrix one;
  one.vp_ids = {"a"};
  EXPECT_THROW(standard_scale(one), Error);
}

TEST(Scores, RangeSymmetryAndExtremes) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t vps = 3 + rng() % 10;
    std::vector<SquareMatrix> ds;
    std::vector<std::string> ids;
    for (std::size_t p = 0; p < 1 + rng() % 4; ++p) {
      auto m = standard_scale(assemble_period_matrix(random_vectors(rng, vps, 3), p));
      ids = m.vp_ids;
      ds.push_back(pairwise_sq_distance(m));
    }
    auto r = redundancy_scores(ids, ds);
    double lo = 2, hi = -1;
    for (std::size_t i = 0; i < vps; ++i) {
      EXPECT_EQ(r.scores(i, i), 1.0);
      EXPECT_EQ(r.raw_mean_distances(i, i), 0.0);
      for (std::size_t j = 0; j < vps; ++j) {
        EXPECT_EQ(r.scores(i, j), r.scores(j, i));
        EXPECT_GE(r.scores(i, j), 0.0);
        EXPECT_LE(r.scores(i, j), 1.0);
        if (i != j) {
          lo = std::min(lo, r.scores(i, j));
          hi = std::max(hi, r.scores(i, j));
        }
      }
    }
    EXPECT_EQ(lo, 0.0);
    EXPECT_EQ(hi, 1.0);
  }
}

TEST(Scores, ColumnRescalingDoesNotChangeScores) {
  std::mt19937_64 rng(3);
  auto vecs = random_vectors(rng, 6, 4);
  auto base = standard_scale(assemble_period_matrix(vecs, 0));
  for (auto& [_, f] : vecs) {
    f.values[0] = f.values[0] * 1000.0 + 7.0;
    f.values[13] *= 0.001;
  }
  auto moved = standard_scale(assemble_period_matrix(vecs, 0));
  auto d1 = pairwise_sq_distance(base), d2 = pairwise_sq_distance(moved);
  for (std::size_t k = 0; k < d1.data.size(); ++k) EXPECT_NEAR(d1.data[k], d2.data[k], 1e-9 * (1 + d1.data[k]));
}

TEST(Scores, ClonesHaveZeroDistanceAndScoreOne) {
  std::mt19937_64 rng(4);
  auto vecs = random_vectors(rng, 5, 15);
  for (std::size_t s = 0; s < 15; ++s) vecs[{"vp_clone", s}] = vecs.at({"vp2", s});
  auto m = standard_scale(assemble_period_matrix(vecs, 0));
  auto r = redundancy_scores(m.vp_ids, std::vector<SquareMatrix>{pairwise_sq_distance(m)});
  EXPECT_EQ(r.raw_mean_distances(r.index_of("vp2"), r.index_of("vp_clone")), 0.0);
  EXPECT_EQ(r.score("vp2", "vp_clone"), 1.0);
  EXPECT_THROW(r.index_of("nope"), Error);
}

TEST(Scores, Errors) {
  EXPECT_THROW(redundancy_scores({"a"}, std::vector<SquareMatrix>{SquareMatrix(1)}), Error);
  EXPECT_THROW(redundancy_scores({"a", "b"}, std::vector<SquareMatrix>{}), Error);
  EXPECT_THROW(redundancy_scores({"a", "b", "c"}, std::vector<SquareMatrix>{SquareMatrix(2)}), Error);
  SquareMatrix flat(3, 1.0);
  EXPECT_THROW(redundancy_scores({"a", "b", "c"}, std::vector<SquareMatrix>{flat}), Error);
}

TEST(FeatureTable, UsesGraphAtFirstSeenAndIsThreadCountIndependent) {
  std::map<std::string, RibTable> snaps;
  for (std::string vp : {"a", "b", "c"}) {
    snaps[vp] = RibTable{vp, 0, {}};
    snaps[vp].routes["p0"] = RibRoute{{1, 2, 3}, {}, 0};
  }
  std::vector<BgpUpdate> ups{announce(10, "a", "p1", {1, 2, 4}), announce(20, "b", "p1", {1, 5, 4}),
                             announce(500, "a", "p2", {1, 6}), announce(900, "c", "p1", {1, 7})};
  EventSet set;
  set.periods = {Period{0, 0}, Period{1, 600}};
  CandidateEvent e1;
  e1.link = Link(1, 2);
  e1.first_seen = 100;
  CandidateEvent e2;
  e2.link = Link(1, 7);
  e2.first_seen = 700;
  set.events[{0, 0}] = e1;
  set.events[{1, 4}] = e2;
  auto t1 = compute_feature_table(set, ups, snaps, {"c", "a", "b"}, 1);
  auto t3 = compute_feature_table(set, ups, snaps, {"a", "b", "c"}, 3);
  EXPECT_EQ(t1, t3);
  ASSERT_EQ(t1.size(), 6u);

  auto graph_at = [&](const std::string& vp, Timestamp t) {
    return build_graph(rib_at(vp, t, snaps.at(vp), ups));
  };
  EXPECT_EQ(t1.at({"a", 0, 0}), event_feature_vector(graph_at("a", 100), Link(1, 2)));
  EXPECT_EQ(t1.at({"b", 0, 0}), event_feature_vector(graph_at("b", 100), Link(1, 2)));
  EXPECT_EQ(t1.at({"c", 1, 4}), event_feature_vector(graph_at("c", 700), Link(1, 7)));
  EXPECT_NE(t1.at({"a", 0, 0}), t1.at({"c", 0, 0}));

  std::ostringstream os;
  write_feature_table(os, t1);
  TempDir dir("ftable");
  write_text(dir / "f.csv", os.str());
  EXPECT_EQ(read_feature_table((dir / "f.csv").string()), t1);
}

TEST(ScoresCsv, RoundTrips) {
  std::mt19937_64 rng(5);
  auto m = standard_scale(assemble_period_matrix(random_vectors(rng, 4, 2), 0));
  auto r = redundancy_scores(m.vp_ids, std::vector<SquareMatrix>{pairwise_sq_distance(m)});
  std::ostringstream os;
  write_scores_csv(os, r);
  TempDir dir("scores");
  write_text(dir / "s.csv", os.str());
  auto back = read_scores_csv((dir / "s.csv").string());
  EXPECT_EQ(back.vp_ids, r.vp_ids);
  EXPECT_EQ(back.scores, r.scores);
  EXPECT_EQ(back.raw_mean_distances, r.raw_mean_distances);
}
