#include <gtest/gtest.h>

#include <atomic>
#include <random>

#include "support/oracles.hpp"
#include "viewpoint/clustering.hpp"

using namespace viewpoint;
using Rows = std::vector<std::vector<double>>;
using Members = std::vector<std::vector<std::size_t>>;

namespace {

Rows constant(std::size_t n, double v)
{
    Rows d(n, std::vector<double>(n, v));
    for (std::size_t i = 0; i < n; ++i) {
        d[i][i] = 0.0;
    }
    return d;
}

Members members(const std::vector<PerspectiveCluster>& clusters)
{
    Members out;
    for (const auto& c : clusters) {
        out.push_back(c.member_indices);
    }
    return out;
}

/// Counts equivalence calls; equal texts score 1, all else 0.
class CountingScorer final : public Scorer {
  public:
    mutable std::atomic<int> calls{0};
    std::string_view name() const noexcept override { return "counting"; }

  protected:
    double do_relevance(std::string_view, std::string_view) const override { return 0.0; }
    double do_stance(std::string_view, std::string_view) const override { return 0.0; }
    double do_equivalence(std::string_view, std::string_view a, std::string_view b) const override
    {
        ++calls;
        return a == b ? 1.0 : 0.0;
    }
    double do_evidence(std::string_view, std::string_view, std::string_view) const override { return 0.0; }
};

}  // namespace

TEST(DistanceMatrix, IdenticalPerspectivesAreDistanceZero)
{
    BaselineScorer s(std::make_shared<const InvertedIndex>());
    std::vector<std::string> ps = {"zoos protect species", "zoos protect species"};
    auto d = build_distance_matrix("claim", ps, s);
    EXPECT_EQ(d(0, 1), 0.0);
    EXPECT_EQ(d(1, 0), 0.0);
}

TEST(DistanceMatrix, DisjointPerspectivesAreDistanceOne)
{
    BaselineScorer s(std::make_shared<const InvertedIndex>());
    std::vector<std::string> ps = {"zoos protect species", "cages harm animals"};
    EXPECT_EQ(build_distance_matrix("claim", ps, s)(0, 1), 1.0);
}

TEST(DistanceMatrix, ScoresEachUnorderedPairOnce)
{
    CountingScorer s;
    std::vector<std::string> three = {"a", "b", "c"};
    build_distance_matrix("claim", three, s);
    EXPECT_EQ(s.calls.load(), 3);
    s.calls = 0;
    std::vector<std::string> many(12, "x");
    auto d = build_distance_matrix("claim", many, s, 4);
    EXPECT_EQ(s.calls.load(), 66);
    d.validate();
}

TEST(DistanceMatrix, RejectsInvalidMatrices)
{
    EXPECT_THROW(DistanceMatrix::from_rows({{0, 0.5}, {0.4, 0}}), Error);
    EXPECT_THROW(DistanceMatrix::from_rows({{0, 1.5}, {1.5, 0}}), Error);
    EXPECT_THROW(DistanceMatrix::from_rows({{0.1, 0}, {0, 0}}), Error);
    EXPECT_THROW(DistanceMatrix::from_rows({{0, 0}}), Error);
    DistanceMatrix m(2);
    EXPECT_THROW(m.set(0, 0, 0.5), Error);
    EXPECT_THROW(m.set(0, 1, -0.1), Error);
}

TEST(Dbscan, FullyConnectedIsOneCluster)
{
    auto c = dbscan(DistanceMatrix::from_rows(constant(4, 0.0)), 0.3, 2);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].member_indices, (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_FALSE(c[0].is_noise_singleton);
}

TEST(Dbscan, NoNeighborsIsAllNoise)
{
    auto c = dbscan(DistanceMatrix::from_rows(constant(4, 1.0)), 0.3, 2);
    ASSERT_EQ(c.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(c[i].member_indices, (std::vector<std::size_t>{i}));
        EXPECT_TRUE(c[i].is_noise_singleton);
    }
}

TEST(Dbscan, ChainOfThreeAndTwoNoisePoints)
{
    auto rows = constant(5, 0.9);
    rows[0][1] = rows[1][0] = 0.2;
    rows[1][2] = rows[2][1] = 0.2;
    auto c = dbscan(DistanceMatrix::from_rows(rows), 0.25, 2);
    EXPECT_EQ(members(c), (Members{{0, 1, 2}, {3}, {4}}));
    EXPECT_EQ(oracle::to_partition(c), oracle::naive_dbscan(rows, 0.25, 2));
    EXPECT_FALSE(c[0].is_noise_singleton);
    EXPECT_TRUE(c[1].is_noise_singleton);
}

TEST(Dbscan, BorderPointJoinsLowestSeedCluster)
{
    // Two dense groups {0..3} and {5..8}; point 4 is within eps of 3 and 5 but
    // has only three neighbors (self included), so it is a border point.
    Rows rows = constant(9, 1.0);
    auto link = [&](std::size_t i, std::size_t j) { rows[i][j] = rows[j][i] = 0.1; };
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            link(i, j);
            link(i + 5, j + 5);
        }
    }
    link(3, 4);
    link(4, 5);
    auto c = dbscan(DistanceMatrix::from_rows(rows), 0.1, 4);
    EXPECT_EQ(members(c), (Members{{0, 1, 2, 3, 4}, {5, 6, 7, 8}}));
    EXPECT_EQ(oracle::to_partition(c), oracle::naive_dbscan(rows, 0.1, 4));
}

TEST(Dbscan, EpsBoundaryIsInclusive)
{
    Rows rows = {{0, 0.3}, {0.3, 0}};
    EXPECT_EQ(dbscan(DistanceMatrix::from_rows(rows), 0.3, 2).size(), 1u);
    EXPECT_EQ(dbscan(DistanceMatrix::from_rows(rows), 0.29, 2).size(), 2u);
}

TEST(Dbscan, MinPtsOneMakesEveryPointCore)
{
    auto c = dbscan(DistanceMatrix::from_rows(constant(3, 1.0)), 0.5, 1);
    ASSERT_EQ(c.size(), 3u);
    for (const auto& k : c) {
        EXPECT_FALSE(k.is_noise_singleton);
    }
}

TEST(Dbscan, EmptyInputAndBadParameters)
{
    EXPECT_TRUE(dbscan(DistanceMatrix(0), 0.5, 2).empty());
    EXPECT_THROW(dbscan(DistanceMatrix(2), 1.5, 2), Error);
    EXPECT_THROW(dbscan(DistanceMatrix(2), -0.1, 2), Error);
    EXPECT_THROW(dbscan(DistanceMatrix(2), 0.5, 0), Error);
}

TEST(DbscanProperty, MatchesNaiveReference)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> n_dist(0, 30);
    std::uniform_int_distribution<std::size_t> pts(1, 4);
    std::uniform_int_distribution<int> eps_grid(0, 10);
    for (int round = 0; round < 200; ++round) {
        auto rows = oracle::random_distances(rng, n_dist(rng));
        double eps = eps_grid(rng) / 10.0;
        auto min_pts = pts(rng);
        auto got = dbscan(DistanceMatrix::from_rows(rows), eps, min_pts);
        EXPECT_EQ(oracle::to_partition(got), oracle::naive_dbscan(rows, eps, min_pts))
            << "round " << round << " eps " << eps << " min_pts " << min_pts;
    }
}

TEST(DbscanProperty, OutputIsAPartition)
{
    std::mt19937_64 rng(12);
    for (int round = 0; round < 100; ++round) {
        auto n = 1 + rng() % 25;
        auto rows = oracle::random_distances(rng, n);
        auto c = dbscan(DistanceMatrix::from_rows(rows), 0.35, 2);
        std::vector<int> seen(n, 0);
        for (const auto& k : c) {
            EXPECT_TRUE(std::is_sorted(k.member_indices.begin(), k.member_indices.end()));
            if (k.is_noise_singleton) {
                EXPECT_EQ(k.member_indices.size(), 1u);
            }
            for (auto i : k.member_indices) {
                ++seen[i];
            }
        }
        EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
    }
}

TEST(DbscanProperty, SeparatedGroupsAreRecovered)
{
    // Gold-style 0/1 distances: any eps in (0, 1) recovers the groups exactly.
    std::vector<int> group = {0, 0, 1, 2, 1, 0, 2, 3};
    Rows rows(group.size(), std::vector<double>(group.size()));
    for (std::size_t i = 0; i < group.size(); ++i) {
        for (std::size_t j = 0; j < group.size(); ++j) {
            rows[i][j] = (i == j || group[i] == group[j]) ? 0.0 : 1.0;
        }
    }
    for (double eps : {0.01, 0.5, 0.99}) {
        auto c = dbscan(DistanceMatrix::from_rows(rows), eps, 2);
        EXPECT_EQ(members(c), (Members{{0, 1, 5}, {2, 4}, {3, 6}, {7}}));
    }
}

TEST(SelectRepresentative, Examples)
{
    std::vector<double> rel = {0.4, 0.9, 0.7};
    EXPECT_EQ(select_representative({{2}, 2, true}, rel), 2u);
    EXPECT_EQ(select_representative({{0, 1, 2}, 0, false}, rel), 1u);
    std::vector<double> tie = {0.8, 0.8};
    EXPECT_EQ(select_representative({{0, 1}, 0, false}, tie), 0u);
    EXPECT_THROW(select_representative({{}, 0, false}, tie), Error);
    EXPECT_THROW(select_representative({{5}, 5, false}, tie), Error);
}
