#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "viewpoint/error.hpp"
#include "viewpoint/parallel.hpp"
#include "viewpoint/scorers.hpp"

namespace viewpoint {

/// Symmetric n x n matrix of distances in [0, 1] with a zero diagonal.
class DistanceMatrix {
  public:
    DistanceMatrix() = default;

    explicit DistanceMatrix(std::size_t n) : m_n(n), m_d(n * n, 0.0) {}

    /// Row-major construction; validates symmetry, range and the zero diagonal.
    static DistanceMatrix from_rows(const std::vector<std::vector<double>>& rows)
    {
        DistanceMatrix m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size()) {
                throw Error(ErrorCode::invalid_argument, "distance matrix must be square");
            }
            for (std::size_t j = 0; j < rows.size(); ++j) {
                m.m_d[i * m.m_n + j] = rows[i][j];
            }
        }
        m.validate();
        return m;
    }

    std::size_t size() const noexcept { return m_n; }

    double operator()(std::size_t i, std::size_t j) const { return m_d[i * m_n + j]; }

    /// Sets both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double d)
    {
        if (i == j) {
            throw Error(ErrorCode::invalid_argument, "diagonal of a distance matrix is fixed at 0");
        }
        if (!(d >= 0.0 && d <= 1.0)) {
            throw Error(ErrorCode::invalid_argument, "distance out of [0, 1]");
        }
        m_d[i * m_n + j] = d;
        m_d[j * m_n + i] = d;
    }

    void validate() const
    {
        for (std::size_t i = 0; i < m_n; ++i) {
            if ((*this)(i, i) != 0.0) {
                throw Error(ErrorCode::invalid_argument, "distance matrix diagonal must be 0");
            }
            for (std::size_t j = i + 1; j < m_n; ++j) {
                double d = (*this)(i, j);
                if (d != (*this)(j, i)) {
                    throw Error(ErrorCode::invalid_argument, "distance matrix must be symmetric");
                }
                if (!(d >= 0.0 && d <= 1.0)) {
                    throw Error(ErrorCode::invalid_argument, "distance out of [0, 1]");
                }
            }
        }
    }

  private:
    std::size_t m_n = 0;
    std::vector<double> m_d;
};

struct PerspectiveCluster {
    std::vector<std::size_t> member_indices;  // ascending
    std::size_t representative_index = 0;
    bool is_noise_singleton = false;

    bool operator==(const PerspectiveCluster&) const = default;
};

/// d[i][j] = 1 - equivalence(claim, p_i, p_j). Only the upper triangle is
/// scored, so the scorer sees exactly n(n-1)/2 calls.
inline DistanceMatrix build_distance_matrix(std::string_view claim, std::span<const std::string> perspectives,
                                            const Scorer& scorer, std::size_t workers = 1)
{
    if (perspectives.empty()) {
        throw Error(ErrorCode::invalid_argument, "distance matrix needs at least one perspective");
    }
    const std::size_t n = perspectives.size();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            pairs.emplace_back(i, j);
        }
    }
    std::vector<double> scores(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t k) {
        scores[k] = scorer.equivalence(claim, perspectives[pairs[k].first], perspectives[pairs[k].second]);
    });
    DistanceMatrix m(n);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        m.set(pairs[k].first, pairs[k].second, std::clamp(1.0 - scores[k], 0.0, 1.0));
    }
    return m;
}

/// DBSCAN over a precomputed distance matrix.
///
/// Neighborhoods are closed (d <= eps) and include the point itself. Seeds are
/// visited in ascending index order, so a border point reachable from several
/// clusters joins the one whose seed has the lowest index. Noise points come
/// back as singleton clusters flagged is_noise_singleton. Output clusters are
/// ordered by their smallest member; representative_index defaults to that
/// smallest member.
inline std::vector<PerspectiveCluster> dbscan(const DistanceMatrix& d, double eps, std::size_t min_pts)
{
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "dbscan: eps must be in [0, 1]");
    }
    if (min_pts < 1) {
        throw Error(ErrorCode::invalid_argument, "dbscan: min_pts must be >= 1");
    }
    const std::size_t n = d.size();
    constexpr int unvisited = -2;
    constexpr int noise = -1;
    std::vector<int> label(n, unvisited);

    auto neighbors = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n; ++j) {
            if (d(i, j) <= eps) {
                out.push_back(j);
            }
        }
        return out;
    };

    int next_cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != unvisited) {
            continue;
        }
        auto seeds = neighbors(i);
        if (seeds.size() < min_pts) {
            label[i] = noise;
            continue;
        }
        int cluster = next_cluster++;
        label[i] = cluster;
        std::deque<std::size_t> queue(seeds.begin(), seeds.end());
        while (!queue.empty()) {
            auto j = queue.front();
            queue.pop_front();
            if (label[j] == noise) {
                label[j] = cluster;  // border point
                continue;
            }
            if (label[j] != unvisited) {
                continue;
            }
            label[j] = cluster;
            auto reach = neighbors(j);
            if (reach.size() >= min_pts) {
                queue.insert(queue.end(), reach.begin(), reach.end());
            }
        }
    }

    std::vector<PerspectiveCluster> clusters(static_cast<std::size_t>(next_cluster));
    std::vector<PerspectiveCluster> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == noise) {
            out.push_back({{i}, i, true});
        } else {
            clusters[static_cast<std::size_t>(label[i])].member_indices.push_back(i);
        }
    }
    for (auto& c : clusters) {
        c.representative_index = c.member_indices.front();
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.member_indices.front() < b.member_indices.front(); });
    return out;
}

/// Member with the highest relevance; ties go to the lowest index.
inline std::size_t select_representative(const PerspectiveCluster& cluster, std::span<const double> relevance)
{
    if (cluster.member_indices.empty()) {
        throw Error(ErrorCode::invalid_argument, "empty cluster");
    }
    std::size_t best = cluster.member_indices.front();
    for (auto i : cluster.member_indices) {
        if (i >= relevance.size()) {
            throw Error(ErrorCode::invalid_argument, "relevance scores do not cover cluster members");
        }
        if (relevance[i] > relevance[best] || (relevance[i] == relevance[best] && i < best)) {
            best = i;
        }
    }
    return best;
}

}  // namespace viewpoint
