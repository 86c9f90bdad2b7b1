#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "viewpoint/config.hpp"
#include "viewpoint/corpus.hpp"
#include "viewpoint/pipeline.hpp"

namespace viewpoint {

/// One swept threshold: key in {t1, t2, t4}, values from..to inclusive.
struct SweepAxis {
    std::string key;
    double from = 0.0;
    double to = 0.0;
    double step = 0.0;

    std::vector<double> values() const
    {
        std::vector<double> out;
        auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(from + static_cast<double>(i) * step);
        }
        return out;
    }
};

/// Parses "t1=0.1..0.9:0.2,t2=0..0.5:0.1".
inline std::vector<SweepAxis> parse_sweep(std::string_view sweep)
{
    std::vector<SweepAxis> axes;
    std::set<std::string> seen;
    while (!sweep.empty()) {
        auto comma = sweep.find(',');
        auto item = trim(sweep.substr(0, comma));
        sweep = comma == std::string_view::npos ? std::string_view{} : sweep.substr(comma + 1);
        if (item.empty()) {
            continue;
        }
        auto eq = item.find('=');
        auto dots = item.find("..");
        auto colon = item.find(':');
        if (eq == std::string_view::npos || dots == std::string_view::npos || colon == std::string_view::npos ||
            !(eq < dots && dots < colon)) {
            throw Error(ErrorCode::invalid_argument, "sweep item must look like key=a..b:step, got '" +
                                                         std::string(item) + "'");
        }
        SweepAxis axis;
        axis.key = std::string(trim(item.substr(0, eq)));
        if (axis.key != "t1" && axis.key != "t2" && axis.key != "t4") {
            throw Error(ErrorCode::invalid_argument, "sweep key must be t1, t2 or t4");
        }
        if (!seen.insert(axis.key).second) {
            throw Error(ErrorCode::invalid_argument, "sweep key '" + axis.key + "' given twice");
        }
        axis.from = detail::parse_double(axis.key, trim(item.substr(eq + 1, dots - eq - 1)));
        axis.to = detail::parse_double(axis.key, trim(item.substr(dots + 2, colon - dots - 2)));
        axis.step = detail::parse_double(axis.key, trim(item.substr(colon + 1)));
        if (!(axis.step > 0.0) || axis.to < axis.from || axis.from < 0.0 || axis.to > 1.0) {
            throw Error(ErrorCode::invalid_argument, "sweep range for " + axis.key + " must satisfy 0 <= a <= b <= 1, step > 0");
        }
        axes.push_back(std::move(axis));
    }
    return axes;
}

struct GatingCounts {
    std::size_t predicted = 0;
    std::size_t correct = 0;
    std::size_t gold = 0;

    double precision() const { return predicted == 0 ? 0.0 : static_cast<double>(correct) / predicted; }
    double recall() const { return gold == 0 ? 0.0 : static_cast<double>(correct) / gold; }
};

struct EvalPoint {
    double t1 = 0.0;
    double t2 = 0.0;
    double t4 = 0.0;
    GatingCounts perspectives;  // relevance + stance gate vs gold perspectives of the claim
    GatingCounts evidence;      // t4 gate vs gold evidence of gold perspectives
};

/// Micro-averaged gating precision/recall for every point of the sweep grid.
/// Candidates and scores are computed once per claim; only the thresholds
/// vary between points.
inline std::vector<EvalPoint> evaluate_gating(const Engine& engine, const std::vector<Claim>& claims,
                                              const std::vector<GoldAnnotation>& gold, const PipelineConfig& base,
                                              const std::vector<SweepAxis>& axes)
{
    struct ClaimData {
        std::vector<Engine::CandidateScores> candidates;
        std::set<std::string> gold_perspectives;
        // (perspective id, evidence scores, gold evidence ids)
        std::vector<std::tuple<std::string, std::vector<ScoredEvidence>, std::set<std::string>>> evidence;
    };
    std::map<std::string, std::vector<const GoldAnnotation*>> gold_by_claim;
    for (const auto& g : gold) {
        gold_by_claim[g.claim_id].push_back(&g);
    }
    std::vector<ClaimData> data;
    for (const auto& claim : claims) {
        ClaimData d;
        d.candidates = engine.score_candidates(claim.text, base);
        for (const auto* g : gold_by_claim[claim.id]) {
            d.gold_perspectives.insert(g->perspective_id);
            if (const auto* p = engine.store().find_perspective(g->perspective_id)) {
                d.evidence.emplace_back(p->id, engine.score_evidence_candidates(claim.text, *p, base),
                                        std::set<std::string>(g->evidence_ids.begin(), g->evidence_ids.end()));
            }
        }
        data.push_back(std::move(d));
    }

    std::vector<EvalPoint> grid{{base.t1, base.t2, base.t4, {}, {}}};
    for (const auto& axis : axes) {
        std::vector<EvalPoint> next;
        for (const auto& point : grid) {
            for (double v : axis.values()) {
                EvalPoint p = point;
                (axis.key == "t1" ? p.t1 : axis.key == "t2" ? p.t2 : p.t4) = v;
                next.push_back(p);
            }
        }
        grid = std::move(next);
    }

    for (auto& point : grid) {
        for (const auto& d : data) {
            point.perspectives.gold += d.gold_perspectives.size();
            for (const auto& c : d.candidates) {
                if (c.relevance > point.t1 && std::abs(c.stance) > point.t2) {
                    ++point.perspectives.predicted;
                    point.perspectives.correct += d.gold_perspectives.count(c.perspective.id);
                }
            }
            for (const auto& [pid, scored, gold_ids] : d.evidence) {
                point.evidence.gold += gold_ids.size();
                for (const auto& e : scored) {
                    if (e.verification_score > point.t4) {
                        ++point.evidence.predicted;
                        point.evidence.correct += gold_ids.count(e.evidence.id);
                    }
                }
            }
        }
    }
    return grid;
}

}  // namespace viewpoint
