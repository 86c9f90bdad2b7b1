#pragma once

#include "json.hpp"
#include "viewpoint/config.hpp"
#include "viewpoint/pipeline.hpp"

namespace viewpoint {

inline nlohmann::json to_json(const ScoredEvidence& e)
{
    nlohmann::json j = {{"id", e.evidence.id},
                        {"text", e.evidence.text},
                        {"score", e.verification_score},
                        {"source", std::string(to_string(e.evidence.source))}};
    if (!e.evidence.uri.empty()) {
        j["uri"] = e.evidence.uri;
    }
    return j;
}

inline nlohmann::json to_json(const std::vector<ScoredEvidence>& list)
{
    auto arr = nlohmann::json::array();
    for (const auto& e : list) {
        arr.push_back(to_json(e));
    }
    return arr;
}

inline nlohmann::json to_json(const ScoredPerspective& p)
{
    nlohmann::json j = {{"id", p.perspective.id},
                        {"text", p.perspective.text},
                        {"relevance", p.relevance},
                        {"stance", p.stance},
                        {"source", std::string(to_string(p.perspective.source))}};
    if (!p.perspective.uri.empty()) {
        j["uri"] = p.perspective.uri;
    }
    if (p.evidence_resolved) {
        j["evidence"] = to_json(p.evidence);
    }
    return j;
}

inline nlohmann::json to_json(const ClusterOutput& c)
{
    auto members = nlohmann::json::array();
    for (const auto& m : c.members) {
        members.push_back(to_json(m));
    }
    return {{"representative", to_json(c.representative)},
            {"members", std::move(members)},
            {"is_noise_singleton", c.is_noise_singleton},
            {"evidence_resolved", c.representative.evidence_resolved}};
}

inline nlohmann::json to_json(const StageTimings& t)
{
    return {{"retrieve_ms", t.retrieve_ms},
            {"gate_ms", t.gate_ms},
            {"evidence_ms", t.evidence_ms},
            {"cluster_ms", t.cluster_ms}};
}

inline nlohmann::json to_json(const QueryResult& r)
{
    auto side = [](const std::vector<ClusterOutput>& clusters) {
        auto arr = nlohmann::json::array();
        for (const auto& c : clusters) {
            arr.push_back(to_json(c));
        }
        return arr;
    };
    return {{"query_id", r.query_id},
            {"claim", {{"id", r.claim.id}, {"text", r.claim.text}}},
            {"supporting", side(r.supporting)},
            {"opposing", side(r.opposing)},
            {"config_used", to_json(r.config_used)},
            {"timings", to_json(r.timings)}};
}

}  // namespace viewpoint
