#pragma once

#include <algorithm>
#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "viewpoint/clustering.hpp"
#include "viewpoint/config.hpp"
#include "viewpoint/corpus.hpp"
#include "viewpoint/expansion.hpp"
#include "viewpoint/parallel.hpp"
#include "viewpoint/retrieval.hpp"
#include "viewpoint/scorers.hpp"

namespace viewpoint {

struct ScoredEvidence {
    EvidenceParagraph evidence;
    double verification_score = 0.0;

    bool operator==(const ScoredEvidence&) const = default;
};

struct ScoredPerspective {
    Perspective perspective;
    double relevance = 0.0;
    double stance = 0.0;
    bool evidence_resolved = false;
    std::vector<ScoredEvidence> evidence;

    bool operator==(const ScoredPerspective&) const = default;
};

/// One equivalence class in the output. `members` includes the
/// representative and is ordered by retrieval rank.
struct ClusterOutput {
    ScoredPerspective representative;
    std::vector<ScoredPerspective> members;
    bool is_noise_singleton = false;

    bool operator==(const ClusterOutput&) const = default;
};

struct StageTimings {
    double retrieve_ms = 0.0;
    double gate_ms = 0.0;
    double evidence_ms = 0.0;
    double cluster_ms = 0.0;
};

/// Per-query state for documents pulled in by expansion: the candidate
/// evidence paragraphs and an ad-hoc index over them. Never merged into the
/// persistent evidence index.
struct ExpansionContext {
    std::vector<EvidenceParagraph> evidence;
    std::unordered_map<std::string, std::size_t> evidence_by_id;
    InvertedIndex index;
};

struct QueryResult {
    std::string query_id;
    Claim claim;
    std::vector<ClusterOutput> supporting;
    std::vector<ClusterOutput> opposing;
    PipelineConfig config_used;
    StageTimings timings;
    std::size_t candidates_scored = 0;  // relevance calls made
    std::shared_ptr<const ExpansionContext> expansion;

    /// Looks up any member of any output cluster by perspective ref.
    const ScoredPerspective* find_perspective(std::string_view ref) const
    {
        for (const auto* side : {&supporting, &opposing}) {
            for (const auto& c : *side) {
                for (const auto& m : c.members) {
                    if (m.perspective.id == ref) {
                        return &m;
                    }
                }
            }
        }
        return nullptr;
    }
};

/// Id for texts without a corpus id (expansion candidates, unknown claims):
/// prefix plus the hash of the whitespace-normalized text.
inline std::string text_ref(std::string_view prefix, std::string_view text)
{
    return std::string(prefix) + to_hex(fnv1a64(normalize_whitespace(text)));
}

/// Retrieve-then-score perspective discovery over a perspective index and an
/// evidence index. All members are immutable after construction, so one
/// Engine serves concurrent queries.
class Engine {
  public:
    struct Indexes {
        std::shared_ptr<const InvertedIndex> perspectives;
        std::shared_ptr<const InvertedIndex> evidence;
    };

    static Indexes build_indexes(const CorpusStore& store, const Tokenizer& tokenizer)
    {
        std::vector<std::pair<std::string, std::string>> ps;
        for (const auto& p : store.perspectives()) {
            ps.emplace_back(p.id, p.text);
        }
        std::vector<std::pair<std::string, std::string>> es;
        for (const auto& e : store.evidence()) {
            es.emplace_back(e.id, e.text);
        }
        return {std::make_shared<const InvertedIndex>(InvertedIndex::build(std::move(ps), tokenizer)),
                std::make_shared<const InvertedIndex>(InvertedIndex::build(std::move(es), tokenizer))};
    }

    Engine(std::shared_ptr<const CorpusStore> store, Indexes indexes, std::shared_ptr<const Scorer> scorer,
           std::shared_ptr<const DocumentSource> expansion = nullptr)
        : m_store(std::move(store)),
          m_indexes(std::move(indexes)),
          m_scorer(std::move(scorer)),
          m_expansion(std::move(expansion))
    {
        if (!m_store || !m_indexes.perspectives || !m_indexes.evidence || !m_scorer) {
            throw Error(ErrorCode::invalid_argument, "engine needs a store, both indexes and a scorer");
        }
        for (const auto& c : m_store->claims()) {
            m_claims_by_text.emplace(normalize_whitespace(c.text), &c);
        }
    }

    const CorpusStore& store() const noexcept { return *m_store; }
    const Scorer& scorer() const noexcept { return *m_scorer; }
    const InvertedIndex& perspective_index() const noexcept { return *m_indexes.perspectives; }
    const InvertedIndex& evidence_index() const noexcept { return *m_indexes.evidence; }

    /// The full discovery pipeline: retrieve candidates, gate on relevance and
    /// stance, attach verified evidence (eager mode), cluster equivalent
    /// perspectives and split the clusters by the representative's stance.
    QueryResult discover_perspectives(std::string_view claim_text, const PipelineConfig& config) const
    {
        if (is_blank(claim_text)) {
            throw Error(ErrorCode::empty_text, "empty claim");
        }
        config.validate();
        using clock = std::chrono::steady_clock;
        auto ms_since = [](clock::time_point t0) {
            return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        };

        QueryResult result;
        result.claim = resolve_claim(claim_text);
        result.config_used = config;
        const std::string& claim = result.claim.text;

        auto t0 = clock::now();
        std::vector<Perspective> candidates;
        auto expansion = collect_candidates(claim, config, candidates);
        result.expansion = expansion;
        result.timings.retrieve_ms = ms_since(t0);

        t0 = clock::now();
        auto survivors = gate(claim, candidates, config);
        result.candidates_scored = candidates.size();
        result.timings.gate_ms = ms_since(t0);

        t0 = clock::now();
        if (config.evidence_mode == EvidenceMode::eager) {
            parallel_for(survivors.size(), workers(), [&](std::size_t i) {
                survivors[i].evidence = resolve_evidence(claim, survivors[i].perspective, config, expansion.get());
                survivors[i].evidence_resolved = true;
            });
        }
        result.timings.evidence_ms = ms_since(t0);

        t0 = clock::now();
        cluster(claim, survivors, config, result);
        result.timings.cluster_ms = ms_since(t0);
        return result;
    }

    /// Evidence for one perspective: top k_evidence paragraphs for the claim
    /// and perspective together, kept when verification > t4, best first
    /// (ties by evidence id). Expansion perspectives search only the
    /// expansion paragraphs of their own query.
    std::vector<ScoredEvidence> resolve_evidence(std::string_view claim, const Perspective& perspective,
                                                 const PipelineConfig& config,
                                                 const ExpansionContext* expansion = nullptr) const
    {
        auto kept = score_evidence_candidates(claim, perspective, config, expansion);
        std::erase_if(kept, [&](const ScoredEvidence& e) { return !(e.verification_score > config.t4); });
        std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
            if (a.verification_score != b.verification_score) {
                return a.verification_score > b.verification_score;
            }
            return a.evidence.id < b.evidence.id;
        });
        return kept;
    }

    /// Every evidence candidate for a perspective with its verification
    /// score, in retrieval order and without the t4 cut.
    std::vector<ScoredEvidence> score_evidence_candidates(std::string_view claim, const Perspective& perspective,
                                                          const PipelineConfig& config,
                                                          const ExpansionContext* expansion = nullptr) const
    {
        const InvertedIndex* index = &evidence_index();
        if (perspective.source == Source::expansion) {
            if (!expansion) {
                return {};
            }
            index = &expansion->index;
        }
        std::vector<ScoredEvidence> scored;
        for (const auto& hit : index->search_evidence(claim, perspective.text, config.k_evidence, config.bm25())) {
            const EvidenceParagraph& paragraph = perspective.source == Source::expansion
                                                     ? expansion->evidence[expansion->evidence_by_id.at(hit.doc_id)]
                                                     : m_store->get_evidence(hit.doc_id);
            scored.push_back({paragraph, m_scorer->evidence(claim, perspective.text, paragraph.text)});
        }
        return scored;
    }

    struct CandidateScores {
        Perspective perspective;
        double relevance = 0.0;
        double stance = 0.0;
    };

    /// Retrieval candidates with relevance and stance scored for all of them,
    /// before any gating. Used for threshold sweeps.
    std::vector<CandidateScores> score_candidates(std::string_view claim_text, const PipelineConfig& config) const
    {
        auto claim = resolve_claim(claim_text);
        std::vector<Perspective> candidates;
        collect_candidates(claim.text, config, candidates);
        std::vector<CandidateScores> out(candidates.size());
        parallel_for(candidates.size(), workers(), [&](std::size_t i) {
            out[i] = {candidates[i], m_scorer->relevance(claim.text, candidates[i].text),
                      m_scorer->stance(claim.text, candidates[i].text)};
        });
        return out;
    }

    Claim resolve_claim(std::string_view text) const
    {
        auto normalized = normalize_whitespace(text);
        if (auto it = m_claims_by_text.find(normalized); it != m_claims_by_text.end()) {
            return *it->second;
        }
        return {text_ref("c:", normalized), normalized};
    }

  private:
    std::size_t workers() const noexcept { return m_scorer->max_in_flight(); }

    /// Fills `out` with corpus hits in rank order, then expansion candidates
    /// whose normalized text has not been seen yet.
    std::shared_ptr<const ExpansionContext> collect_candidates(const std::string& claim, const PipelineConfig& config,
                                                               std::vector<Perspective>& out) const
    {
        std::unordered_set<std::string> seen;
        for (const auto& hit : perspective_index().search(claim, config.k_perspectives, config.bm25())) {
            const auto& p = m_store->get_perspective(hit.doc_id);
            if (seen.insert(normalize_whitespace(p.text)).second) {
                out.push_back(p);
            }
        }
        if (!m_expansion || config.expansion_docs == 0) {
            return nullptr;
        }
        auto candidates = extract_candidates(m_expansion->fetch_documents(claim, config.expansion_docs));
        if (candidates.perspectives.empty()) {
            return nullptr;
        }
        auto ctx = std::make_shared<ExpansionContext>();
        std::vector<std::pair<std::string, std::string>> docs;
        for (auto& e : candidates.evidence) {
            auto id = text_ref("xe:", e.text);
            if (ctx->evidence_by_id.contains(id)) {
                continue;
            }
            ctx->evidence_by_id.emplace(id, ctx->evidence.size());
            docs.emplace_back(id, e.text);
            ctx->evidence.push_back({id, std::move(e.text), Source::expansion, std::move(e.uri)});
        }
        ctx->index = InvertedIndex::build(std::move(docs), perspective_index().tokenizer());
        for (auto& p : candidates.perspectives) {
            auto normalized = normalize_whitespace(p.text);
            if (!seen.insert(normalized).second) {
                continue;
            }
            out.push_back({text_ref("x:", normalized), std::move(p.text), Source::expansion, std::move(p.uri)});
        }
        return ctx;
    }

    /// Keeps candidates with relevance > t1 and |stance| > t2. Stance is only
    /// scored for candidates that pass relevance.
    std::vector<ScoredPerspective> gate(const std::string& claim, const std::vector<Perspective>& candidates,
                                        const PipelineConfig& config) const
    {
        struct Scores {
            double relevance = 0.0;
            double stance = 0.0;
            bool kept = false;
        };
        std::vector<Scores> scores(candidates.size());
        parallel_for(candidates.size(), workers(), [&](std::size_t i) {
            auto& s = scores[i];
            s.relevance = m_scorer->relevance(claim, candidates[i].text);
            if (s.relevance > config.t1) {
                s.stance = m_scorer->stance(claim, candidates[i].text);
                s.kept = std::abs(s.stance) > config.t2;
            }
        });
        std::vector<ScoredPerspective> survivors;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (scores[i].kept) {
                survivors.push_back({candidates[i], scores[i].relevance, scores[i].stance, false, {}});
            }
        }
        return survivors;
    }

    void cluster(const std::string& claim, const std::vector<ScoredPerspective>& survivors,
                 const PipelineConfig& config, QueryResult& result) const
    {
        if (survivors.empty()) {
            return;
        }
        std::vector<std::string> texts;
        std::vector<double> relevance;
        for (const auto& s : survivors) {
            texts.push_back(s.perspective.text);
            relevance.push_back(s.relevance);
        }
        auto distances = build_distance_matrix(claim, texts, *m_scorer, workers());
        for (auto& c : dbscan(distances, config.eps, config.min_pts)) {
            c.representative_index = select_representative(c, relevance);
            ClusterOutput out;
            out.representative = survivors[c.representative_index];
            out.is_noise_singleton = c.is_noise_singleton;
            for (auto i : c.member_indices) {
                out.members.push_back(survivors[i]);
            }
            if (out.representative.stance > 0.0) {
                result.supporting.push_back(std::move(out));
            } else if (out.representative.stance < 0.0) {
                result.opposing.push_back(std::move(out));
            }
        }
        auto by_relevance = [](const ClusterOutput& a, const ClusterOutput& b) {
            return a.representative.relevance > b.representative.relevance;
        };
        std::stable_sort(result.supporting.begin(), result.supporting.end(), by_relevance);
        std::stable_sort(result.opposing.begin(), result.opposing.end(), by_relevance);
    }

    std::shared_ptr<const CorpusStore> m_store;
    Indexes m_indexes;
    std::shared_ptr<const Scorer> m_scorer;
    std::shared_ptr<const DocumentSource> m_expansion;
    std::unordered_map<std::string, const Claim*> m_claims_by_text;
};

}  // namespace viewpoint
