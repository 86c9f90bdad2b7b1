#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "viewpoint/corpus.hpp"
#include "viewpoint/error.hpp"
#include "viewpoint/retrieval.hpp"
#include "viewpoint/text.hpp"

namespace viewpoint {

/// The four classifier tasks. Wire names are C1..C4.
enum class Task { relevance, stance, equivalence, evidence };

constexpr std::string_view wire_name(Task t) noexcept
{
    switch (t) {
    case Task::relevance: return "C1";
    case Task::stance: return "C2";
    case Task::equivalence: return "C3";
    case Task::evidence: return "C4";
    }
    return "";
}

inline std::optional<Task> parse_task(std::string_view s)
{
    if (s == "C1") return Task::relevance;
    if (s == "C2") return Task::stance;
    if (s == "C3") return Task::equivalence;
    if (s == "C4") return Task::evidence;
    return std::nullopt;
}

/// Stance scores live in [-1, 1]; every other task in [0, 1].
inline bool in_range(Task t, double v)
{
    if (std::isnan(v)) {
        return false;
    }
    return t == Task::stance ? (v >= -1.0 && v <= 1.0) : (v >= 0.0 && v <= 1.0);
}

struct ScoreRequest {
    Task task = Task::relevance;
    std::string claim;
    std::string perspective;
    std::optional<std::string> perspective2;  // equivalence only
    std::optional<std::string> evidence;      // evidence only

    /// Enforces that the optional fields are present exactly for their task.
    void validate() const
    {
        if (perspective2.has_value() != (task == Task::equivalence)) {
            throw Error(ErrorCode::invalid_argument, "perspective2 must be present iff task is C3");
        }
        if (evidence.has_value() != (task == Task::evidence)) {
            throw Error(ErrorCode::invalid_argument, "evidence must be present iff task is C4");
        }
    }

    static ScoreRequest relevance(std::string claim, std::string perspective)
    {
        return {Task::relevance, std::move(claim), std::move(perspective), std::nullopt, std::nullopt};
    }
    static ScoreRequest stance(std::string claim, std::string perspective)
    {
        return {Task::stance, std::move(claim), std::move(perspective), std::nullopt, std::nullopt};
    }
    static ScoreRequest equivalence(std::string claim, std::string p1, std::string p2)
    {
        return {Task::equivalence, std::move(claim), std::move(p1), std::move(p2), std::nullopt};
    }
    static ScoreRequest evidence_check(std::string claim, std::string perspective, std::string evidence)
    {
        return {Task::evidence, std::move(claim), std::move(perspective), std::nullopt, std::move(evidence)};
    }
};

/// Uniform interface over the relevance / stance / equivalence / evidence
/// classifiers. The public entry points reject blank inputs; backends
/// implement the `do_*` hooks and must return values inside the task range.
/// Implementations must be safe to call from several threads at once.
class Scorer {
  public:
    virtual ~Scorer() = default;

    double relevance(std::string_view claim, std::string_view perspective) const
    {
        require_text(claim, "claim");
        require_text(perspective, "perspective");
        return do_relevance(claim, perspective);
    }

    double stance(std::string_view claim, std::string_view perspective) const
    {
        require_text(claim, "claim");
        require_text(perspective, "perspective");
        return do_stance(claim, perspective);
    }

    double equivalence(std::string_view claim, std::string_view p1, std::string_view p2) const
    {
        require_text(claim, "claim");
        require_text(p1, "perspective");
        require_text(p2, "perspective2");
        return do_equivalence(claim, p1, p2);
    }

    double evidence(std::string_view claim, std::string_view perspective, std::string_view evidence) const
    {
        require_text(claim, "claim");
        require_text(perspective, "perspective");
        require_text(evidence, "evidence");
        return do_evidence(claim, perspective, evidence);
    }

    double score(const ScoreRequest& r) const
    {
        r.validate();
        switch (r.task) {
        case Task::relevance: return relevance(r.claim, r.perspective);
        case Task::stance: return stance(r.claim, r.perspective);
        case Task::equivalence: return equivalence(r.claim, r.perspective, *r.perspective2);
        case Task::evidence: return evidence(r.claim, r.perspective, *r.evidence);
        }
        throw Error(ErrorCode::invalid_argument, "unknown task");
    }

    virtual std::string_view name() const noexcept = 0;

    /// How many calls the pipeline may have in flight against this backend.
    virtual std::size_t max_in_flight() const noexcept { return 1; }

  protected:
    virtual double do_relevance(std::string_view claim, std::string_view perspective) const = 0;
    virtual double do_stance(std::string_view claim, std::string_view perspective) const = 0;
    virtual double do_equivalence(std::string_view claim, std::string_view p1, std::string_view p2) const = 0;
    virtual double do_evidence(std::string_view claim, std::string_view perspective,
                               std::string_view evidence) const = 0;

  private:
    static void require_text(std::string_view text, const char* what)
    {
        if (is_blank(text)) {
            throw Error(ErrorCode::empty_text, std::string("empty ") + what + " text");
        }
    }
};

/// Stance cue words. File format: one cue per line, prefixed with '+'
/// (support), '-' or U+2212 (oppose) or '!' (negation). '#' starts a comment.
class CueLexicon {
  public:
    enum class Kind { support, oppose, negation };

    CueLexicon() = default;

    static CueLexicon starter()
    {
        CueLexicon lex;
        for (const char* w : {"benefit", "benefits", "beneficial", "good", "positive", "helps", "help", "improves",
                              "improve", "increases", "support", "supports", "advantage", "advantages", "easier",
                              "success", "valuable", "effective", "safe", "protects", "saves", "should"}) {
            lex.m_cues.emplace(w, Kind::support);
        }
        for (const char* w : {"harm", "harms", "harmful", "bad", "negative", "hurts", "damages", "reduces", "risk",
                              "risks", "dangerous", "costly", "threat", "undermines", "worse", "fails", "problem",
                              "problems", "wrong", "unfair", "abuse", "bullying"}) {
            lex.m_cues.emplace(w, Kind::oppose);
        }
        for (const char* w : {"not", "no", "never", "nor", "cannot", "without"}) {
            lex.m_cues.emplace(w, Kind::negation);
        }
        return lex;
    }

    static CueLexicon from_file(const std::string& path, const Tokenizer& tokenizer = {})
    {
        std::ifstream in(path);
        if (!in) {
            throw Error(ErrorCode::io_failure, "cannot open cue lexicon: " + path);
        }
        CueLexicon lex;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            auto t = trim(line);
            if (t.empty() || t.front() == '#') {
                continue;
            }
            Kind kind;
            std::string_view rest;
            if (t.front() == '+') {
                kind = Kind::support;
                rest = t.substr(1);
            } else if (t.front() == '-') {
                kind = Kind::oppose;
                rest = t.substr(1);
            } else if (t.starts_with("−")) {
                kind = Kind::oppose;
                rest = t.substr(std::string_view("−").size());
            } else if (t.front() == '!') {
                kind = Kind::negation;
                rest = t.substr(1);
            } else {
                throw Error(ErrorCode::malformed_input,
                            "cue lexicon line " + std::to_string(line_no) + ": expected +, -, or ! prefix");
            }
            auto tokens = tokenizer.tokenize(rest);
            if (tokens.size() != 1) {
                throw Error(ErrorCode::malformed_input,
                            "cue lexicon line " + std::to_string(line_no) + ": cue must be a single token");
            }
            lex.m_cues[tokens.front()] = kind;
        }
        return lex;
    }

    std::optional<Kind> lookup(std::string_view token) const
    {
        auto it = m_cues.find(token);
        if (it == m_cues.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    std::size_t size() const noexcept { return m_cues.size(); }

  private:
    std::map<std::string, Kind, std::less<>> m_cues;
};

/// Lexical stand-ins for the learned classifiers:
///   relevance   = TF-IDF cosine, idf taken from the perspective index
///   stance      = sign of net lexicon cues (flipped per negation) x relevance
///   equivalence = Jaccard of the two perspectives' token sets
///   evidence    = share of distinct claim+perspective tokens found in the evidence
class BaselineScorer final : public Scorer {
  public:
    BaselineScorer(std::shared_ptr<const InvertedIndex> idf_source, CueLexicon lexicon = CueLexicon::starter())
        : m_index(std::move(idf_source)), m_lexicon(std::move(lexicon))
    {
        if (!m_index) {
            throw Error(ErrorCode::invalid_argument, "baseline scorer needs an index for idf");
        }
    }

    std::string_view name() const noexcept override { return "baseline"; }

    const Tokenizer& tokenizer() const noexcept { return m_index->tokenizer(); }

  protected:
    double do_relevance(std::string_view claim, std::string_view perspective) const override
    {
        auto a = tfidf_vector(claim);
        auto b = tfidf_vector(perspective);
        double dot = 0.0;
        double na = 0.0;
        double nb = 0.0;
        for (const auto& [t, w] : a) {
            na += w * w;
            if (auto it = b.find(t); it != b.end()) {
                dot += w * it->second;
            }
        }
        for (const auto& [t, w] : b) {
            nb += w * w;
        }
        if (na == 0.0 || nb == 0.0) {
            return 0.0;
        }
        return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
    }

    double do_stance(std::string_view claim, std::string_view perspective) const override
    {
        int net = 0;
        int negations = 0;
        for (const auto& tok : tokenizer().tokenize(perspective)) {
            auto kind = m_lexicon.lookup(tok);
            if (!kind) {
                continue;
            }
            switch (*kind) {
            case CueLexicon::Kind::support: ++net; break;
            case CueLexicon::Kind::oppose: --net; break;
            case CueLexicon::Kind::negation: ++negations; break;
            }
        }
        if (net == 0) {
            return 0.0;
        }
        double sign = (net > 0 ? 1.0 : -1.0) * (negations % 2 == 0 ? 1.0 : -1.0);
        return sign * do_relevance(claim, perspective);
    }

    double do_equivalence(std::string_view, std::string_view p1, std::string_view p2) const override
    {
        auto a = token_set(p1);
        auto b = token_set(p2);
        if (a.empty() && b.empty()) {
            return 1.0;
        }
        std::size_t common = 0;
        for (const auto& t : a) {
            common += b.count(t);
        }
        auto unioned = a.size() + b.size() - common;
        return static_cast<double>(common) / static_cast<double>(unioned);
    }

    double do_evidence(std::string_view claim, std::string_view perspective, std::string_view evidence) const override
    {
        auto wanted = token_set(claim);
        for (auto& t : tokenizer().tokenize(perspective)) {
            wanted.insert(std::move(t));
        }
        if (wanted.empty()) {
            return 0.0;
        }
        auto have = token_set(evidence);
        std::size_t found = 0;
        for (const auto& t : wanted) {
            found += have.count(t);
        }
        return static_cast<double>(found) / static_cast<double>(wanted.size());
    }

  private:
    std::set<std::string> token_set(std::string_view text) const
    {
        auto tokens = tokenizer().tokenize(text);
        return {std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end())};
    }

    std::map<std::string, double> tfidf_vector(std::string_view text) const
    {
        std::map<std::string, double> v;
        for (auto& t : tokenizer().tokenize(text)) {
            v[std::move(t)] += 1.0;
        }
        for (auto& [t, w] : v) {
            w *= bm25_idf(m_index->doc_count(), m_index->doc_freq(t));
        }
        return v;
    }

    std::shared_ptr<const InvertedIndex> m_index;
    CueLexicon m_lexicon;
};

/// Answers from gold annotations. Texts are resolved to ids by exact match
/// after whitespace normalization; anything that does not resolve is handed
/// to the fallback scorer.
class GoldScorer final : public Scorer {
  public:
    GoldScorer(const CorpusStore& store, std::shared_ptr<const Scorer> fallback)
        : m_fallback(std::move(fallback))
    {
        if (!m_fallback) {
            throw Error(ErrorCode::invalid_argument, "gold scorer needs a fallback scorer");
        }
        for (const auto& c : store.claims()) {
            m_claims[normalize_whitespace(c.text)].push_back(c.id);
        }
        for (const auto& p : store.perspectives()) {
            m_perspectives[normalize_whitespace(p.text)].push_back(p.id);
        }
        for (const auto& e : store.evidence()) {
            m_evidence[normalize_whitespace(e.text)].push_back(e.id);
        }
        for (const auto& g : store.gold()) {
            m_gold[{g.claim_id, g.perspective_id}] = g;
        }
    }

    std::string_view name() const noexcept override { return "gold"; }

  protected:
    double do_relevance(std::string_view claim, std::string_view perspective) const override
    {
        auto cs = resolve(m_claims, claim);
        auto ps = resolve(m_perspectives, perspective);
        if (!cs || !ps) {
            return m_fallback->relevance(claim, perspective);
        }
        return first_annotation(*cs, *ps) ? 1.0 : 0.0;
    }

    double do_stance(std::string_view claim, std::string_view perspective) const override
    {
        auto cs = resolve(m_claims, claim);
        auto ps = resolve(m_perspectives, perspective);
        if (!cs || !ps) {
            return m_fallback->stance(claim, perspective);
        }
        const auto* g = first_annotation(*cs, *ps);
        if (!g) {
            return 0.0;
        }
        return g->stance == StanceLabel::support ? 1.0 : -1.0;
    }

    double do_equivalence(std::string_view claim, std::string_view p1, std::string_view p2) const override
    {
        auto cs = resolve(m_claims, claim);
        auto as = resolve(m_perspectives, p1);
        auto bs = resolve(m_perspectives, p2);
        if (!cs || !as || !bs) {
            return m_fallback->equivalence(claim, p1, p2);
        }
        for (const auto& c : *cs) {
            for (const auto& a : *as) {
                auto ga = m_gold.find({c, a});
                if (ga == m_gold.end()) {
                    continue;
                }
                for (const auto& b : *bs) {
                    auto gb = m_gold.find({c, b});
                    if (gb != m_gold.end() && gb->second.cluster_id == ga->second.cluster_id) {
                        return 1.0;
                    }
                }
            }
        }
        return 0.0;
    }

    double do_evidence(std::string_view claim, std::string_view perspective, std::string_view evidence) const override
    {
        auto cs = resolve(m_claims, claim);
        auto ps = resolve(m_perspectives, perspective);
        auto es = resolve(m_evidence, evidence);
        if (!cs || !ps || !es) {
            return m_fallback->evidence(claim, perspective, evidence);
        }
        for (const auto& c : *cs) {
            for (const auto& p : *ps) {
                auto g = m_gold.find({c, p});
                if (g == m_gold.end()) {
                    continue;
                }
                for (const auto& e : *es) {
                    if (std::find(g->second.evidence_ids.begin(), g->second.evidence_ids.end(), e) !=
                        g->second.evidence_ids.end()) {
                        return 1.0;
                    }
                }
            }
        }
        return 0.0;
    }

  private:
    using TextIndex = std::unordered_map<std::string, std::vector<std::string>>;

    static const std::vector<std::string>* resolve(const TextIndex& index, std::string_view text)
    {
        auto it = index.find(normalize_whitespace(text));
        return it == index.end() ? nullptr : &it->second;
    }

    const GoldAnnotation* first_annotation(const std::vector<std::string>& claims,
                                           const std::vector<std::string>& perspectives) const
    {
        for (const auto& c : claims) {
            for (const auto& p : perspectives) {
                if (auto it = m_gold.find({c, p}); it != m_gold.end()) {
                    return &it->second;
                }
            }
        }
        return nullptr;
    }

    std::shared_ptr<const Scorer> m_fallback;
    TextIndex m_claims;
    TextIndex m_perspectives;
    TextIndex m_evidence;
    std::map<std::pair<std::string, std::string>, GoldAnnotation> m_gold;
};

}  // namespace viewpoint
