#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "viewpoint/error.hpp"
#include "viewpoint/text.hpp"

namespace viewpoint {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Posting {
    std::uint32_t doc;  // ordinal into InvertedIndex::doc_ids(), which is id-sorted
    std::uint32_t tf;
};

struct RetrievalHit {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const RetrievalHit&) const = default;
};

/// Smoothed Okapi idf: ln((N - n + 0.5) / (n + 0.5) + 1). Strictly positive
/// for every n <= N, so a matching term never lowers a score.
inline double bm25_idf(std::size_t doc_count, std::size_t doc_freq)
{
    auto N = static_cast<double>(doc_count);
    auto n = static_cast<double>(doc_freq);
    return std::log((N - n + 0.5) / (n + 0.5) + 1.0);
}

inline double bm25_term_weight(std::uint32_t tf, double doc_length, double avg_doc_length, Bm25Params p)
{
    auto f = static_cast<double>(tf);
    double norm = avg_doc_length > 0.0 ? doc_length / avg_doc_length : 0.0;
    return f * (p.k1 + 1.0) / (f + p.k1 * (1.0 - p.b + p.b * norm));
}

/// Orders hits by score descending, then doc id ascending.
inline bool hit_before(const RetrievalHit& a, const RetrievalHit& b)
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.doc_id < b.doc_id;
}

/// Immutable term -> postings map. Documents are stored in ascending id order
/// so every posting list is sorted by doc id. Safe for concurrent search once
/// built.
class InvertedIndex {
  public:
    InvertedIndex() = default;

    /// Throws on duplicate doc ids. Documents whose text tokenizes to nothing
    /// are kept with length 0 and appear in no posting list.
    static InvertedIndex build(std::vector<std::pair<std::string, std::string>> docs, const Tokenizer& tokenizer)
    {
        std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < docs.size(); ++i) {
            if (docs[i].first == docs[i - 1].first) {
                throw Error(ErrorCode::duplicate_id, "duplicate doc id '" + docs[i].first + "'");
            }
        }
        InvertedIndex index;
        index.m_tokenizer = tokenizer;
        index.m_doc_ids.reserve(docs.size());
        index.m_doc_lengths.reserve(docs.size());
        std::uint64_t total_length = 0;
        std::unordered_map<std::string, std::uint32_t> tf;
        for (std::size_t ord = 0; ord < docs.size(); ++ord) {
            auto tokens = tokenizer.tokenize(docs[ord].second);
            tf.clear();
            for (auto& t : tokens) {
                ++tf[t];
            }
            for (auto& [term, count] : tf) {
                index.m_postings[term].push_back({static_cast<std::uint32_t>(ord), count});
            }
            index.m_doc_ids.push_back(std::move(docs[ord].first));
            index.m_doc_lengths.push_back(static_cast<std::uint32_t>(tokens.size()));
            total_length += tokens.size();
        }
        index.m_avg_doc_length =
            docs.empty() ? 0.0 : static_cast<double>(total_length) / static_cast<double>(docs.size());
        return index;
    }

    std::size_t doc_count() const noexcept { return m_doc_ids.size(); }
    double avg_doc_length() const noexcept { return m_avg_doc_length; }
    const std::vector<std::string>& doc_ids() const noexcept { return m_doc_ids; }
    const std::vector<std::uint32_t>& doc_lengths() const noexcept { return m_doc_lengths; }
    const Tokenizer& tokenizer() const noexcept { return m_tokenizer; }

    std::size_t doc_freq(std::string_view term) const
    {
        auto it = m_postings.find(std::string(term));
        return it == m_postings.end() ? 0 : it->second.size();
    }

    const std::vector<Posting>* postings(std::string_view term) const
    {
        auto it = m_postings.find(std::string(term));
        return it == m_postings.end() ? nullptr : &it->second;
    }

    std::size_t term_count() const noexcept { return m_postings.size(); }

    /// Top-k BM25 over the distinct query terms. Hits with score 0 are never
    /// returned, so fewer than k hits come back when fewer documents match.
    std::vector<RetrievalHit> search(std::string_view query, std::size_t k, Bm25Params params = {}) const
    {
        if (k == 0) {
            throw Error(ErrorCode::invalid_argument, "search: k must be >= 1");
        }
        auto terms = m_tokenizer.tokenize(query);
        std::sort(terms.begin(), terms.end());
        terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

        // Accumulate term by term in sorted term order; every document sees
        // the same summation order regardless of posting layout.
        std::unordered_map<std::uint32_t, double> acc;
        for (const auto& term : terms) {
            const auto* list = postings(term);
            if (!list) {
                continue;
            }
            double idf = bm25_idf(doc_count(), list->size());
            for (const auto& p : *list) {
                acc[p.doc] += idf * bm25_term_weight(p.tf, m_doc_lengths[p.doc], m_avg_doc_length, params);
            }
        }

        std::vector<RetrievalHit> hits;
        hits.reserve(acc.size());
        for (const auto& [doc, score] : acc) {
            if (score > 0.0) {
                hits.push_back({m_doc_ids[doc], score});
            }
        }
        auto top = std::min(k, hits.size());
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(top), hits.end(), hit_before);
        hits.resize(top);
        return hits;
    }

    /// Evidence lookup: the query is the claim and perspective joined by one space.
    std::vector<RetrievalHit> search_evidence(std::string_view claim, std::string_view perspective, std::size_t k,
                                              Bm25Params params = {}) const
    {
        std::string query;
        query.reserve(claim.size() + perspective.size() + 1);
        query.append(claim).append(" ").append(perspective);
        return search(query, k, params);
    }

  private:
    Tokenizer m_tokenizer;
    std::unordered_map<std::string, std::vector<Posting>> m_postings;
    std::vector<std::string> m_doc_ids;
    std::vector<std::uint32_t> m_doc_lengths;
    double m_avg_doc_length = 0.0;
};

}  // namespace viewpoint
