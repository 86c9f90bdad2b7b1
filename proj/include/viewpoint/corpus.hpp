#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "viewpoint/error.hpp"
#include "viewpoint/text.hpp"

namespace viewpoint {

enum class Source { corpus, expansion };

constexpr std::string_view to_string(Source s) noexcept
{
    return s == Source::corpus ? "corpus" : "expansion";
}

inline std::optional<Source> parse_source(std::string_view s)
{
    if (s == "corpus") {
        return Source::corpus;
    }
    if (s == "expansion") {
        return Source::expansion;
    }
    return std::nullopt;
}

enum class StanceLabel { support, oppose };

constexpr std::string_view to_string(StanceLabel s) noexcept
{
    return s == StanceLabel::support ? "support" : "oppose";
}

struct Claim {
    std::string id;
    std::string text;

    bool operator==(const Claim&) const = default;
};

struct Perspective {
    std::string id;
    std::string text;
    Source source = Source::corpus;
    // Document uri for expansion candidates; empty for corpus records.
    std::string uri;

    bool operator==(const Perspective&) const = default;
};

struct EvidenceParagraph {
    std::string id;
    std::string text;
    Source source = Source::corpus;
    std::string uri;

    bool operator==(const EvidenceParagraph&) const = default;
};

struct GoldAnnotation {
    std::string claim_id;
    std::string perspective_id;
    StanceLabel stance = StanceLabel::support;
    std::string cluster_id;
    std::vector<std::string> evidence_ids;

    bool operator==(const GoldAnnotation&) const = default;
};

namespace detail {

    inline std::string line_prefix(std::size_t line_no)
    {
        return "line " + std::to_string(line_no) + ": ";
    }

    inline nlohmann::json parse_json_line(std::string_view line, std::size_t line_no)
    {
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw Error(ErrorCode::malformed_input, line_prefix(line_no) + "not a JSON object");
        }
        return j;
    }

    inline std::string required_string(const nlohmann::json& j, const char* key, std::size_t line_no)
    {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            throw Error(ErrorCode::malformed_input,
                        line_prefix(line_no) + "missing or non-string field '" + key + "'");
        }
        return it->get<std::string>();
    }

    template <typename Record>
    Record parse_text_record(std::string_view line, std::size_t line_no)
    {
        auto j = parse_json_line(line, line_no);
        Record r;
        r.id = required_string(j, "id", line_no);
        if (r.id.empty()) {
            throw Error(ErrorCode::malformed_input, line_prefix(line_no) + "empty id");
        }
        r.text = required_string(j, "text", line_no);
        if (is_blank(r.text)) {
            throw Error(ErrorCode::empty_text, line_prefix(line_no) + "empty text for id '" + r.id + "'");
        }
        if constexpr (requires { r.source; }) {
            if (auto it = j.find("source"); it != j.end()) {
                if (!it->is_string()) {
                    throw Error(ErrorCode::malformed_input, line_prefix(line_no) + "non-string field 'source'");
                }
                auto src = parse_source(it->template get<std::string>());
                if (!src) {
                    throw Error(ErrorCode::malformed_input,
                                line_prefix(line_no) + "unknown source '" + it->template get<std::string>() + "'");
                }
                r.source = *src;
            }
            if (auto it = j.find("uri"); it != j.end() && it->is_string()) {
                r.uri = it->template get<std::string>();
            }
        }
        return r;
    }

    template <typename Record>
    std::string serialize_text_record(const Record& r)
    {
        nlohmann::json j = {{"id", r.id}, {"text", r.text}};
        if constexpr (requires { r.source; }) {
            j["source"] = std::string(to_string(r.source));
            if (!r.uri.empty()) {
                j["uri"] = r.uri;
            }
        }
        return j.dump();
    }

    inline GoldAnnotation parse_gold_record(std::string_view line, std::size_t line_no)
    {
        auto j = parse_json_line(line, line_no);
        GoldAnnotation g;
        g.claim_id = required_string(j, "claim_id", line_no);
        g.perspective_id = required_string(j, "perspective_id", line_no);
        auto stance = required_string(j, "stance", line_no);
        if (stance == "support") {
            g.stance = StanceLabel::support;
        } else if (stance == "oppose") {
            g.stance = StanceLabel::oppose;
        } else {
            throw Error(ErrorCode::malformed_input, line_prefix(line_no) + "stance must be support|oppose");
        }
        g.cluster_id = required_string(j, "cluster_id", line_no);
        auto it = j.find("evidence_ids");
        if (it == j.end() || !it->is_array()) {
            throw Error(ErrorCode::malformed_input, line_prefix(line_no) + "missing array field 'evidence_ids'");
        }
        for (const auto& e : *it) {
            if (!e.is_string()) {
                throw Error(ErrorCode::malformed_input, line_prefix(line_no) + "evidence_ids must be strings");
            }
            g.evidence_ids.push_back(e.get<std::string>());
        }
        return g;
    }

    inline std::string serialize_gold_record(const GoldAnnotation& g)
    {
        nlohmann::json j = {{"claim_id", g.claim_id},
                            {"perspective_id", g.perspective_id},
                            {"stance", std::string(to_string(g.stance))},
                            {"cluster_id", g.cluster_id},
                            {"evidence_ids", g.evidence_ids}};
        return j.dump();
    }

    /// Calls `fn(line, line_no)` for every non-blank line of the stream.
    template <typename Fn>
    void for_each_line(std::istream& in, Fn&& fn)
    {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (is_blank(line)) {
                continue;
            }
            fn(std::string_view(line), line_no);
        }
    }

    /// Id-keyed record table with append-log persistence.
    template <typename Record>
    class RecordTable {
      public:
        std::span<const Record> records() const noexcept { return m_records; }

        const Record* find(std::string_view id) const
        {
            auto it = m_by_id.find(std::string(id));
            return it == m_by_id.end() ? nullptr : &m_records[it->second];
        }

        /// Validates the whole batch before touching the table, so a failed
        /// ingest leaves no partial state.
        std::vector<Record> parse_batch(std::istream& in) const
        {
            std::vector<Record> batch;
            std::unordered_set<std::string> seen;
            for_each_line(in, [&](std::string_view line, std::size_t line_no) {
                auto r = parse_text_record<Record>(line, line_no);
                if (m_by_id.contains(r.id) || !seen.insert(r.id).second) {
                    throw Error(ErrorCode::duplicate_id,
                                line_prefix(line_no) + "duplicate id '" + r.id + "'");
                }
                batch.push_back(std::move(r));
            });
            return batch;
        }

        void append(std::vector<Record> batch)
        {
            for (auto& r : batch) {
                m_by_id.emplace(r.id, m_records.size());
                m_records.push_back(std::move(r));
            }
        }

      private:
        std::vector<Record> m_records;
        std::unordered_map<std::string, std::size_t> m_by_id;
    };

}  // namespace detail

/// Durable storage for the claim, perspective and evidence corpora plus gold
/// annotations. Each table is an append-only JSONL log inside the store
/// directory; reopening a store replays the logs. A store opened without a
/// directory lives in memory only.
///
/// Ingestion must come from a single writer. Once ingestion is done the store
/// is read-only and may be shared across threads.
class CorpusStore {
  public:
    CorpusStore() = default;

    static CorpusStore open(const std::filesystem::path& dir)
    {
        CorpusStore store;
        store.m_dir = dir;
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            throw Error(ErrorCode::io_failure, "cannot create store directory " + dir.string() + ": " + ec.message());
        }
        store.replay(claims_log, store.m_claims);
        store.replay(perspectives_log, store.m_perspectives);
        store.replay(evidence_log, store.m_evidence);
        if (auto in = std::ifstream(dir / gold_log)) {
            detail::for_each_line(in, [&](std::string_view line, std::size_t line_no) {
                store.m_gold.push_back(detail::parse_gold_record(line, line_no));
            });
        }
        return store;
    }

    std::size_t ingest_claims(const std::filesystem::path& file) { return ingest_file(file, m_claims, claims_log); }
    std::size_t ingest_perspectives(const std::filesystem::path& file)
    {
        return ingest_file(file, m_perspectives, perspectives_log);
    }
    std::size_t ingest_evidence(const std::filesystem::path& file) { return ingest_file(file, m_evidence, evidence_log); }

    std::size_t ingest_claims(std::istream& in) { return ingest_stream(in, m_claims, claims_log); }
    std::size_t ingest_perspectives(std::istream& in) { return ingest_stream(in, m_perspectives, perspectives_log); }
    std::size_t ingest_evidence(std::istream& in) { return ingest_stream(in, m_evidence, evidence_log); }

    /// Gold annotations must reference claims, perspectives and evidence that
    /// are already in the store.
    std::size_t ingest_gold(const std::filesystem::path& file)
    {
        auto in = open_input(file);
        return ingest_gold(in);
    }

    std::size_t ingest_gold(std::istream& in)
    {
        std::vector<GoldAnnotation> batch;
        detail::for_each_line(in, [&](std::string_view line, std::size_t line_no) {
            auto g = detail::parse_gold_record(line, line_no);
            auto unresolved = [&](const std::string& kind, const std::string& id) {
                return Error(ErrorCode::not_found, detail::line_prefix(line_no) + "unknown " + kind + " id '" + id + "'");
            };
            if (!m_claims.find(g.claim_id)) {
                throw unresolved("claim", g.claim_id);
            }
            if (!m_perspectives.find(g.perspective_id)) {
                throw unresolved("perspective", g.perspective_id);
            }
            for (const auto& e : g.evidence_ids) {
                if (!m_evidence.find(e)) {
                    throw unresolved("evidence", e);
                }
            }
            batch.push_back(std::move(g));
        });
        std::vector<std::string> lines;
        for (const auto& g : batch) {
            lines.push_back(detail::serialize_gold_record(g));
        }
        persist(gold_log, lines);
        m_gold.insert(m_gold.end(), batch.begin(), batch.end());
        return batch.size();
    }

    const Claim& get_claim(std::string_view id) const { return get(m_claims, id, "claim"); }
    const Perspective& get_perspective(std::string_view id) const { return get(m_perspectives, id, "perspective"); }
    const EvidenceParagraph& get_evidence(std::string_view id) const { return get(m_evidence, id, "evidence"); }

    const Perspective* find_perspective(std::string_view id) const { return m_perspectives.find(id); }
    const EvidenceParagraph* find_evidence(std::string_view id) const { return m_evidence.find(id); }
    const Claim* find_claim(std::string_view id) const { return m_claims.find(id); }

    std::span<const Claim> claims() const noexcept { return m_claims.records(); }
    std::span<const Perspective> perspectives() const noexcept { return m_perspectives.records(); }
    std::span<const EvidenceParagraph> evidence() const noexcept { return m_evidence.records(); }
    std::span<const GoldAnnotation> gold() const noexcept { return m_gold; }

    const std::filesystem::path& directory() const noexcept { return m_dir; }

  private:
    static constexpr const char* claims_log = "claims.jsonl";
    static constexpr const char* perspectives_log = "perspectives.jsonl";
    static constexpr const char* evidence_log = "evidence.jsonl";
    static constexpr const char* gold_log = "gold.jsonl";

    static std::ifstream open_input(const std::filesystem::path& file)
    {
        std::ifstream in(file);
        if (!in) {
            throw Error(ErrorCode::io_failure, "cannot open " + file.string());
        }
        return in;
    }

    template <typename Record>
    std::size_t ingest_file(const std::filesystem::path& file, detail::RecordTable<Record>& table, const char* log)
    {
        auto in = open_input(file);
        return ingest_stream(in, table, log);
    }

    template <typename Record>
    std::size_t ingest_stream(std::istream& in, detail::RecordTable<Record>& table, const char* log)
    {
        auto batch = table.parse_batch(in);
        std::vector<std::string> lines;
        lines.reserve(batch.size());
        for (const auto& r : batch) {
            lines.push_back(detail::serialize_text_record(r));
        }
        persist(log, lines);
        auto count = batch.size();
        table.append(std::move(batch));
        return count;
    }

    void persist(const char* log, const std::vector<std::string>& lines) const
    {
        if (m_dir.empty() || lines.empty()) {
            return;
        }
        std::ofstream out(m_dir / log, std::ios::app | std::ios::binary);
        for (const auto& l : lines) {
            out << l << '\n';
        }
        out.flush();
        if (!out) {
            throw Error(ErrorCode::io_failure, "write failed: " + (m_dir / log).string());
        }
    }

    template <typename Record>
    void replay(const char* log, detail::RecordTable<Record>& table)
    {
        std::ifstream in(m_dir / log);
        if (!in) {
            return;
        }
        table.append(table.parse_batch(in));
    }

    template <typename Record>
    static const Record& get(const detail::RecordTable<Record>& table, std::string_view id, const char* kind)
    {
        if (const auto* r = table.find(id)) {
            return *r;
        }
        throw Error(ErrorCode::not_found, std::string(kind) + " '" + std::string(id) + "' not found");
    }

    std::filesystem::path m_dir;
    detail::RecordTable<Claim> m_claims;
    detail::RecordTable<Perspective> m_perspectives;
    detail::RecordTable<EvidenceParagraph> m_evidence;
    std::vector<GoldAnnotation> m_gold;
};

}  // namespace viewpoint
