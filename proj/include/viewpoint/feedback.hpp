#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "viewpoint/config.hpp"
#include "viewpoint/error.hpp"
#include "viewpoint/text.hpp"

namespace viewpoint {

enum class Polarity { up, down };

inline std::optional<Polarity> parse_polarity(std::string_view s)
{
    if (s == "up") return Polarity::up;
    if (s == "down") return Polarity::down;
    return std::nullopt;
}

constexpr std::string_view to_string(Polarity p) noexcept { return p == Polarity::up ? "up" : "down"; }

struct QueryLogEntry {
    std::string query_id;
    std::string claim_text;
    std::int64_t timestamp = 0;  // UTC seconds
    nlohmann::json config;       // snapshot of the PipelineConfig used

    bool operator==(const QueryLogEntry&) const = default;
};

/// One thumbs judgment. perspective_ref is the corpus id, or the text ref of
/// an expansion candidate; perspective_text is kept whitespace-normalized.
struct FeedbackRecord {
    std::string query_id;
    std::string perspective_ref;
    std::string perspective_text;
    Polarity polarity = Polarity::up;
    std::int64_t timestamp = 0;

    bool operator==(const FeedbackRecord&) const = default;
};

/// Append-only log of issued queries and per-perspective feedback, stored as
/// two JSONL files. Every append is flushed before the call returns. All
/// methods are serialized by one mutex.
class FeedbackLog {
  public:
    using Clock = std::function<std::int64_t()>;

    static std::int64_t utc_seconds()
    {
        return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
            .count();
    }

    /// An empty `dir` keeps the log in memory only.
    explicit FeedbackLog(std::filesystem::path dir, Clock clock = utc_seconds)
        : m_dir(std::move(dir)), m_clock(std::move(clock))
    {
        if (m_dir.empty()) {
            return;
        }
        std::error_code ec;
        std::filesystem::create_directories(m_dir, ec);
        if (ec) {
            throw Error(ErrorCode::io_failure, "cannot create feedback directory " + m_dir.string());
        }
        replay();
    }

    FeedbackLog(const FeedbackLog&) = delete;
    FeedbackLog& operator=(const FeedbackLog&) = delete;

    /// Durably records a query and returns its fresh id.
    std::string log_query(std::string_view claim_text, const PipelineConfig& config)
    {
        std::lock_guard lock(m_mutex);
        QueryLogEntry e{"q-" + std::to_string(m_next_seq), std::string(claim_text), next_timestamp(), to_json(config)};
        append(queries_file, nlohmann::json{{"query_id", e.query_id},
                                            {"claim", e.claim_text},
                                            {"timestamp", e.timestamp},
                                            {"config", e.config}});
        ++m_next_seq;
        m_query_index.emplace(e.query_id, m_queries.size());
        m_queries.push_back(std::move(e));
        return m_queries.back().query_id;
    }

    /// Appends a judgment; the timestamp is assigned here. Throws not_found
    /// when the query id was never logged.
    void record_feedback(FeedbackRecord record)
    {
        std::lock_guard lock(m_mutex);
        if (!m_query_index.contains(record.query_id)) {
            throw Error(ErrorCode::not_found, "unknown query_id '" + record.query_id + "'");
        }
        record.perspective_text = normalize_whitespace(record.perspective_text);
        record.timestamp = next_timestamp();
        append(feedback_file, nlohmann::json{{"query_id", record.query_id},
                                             {"perspective_ref", record.perspective_ref},
                                             {"perspective", record.perspective_text},
                                             {"polarity", std::string(to_string(record.polarity))},
                                             {"timestamp", record.timestamp}});
        m_feedback.push_back(std::move(record));
    }

    bool has_query(std::string_view query_id) const
    {
        std::lock_guard lock(m_mutex);
        return m_query_index.contains(std::string(query_id));
    }

    std::optional<QueryLogEntry> find_query(std::string_view query_id) const
    {
        std::lock_guard lock(m_mutex);
        auto it = m_query_index.find(std::string(query_id));
        if (it == m_query_index.end()) {
            return std::nullopt;
        }
        return m_queries[it->second];
    }

    std::vector<QueryLogEntry> queries() const
    {
        std::lock_guard lock(m_mutex);
        return m_queries;
    }

    std::vector<FeedbackRecord> feedback() const
    {
        std::lock_guard lock(m_mutex);
        return m_feedback;
    }

    /// Latest record per (query_id, perspective_ref), ordered by timestamp,
    /// then query_id, then perspective_ref.
    std::vector<FeedbackRecord> latest_feedback() const
    {
        std::lock_guard lock(m_mutex);
        return latest_locked();
    }

    /// Writes one JSON line per (query, perspective) pair:
    /// {claim, perspective, label (1 = up, 0 = down), query_id, timestamp}.
    /// Returns the number of lines written.
    std::size_t export_training_pairs(const std::filesystem::path& path) const
    {
        std::vector<std::string> lines;
        {
            std::lock_guard lock(m_mutex);
            for (const auto& r : latest_locked()) {
                const auto& q = m_queries[m_query_index.at(r.query_id)];
                nlohmann::json j = {{"claim", q.claim_text},
                                    {"perspective", r.perspective_text},
                                    {"label", r.polarity == Polarity::up ? 1 : 0},
                                    {"query_id", r.query_id},
                                    {"timestamp", r.timestamp}};
                lines.push_back(j.dump());
            }
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        for (const auto& l : lines) {
            out << l << '\n';
        }
        out.flush();
        if (!out) {
            throw Error(ErrorCode::io_failure, "cannot write export file " + path.string());
        }
        return lines.size();
    }

  private:
    static constexpr const char* queries_file = "queries.jsonl";
    static constexpr const char* feedback_file = "feedback.jsonl";

    std::int64_t next_timestamp()
    {
        m_last_timestamp = std::max(m_last_timestamp, m_clock());
        return m_last_timestamp;
    }

    void append(const char* file, const nlohmann::json& j)
    {
        if (m_dir.empty()) {
            return;
        }
        std::ofstream out(m_dir / file, std::ios::app | std::ios::binary);
        out << j.dump() << '\n';
        out.flush();
        if (!out) {
            throw Error(ErrorCode::io_failure, "append failed: " + (m_dir / file).string());
        }
    }

    std::vector<FeedbackRecord> latest_locked() const
    {
        std::map<std::pair<std::string, std::string>, const FeedbackRecord*> latest;
        for (const auto& r : m_feedback) {
            latest[{r.query_id, r.perspective_ref}] = &r;
        }
        std::vector<FeedbackRecord> out;
        out.reserve(latest.size());
        for (const auto& [key, r] : latest) {
            out.push_back(*r);
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            return std::tie(a.timestamp, a.query_id, a.perspective_ref) <
                   std::tie(b.timestamp, b.query_id, b.perspective_ref);
        });
        return out;
    }

    void replay()
    {
        auto read = [&](const char* file, auto&& fn) {
            std::ifstream in(m_dir / file);
            std::string line;
            std::size_t line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                if (is_blank(line)) {
                    continue;
                }
                auto j = nlohmann::json::parse(line, nullptr, false);
                if (j.is_discarded()) {
                    throw Error(ErrorCode::malformed_input,
                                (m_dir / file).string() + " line " + std::to_string(line_no) + ": bad JSON");
                }
                try {
                    fn(j);
                } catch (const nlohmann::json::exception& e) {
                    throw Error(ErrorCode::malformed_input,
                                (m_dir / file).string() + " line " + std::to_string(line_no) + ": " + e.what());
                }
            }
        };
        read(queries_file, [&](const nlohmann::json& j) {
            QueryLogEntry e{j.at("query_id").get<std::string>(), j.at("claim").get<std::string>(),
                            j.at("timestamp").get<std::int64_t>(), j.value("config", nlohmann::json::object())};
            m_last_timestamp = std::max(m_last_timestamp, e.timestamp);
            m_query_index.emplace(e.query_id, m_queries.size());
            m_queries.push_back(std::move(e));
        });
        m_next_seq = m_queries.size() + 1;
        // Ids are "q-<n>"; keep counting past the highest one seen.
        for (const auto& q : m_queries) {
            if (q.query_id.starts_with("q-")) {
                try {
                    m_next_seq = std::max<std::size_t>(m_next_seq, std::stoull(q.query_id.substr(2)) + 1);
                } catch (const std::exception&) {
                }
            }
        }
        read(feedback_file, [&](const nlohmann::json& j) {
            auto polarity = parse_polarity(j.at("polarity").get<std::string>());
            if (!polarity) {
                throw Error(ErrorCode::malformed_input, "bad polarity in feedback log");
            }
            FeedbackRecord r{j.at("query_id").get<std::string>(), j.at("perspective_ref").get<std::string>(),
                             j.at("perspective").get<std::string>(), *polarity, j.at("timestamp").get<std::int64_t>()};
            m_last_timestamp = std::max(m_last_timestamp, r.timestamp);
            m_feedback.push_back(std::move(r));
        });
    }

    std::filesystem::path m_dir;
    Clock m_clock;
    mutable std::mutex m_mutex;
    std::vector<QueryLogEntry> m_queries;
    std::unordered_map<std::string, std::size_t> m_query_index;
    std::vector<FeedbackRecord> m_feedback;
    std::size_t m_next_seq = 1;
    std::int64_t m_last_timestamp = 0;
};

}  // namespace viewpoint
