#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "viewpoint/error.hpp"
#include "viewpoint/retrieval.hpp"
#include "viewpoint/text.hpp"

namespace viewpoint {

enum class EvidenceMode { eager, lazy };

constexpr std::string_view to_string(EvidenceMode m) noexcept { return m == EvidenceMode::eager ? "eager" : "lazy"; }

/// Thresholds, clustering parameters and candidate budgets for one query.
/// Comparisons against t1, t2 and t4 are strict.
struct PipelineConfig {
    double t1 = 0.5;  // relevance
    double t2 = 0.1;  // |stance|
    double t4 = 0.5;  // evidence verification
    double eps = 0.4;
    std::size_t min_pts = 2;
    std::size_t k_perspectives = 30;
    std::size_t k_evidence = 20;
    std::size_t expansion_docs = 10;
    double bm25_k1 = 1.2;
    double bm25_b = 0.75;
    EvidenceMode evidence_mode = EvidenceMode::eager;

    Bm25Params bm25() const noexcept { return {bm25_k1, bm25_b}; }

    void validate() const
    {
        auto unit = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw Error(ErrorCode::invalid_argument, std::string(name) + " must be in [0, 1]");
            }
        };
        unit(t1, "t1");
        unit(t2, "t2");
        unit(t4, "t4");
        unit(eps, "eps");
        unit(bm25_b, "bm25_b");
        if (!(bm25_k1 >= 0.0) || std::isinf(bm25_k1)) {
            throw Error(ErrorCode::invalid_argument, "bm25_k1 must be a finite value >= 0");
        }
        if (min_pts < 1) {
            throw Error(ErrorCode::invalid_argument, "min_pts must be >= 1");
        }
        if (k_perspectives < 1 || k_evidence < 1) {
            throw Error(ErrorCode::invalid_argument, "k_perspectives and k_evidence must be >= 1");
        }
    }

    bool operator==(const PipelineConfig&) const = default;
};

enum class ScorerBackend { baseline, gold, remote };

constexpr std::string_view to_string(ScorerBackend b) noexcept
{
    switch (b) {
    case ScorerBackend::baseline: return "baseline";
    case ScorerBackend::gold: return "gold";
    case ScorerBackend::remote: return "remote";
    }
    return "";
}

/// Everything a config file can carry: the pipeline parameters plus backend
/// selection and data locations.
struct Settings {
    PipelineConfig pipeline;
    ScorerBackend scorer_backend = ScorerBackend::baseline;
    std::string remote_url;
    std::size_t remote_max_in_flight = 8;
    double remote_timeout_s = 10.0;
    std::filesystem::path store_dir;
    std::filesystem::path claims_path;
    std::filesystem::path perspectives_path;
    std::filesystem::path evidence_path;
    std::filesystem::path gold_path;
    std::filesystem::path stopwords_path;
    std::filesystem::path cue_lexicon_path;
    std::filesystem::path expansion_dir;
    std::filesystem::path feedback_dir;
    std::size_t query_cache_size = 1024;
};

namespace detail {

    inline double parse_double(std::string_view key, std::string_view v)
    {
        double out = 0.0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
            throw Error(ErrorCode::invalid_argument, std::string(key) + ": not a number: '" + std::string(v) + "'");
        }
        return out;
    }

    inline std::size_t parse_count(std::string_view key, std::string_view v)
    {
        std::size_t out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size()) {
            throw Error(ErrorCode::invalid_argument,
                        std::string(key) + ": not a non-negative integer: '" + std::string(v) + "'");
        }
        return out;
    }

    /// Returns false when the key is not a pipeline field.
    inline bool set_pipeline_field(PipelineConfig& c, std::string_view key, std::string_view value)
    {
        if (key == "t1") c.t1 = parse_double(key, value);
        else if (key == "t2") c.t2 = parse_double(key, value);
        else if (key == "t4") c.t4 = parse_double(key, value);
        else if (key == "eps") c.eps = parse_double(key, value);
        else if (key == "min_pts") c.min_pts = parse_count(key, value);
        else if (key == "k_perspectives") c.k_perspectives = parse_count(key, value);
        else if (key == "k_evidence") c.k_evidence = parse_count(key, value);
        else if (key == "expansion_docs") c.expansion_docs = parse_count(key, value);
        else if (key == "bm25_k1") c.bm25_k1 = parse_double(key, value);
        else if (key == "bm25_b") c.bm25_b = parse_double(key, value);
        else if (key == "evidence_mode") {
            if (value == "eager") c.evidence_mode = EvidenceMode::eager;
            else if (value == "lazy") c.evidence_mode = EvidenceMode::lazy;
            else throw Error(ErrorCode::invalid_argument, "evidence_mode must be eager|lazy");
        } else {
            return false;
        }
        return true;
    }

}  // namespace detail

/// Parses `key = value` lines. '#' starts a comment line. Relative paths are
/// resolved against `base_dir`. Unknown keys are rejected.
inline Settings parse_settings(std::istream& in, const std::filesystem::path& base_dir = {})
{
    Settings s;
    std::string line;
    std::size_t line_no = 0;
    auto path_value = [&](std::string_view v) {
        std::filesystem::path p{std::string(v)};
        return (p.is_relative() && !base_dir.empty()) ? base_dir / p : p;
    };
    while (std::getline(in, line)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::malformed_input, "config line " + std::to_string(line_no) + ": expected key = value");
        }
        auto key = trim(t.substr(0, eq));
        auto value = trim(t.substr(eq + 1));
        try {
            if (detail::set_pipeline_field(s.pipeline, key, value)) {
                continue;
            }
            if (key == "scorer_backend") {
                if (value == "baseline") s.scorer_backend = ScorerBackend::baseline;
                else if (value == "gold") s.scorer_backend = ScorerBackend::gold;
                else if (value == "remote") s.scorer_backend = ScorerBackend::remote;
                else throw Error(ErrorCode::invalid_argument, "scorer_backend must be baseline|gold|remote");
            } else if (key == "remote_url") s.remote_url = value;
            else if (key == "remote_max_in_flight") s.remote_max_in_flight = detail::parse_count(key, value);
            else if (key == "remote_timeout_s") s.remote_timeout_s = detail::parse_double(key, value);
            else if (key == "store_dir") s.store_dir = path_value(value);
            else if (key == "claims_path") s.claims_path = path_value(value);
            else if (key == "perspectives_path") s.perspectives_path = path_value(value);
            else if (key == "evidence_path") s.evidence_path = path_value(value);
            else if (key == "gold_path") s.gold_path = path_value(value);
            else if (key == "stopwords_path") s.stopwords_path = path_value(value);
            else if (key == "cue_lexicon_path") s.cue_lexicon_path = path_value(value);
            else if (key == "expansion_dir") s.expansion_dir = path_value(value);
            else if (key == "feedback_dir") s.feedback_dir = path_value(value);
            else if (key == "query_cache_size") s.query_cache_size = detail::parse_count(key, value);
            else throw Error(ErrorCode::invalid_argument, "unknown key '" + std::string(key) + "'");
        } catch (const Error& e) {
            throw Error(ErrorCode::malformed_input, "config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    s.pipeline.validate();
    if (s.remote_max_in_flight < 1 || !(s.remote_timeout_s > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "remote_max_in_flight must be >= 1 and remote_timeout_s > 0");
    }
    if (s.query_cache_size < 1) {
        throw Error(ErrorCode::invalid_argument, "query_cache_size must be >= 1");
    }
    return s;
}

inline Settings load_settings(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) {
        throw Error(ErrorCode::io_failure, "cannot open config " + file.string());
    }
    return parse_settings(in, file.parent_path());
}

inline nlohmann::json to_json(const PipelineConfig& c)
{
    return {{"t1", c.t1},
            {"t2", c.t2},
            {"t4", c.t4},
            {"eps", c.eps},
            {"min_pts", c.min_pts},
            {"k_perspectives", c.k_perspectives},
            {"k_evidence", c.k_evidence},
            {"expansion_docs", c.expansion_docs},
            {"bm25_k1", c.bm25_k1},
            {"bm25_b", c.bm25_b},
            {"evidence_mode", std::string(to_string(c.evidence_mode))}};
}

/// Applies a partial config given as a JSON object. Numbers must be numbers,
/// counts must be non-negative integers; the result is validated. Throws
/// invalid_argument on any unknown key or bad value.
inline PipelineConfig apply_overrides(PipelineConfig base, const nlohmann::json& overrides)
{
    if (overrides.is_null()) {
        return base;
    }
    if (!overrides.is_object()) {
        throw Error(ErrorCode::invalid_argument, "overrides must be a JSON object");
    }
    for (const auto& [key, value] : overrides.items()) {
        std::string text;
        if (key == "evidence_mode") {
            if (!value.is_string()) {
                throw Error(ErrorCode::invalid_argument, "evidence_mode must be a string");
            }
            text = value.get<std::string>();
        } else if (key == "min_pts" || key == "k_perspectives" || key == "k_evidence" || key == "expansion_docs") {
            if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
                throw Error(ErrorCode::invalid_argument, key + " must be a non-negative integer");
            }
            text = std::to_string(value.get<std::int64_t>());
        } else {
            if (!value.is_number()) {
                throw Error(ErrorCode::invalid_argument, key + " must be a number");
            }
            text = nlohmann::json(value.get<double>()).dump();
        }
        if (!detail::set_pipeline_field(base, key, text)) {
            throw Error(ErrorCode::invalid_argument, "unknown override '" + key + "'");
        }
    }
    base.validate();
    return base;
}

}  // namespace viewpoint
