#pragma once

#include <atomic>
#include <filesystem>
#include <iostream>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"
#include "viewpoint/feedback.hpp"
#include "viewpoint/json_io.hpp"
#include "viewpoint/runtime.hpp"

namespace viewpoint {

/// Status plus JSON body; an empty body means "no content".
struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

inline ApiResponse api_error(int status, std::string code, std::string message)
{
    return {status, {{"status", status}, {"code", std::move(code)}, {"message", std::move(message)}}};
}

/// Bounded map from query id to its result; least recently used entries are
/// evicted first.
class QueryCache {
  public:
    explicit QueryCache(std::size_t capacity) : m_capacity(std::max<std::size_t>(1, capacity)) {}

    void put(const std::string& id, std::shared_ptr<const QueryResult> result)
    {
        std::lock_guard lock(m_mutex);
        if (auto it = m_entries.find(id); it != m_entries.end()) {
            m_order.erase(it->second.second);
            m_entries.erase(it);
        }
        m_order.push_front(id);
        m_entries.emplace(id, std::make_pair(std::move(result), m_order.begin()));
        while (m_entries.size() > m_capacity) {
            m_entries.erase(m_order.back());
            m_order.pop_back();
        }
    }

    std::shared_ptr<const QueryResult> get(const std::string& id)
    {
        std::lock_guard lock(m_mutex);
        auto it = m_entries.find(id);
        if (it == m_entries.end()) {
            return nullptr;
        }
        m_order.splice(m_order.begin(), m_order, it->second.second);
        return it->second.first;
    }

    std::size_t size() const
    {
        std::lock_guard lock(m_mutex);
        return m_entries.size();
    }

  private:
    std::size_t m_capacity;
    mutable std::mutex m_mutex;
    std::list<std::string> m_order;
    std::unordered_map<std::string,
                       std::pair<std::shared_ptr<const QueryResult>, std::list<std::string>::iterator>>
        m_entries;
};

/// JSON API over the discovery engine:
///   POST /api/query     {claim, overrides?}             -> QueryResult (evidence unresolved)
///   GET  /api/evidence  ?query_id=..&perspective_ref=.. -> [ScoredEvidence]
///   POST /api/feedback  {query_id, perspective_ref, polarity} -> 204
///   GET  /api/health                                    -> {status, corpus_counts, backend}
/// Static UI assets are served from `/` when a directory is given.
class Service {
  public:
    struct Options {
        PipelineConfig defaults;
        std::size_t cache_size = 1024;
        std::filesystem::path static_dir;
    };

    Service(std::shared_ptr<FeedbackLog> log, Options options)
        : m_log(std::move(log)), m_options(std::move(options)), m_cache(m_options.cache_size)
    {
        if (!m_log) {
            throw Error(ErrorCode::invalid_argument, "service needs a feedback log");
        }
        m_options.defaults.evidence_mode = EvidenceMode::lazy;
        install_routes();
    }

    /// Until this is called every API endpoint answers 503.
    void set_runtime(Runtime runtime)
    {
        std::lock_guard lock(m_runtime_mutex);
        m_runtime = std::make_shared<const Runtime>(std::move(runtime));
    }

    httplib::Server& server() noexcept { return m_server; }

    int bind_to_any_port(const std::string& host = "127.0.0.1") { return m_server.bind_to_any_port(host); }
    bool bind(const std::string& host, int port) { return m_server.bind_to_port(host, port); }
    bool listen_after_bind() { return m_server.listen_after_bind(); }
    void stop() { m_server.stop(); }
    void wait_until_ready() const { m_server.wait_until_ready(); }

    ApiResponse query(const std::string& body)
    {
        auto rt = runtime();
        if (!rt) {
            return not_ready();
        }
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            return api_error(400, "bad_json", "request body must be a JSON object");
        }
        auto claim = j.find("claim");
        if (claim == j.end() || !claim->is_string()) {
            return api_error(400, "missing_claim", "field 'claim' must be a string");
        }
        auto claim_text = claim->get<std::string>();
        if (is_blank(claim_text)) {
            return api_error(400, "empty_claim", "claim must not be empty");
        }
        PipelineConfig config;
        try {
            config = apply_overrides(m_options.defaults, j.value("overrides", nlohmann::json()));
        } catch (const Error& e) {
            return api_error(422, "invalid_override", e.what());
        }
        config.evidence_mode = EvidenceMode::lazy;

        std::string query_id;
        try {
            query_id = m_log->log_query(normalize_whitespace(claim_text), config);
        } catch (const Error& e) {
            query_id = "unlogged-" + std::to_string(++m_unlogged);
            std::cerr << "warning: query log degraded: " << e.what() << '\n';
        }
        auto result = std::make_shared<QueryResult>(rt->engine->discover_perspectives(claim_text, config));
        result->query_id = query_id;
        m_cache.put(query_id, result);
        return {200, to_json(*result)};
    }

    ApiResponse evidence(const std::string& query_id, const std::string& perspective_ref)
    {
        auto rt = runtime();
        if (!rt) {
            return not_ready();
        }
        if (query_id.empty() || perspective_ref.empty()) {
            return api_error(400, "missing_parameter", "query_id and perspective_ref are required");
        }
        auto result = m_cache.get(query_id);
        if (!result) {
            if (m_log->has_query(query_id)) {
                return api_error(404, "query_expired", "query '" + query_id + "' is no longer cached; run it again");
            }
            return api_error(404, "unknown_query", "unknown query_id '" + query_id + "'");
        }
        const auto* p = result->find_perspective(perspective_ref);
        if (!p) {
            return api_error(404, "unknown_perspective",
                             "perspective '" + perspective_ref + "' is not part of query '" + query_id + "'");
        }
        auto list = rt->engine->resolve_evidence(result->claim.text, p->perspective, result->config_used,
                                                 result->expansion.get());
        return {200, to_json(list)};
    }

    ApiResponse feedback(const std::string& body)
    {
        auto rt = runtime();
        if (!rt) {
            return not_ready();
        }
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            return api_error(400, "bad_json", "request body must be a JSON object");
        }
        auto str = [&](const char* key) {
            auto it = j.find(key);
            return (it != j.end() && it->is_string()) ? it->get<std::string>() : std::string();
        };
        auto query_id = str("query_id");
        auto ref = str("perspective_ref");
        auto polarity = parse_polarity(str("polarity"));
        if (!polarity) {
            return api_error(400, "bad_polarity", "polarity must be \"up\" or \"down\"");
        }
        if (query_id.empty() || ref.empty()) {
            return api_error(400, "missing_parameter", "query_id and perspective_ref are required");
        }
        if (!m_log->has_query(query_id)) {
            return api_error(404, "unknown_query", "unknown query_id '" + query_id + "'");
        }
        std::string text;
        if (auto result = m_cache.get(query_id)) {
            const auto* p = result->find_perspective(ref);
            if (!p) {
                return api_error(404, "unknown_perspective",
                                 "perspective '" + ref + "' is not part of query '" + query_id + "'");
            }
            text = p->perspective.text;
        } else if (const auto* p = rt->store->find_perspective(ref)) {
            text = p->text;
        } else {
            return api_error(404, "query_expired", "query '" + query_id + "' is no longer cached");
        }
        m_log->record_feedback({query_id, ref, text, *polarity, 0});
        return {204, nullptr};
    }

    ApiResponse health()
    {
        auto rt = runtime();
        if (!rt) {
            return {503, {{"status", "starting"}}};
        }
        std::string status = "ok";
        if (rt->remote && !rt->remote->probe()) {
            status = "degraded";
        }
        return {200,
                {{"status", status},
                 {"corpus_counts",
                  {{"claims", rt->store->claims().size()},
                   {"perspectives", rt->store->perspectives().size()},
                   {"evidence", rt->store->evidence().size()}}},
                 {"backend", std::string(rt->scorer->name())}}};
    }

  private:
    std::shared_ptr<const Runtime> runtime() const
    {
        std::lock_guard lock(m_runtime_mutex);
        return m_runtime;
    }

    static ApiResponse not_ready() { return api_error(503, "not_ready", "index build has not completed"); }

    static void write(httplib::Response& res, const ApiResponse& r)
    {
        res.status = r.status;
        if (r.status != 204) {
            res.set_content(r.body.dump(), "application/json");
        }
    }

    void install_routes()
    {
        m_server.Post("/api/query", [this](const httplib::Request& req, httplib::Response& res) {
            write(res, query(req.body));
        });
        m_server.Get("/api/evidence", [this](const httplib::Request& req, httplib::Response& res) {
            write(res, evidence(req.get_param_value("query_id"), req.get_param_value("perspective_ref")));
        });
        m_server.Post("/api/feedback", [this](const httplib::Request& req, httplib::Response& res) {
            write(res, feedback(req.body));
        });
        m_server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) { write(res, health()); });
        m_server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string message = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                message = e.what();
            } catch (...) {
            }
            write(res, api_error(500, "internal", message));
        });
        m_server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) {
                return httplib::Server::HandlerResponse::Unhandled;
            }
            write(res, api_error(res.status, res.status == 404 ? "not_found" : "http_error",
                                 httplib::status_message(res.status)));
            return httplib::Server::HandlerResponse::Handled;
        });
        if (!m_options.static_dir.empty()) {
            if (!m_server.set_mount_point("/", m_options.static_dir.string())) {
                throw Error(ErrorCode::io_failure, "static directory not found: " + m_options.static_dir.string());
            }
        }
    }

    std::shared_ptr<FeedbackLog> m_log;
    Options m_options;
    QueryCache m_cache;
    mutable std::mutex m_runtime_mutex;
    std::shared_ptr<const Runtime> m_runtime;
    std::atomic<std::size_t> m_unlogged{0};
    httplib::Server m_server;
};

}  // namespace viewpoint
