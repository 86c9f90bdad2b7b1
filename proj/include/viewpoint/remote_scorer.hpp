#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <regex>
#include <semaphore>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "viewpoint/scorers.hpp"

namespace viewpoint {

struct RemoteEndpoint {
    std::string scheme_host_port;  // e.g. "http://127.0.0.1:9000"
    std::string path;              // e.g. "/score"

    static RemoteEndpoint parse(const std::string& url)
    {
        static const std::regex pattern(R"(^(https?://[^/\s]+)(/[^\s]*)?$)");
        std::smatch m;
        if (!std::regex_match(url, m, pattern)) {
            throw Error(ErrorCode::invalid_argument, "remote scorer url is not http(s)://host[:port][/path]: " + url);
        }
        return {m[1].str(), m[2].matched ? m[2].str() : "/"};
    }
};

struct RemoteScorerOptions {
    std::string url;
    std::size_t max_in_flight = 8;
    std::chrono::milliseconds timeout{10'000};
};

/// Request body for one scoring call on the remote wire protocol.
inline nlohmann::json to_wire(const ScoreRequest& r)
{
    nlohmann::json j = {{"task", std::string(wire_name(r.task))}, {"claim", r.claim}, {"perspective", r.perspective}};
    if (r.perspective2) {
        j["perspective2"] = *r.perspective2;
    }
    if (r.evidence) {
        j["evidence"] = *r.evidence;
    }
    return j;
}

inline ScoreRequest score_request_from_wire(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw Error(ErrorCode::malformed_input, "score request must be a JSON object");
    }
    auto str = [&](const char* key) -> std::optional<std::string> {
        auto it = j.find(key);
        if (it == j.end()) {
            return std::nullopt;
        }
        if (!it->is_string()) {
            throw Error(ErrorCode::malformed_input, std::string("field '") + key + "' must be a string");
        }
        return it->get<std::string>();
    };
    auto task = str("task");
    auto parsed = task ? parse_task(*task) : std::nullopt;
    if (!parsed) {
        throw Error(ErrorCode::malformed_input, "task must be one of C1..C4");
    }
    ScoreRequest r{*parsed, str("claim").value_or(""), str("perspective").value_or(""), str("perspective2"),
                   str("evidence")};
    r.validate();
    return r;
}

/// Adapter for an external model server. Each call POSTs the request as JSON
/// and expects {"score": number}. Transport failures, bad bodies and
/// out-of-range scores fall back to the local scorer and record a warning;
/// nothing is surfaced to the caller.
class RemoteScorer final : public Scorer {
  public:
    using WarningSink = std::function<void(const std::string&)>;

    RemoteScorer(RemoteScorerOptions options, std::shared_ptr<const Scorer> fallback, WarningSink sink = {})
        : m_options(std::move(options)), m_fallback(std::move(fallback)), m_sink(std::move(sink))
    {
        if (m_options.url.empty()) {
            throw Error(ErrorCode::unavailable, "remote scorer backend selected but no remote_url configured");
        }
        if (!m_fallback) {
            throw Error(ErrorCode::invalid_argument, "remote scorer needs a fallback scorer");
        }
        if (m_options.max_in_flight == 0) {
            throw Error(ErrorCode::invalid_argument, "remote scorer max_in_flight must be >= 1");
        }
        m_endpoint = RemoteEndpoint::parse(m_options.url);
        m_slots = std::make_unique<std::counting_semaphore<max_slots>>(
            static_cast<std::ptrdiff_t>(std::min<std::size_t>(m_options.max_in_flight, max_slots)));
    }

    std::string_view name() const noexcept override { return "remote"; }
    std::size_t max_in_flight() const noexcept override { return m_options.max_in_flight; }

    /// True when the endpoint answers a trivial request with a valid score.
    bool probe() const
    {
        auto value = call(ScoreRequest::relevance("probe", "probe"));
        return value.has_value();
    }

    std::size_t warning_count() const noexcept { return m_warning_count.load(); }

    std::vector<std::string> warnings() const
    {
        std::lock_guard lock(m_warnings_mutex);
        return m_warnings;
    }

  protected:
    double do_relevance(std::string_view claim, std::string_view perspective) const override
    {
        return remote_or_fallback(ScoreRequest::relevance(std::string(claim), std::string(perspective)));
    }

    double do_stance(std::string_view claim, std::string_view perspective) const override
    {
        return remote_or_fallback(ScoreRequest::stance(std::string(claim), std::string(perspective)));
    }

    double do_equivalence(std::string_view claim, std::string_view p1, std::string_view p2) const override
    {
        return remote_or_fallback(ScoreRequest::equivalence(std::string(claim), std::string(p1), std::string(p2)));
    }

    double do_evidence(std::string_view claim, std::string_view perspective, std::string_view evidence) const override
    {
        return remote_or_fallback(
            ScoreRequest::evidence_check(std::string(claim), std::string(perspective), std::string(evidence)));
    }

  private:
    static constexpr std::ptrdiff_t max_slots = 1024;

    double remote_or_fallback(const ScoreRequest& r) const
    {
        if (auto v = call(r)) {
            return *v;
        }
        return m_fallback->score(r);
    }

    std::optional<double> call(const ScoreRequest& r) const
    {
        m_slots->acquire();
        struct Release {
            std::counting_semaphore<max_slots>* s;
            ~Release() { s->release(); }
        } release{m_slots.get()};

        httplib::Client client(m_endpoint.scheme_host_port);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(m_options.timeout);
        auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(m_options.timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());

        auto task = std::string(wire_name(r.task));
        auto res = client.Post(m_endpoint.path, to_wire(r).dump(), "application/json");
        if (!res) {
            warn(task + ": remote scorer unreachable (" + httplib::to_string(res.error()) + "), using fallback");
            return std::nullopt;
        }
        if (res->status != 200) {
            warn(task + ": remote scorer returned HTTP " + std::to_string(res->status) + ", using fallback");
            return std::nullopt;
        }
        auto body = nlohmann::json::parse(res->body, nullptr, false);
        if (body.is_discarded() || !body.is_object() || !body.contains("score") || !body["score"].is_number()) {
            warn(task + ": remote scorer reply lacks numeric 'score', using fallback");
            return std::nullopt;
        }
        double value = body["score"].get<double>();
        if (!in_range(r.task, value)) {
            warn(task + ": remote score " + std::to_string(value) + " out of range, using fallback");
            return std::nullopt;
        }
        return value;
    }

    void warn(const std::string& message) const
    {
        ++m_warning_count;
        {
            std::lock_guard lock(m_warnings_mutex);
            if (m_warnings.size() < 256) {
                m_warnings.push_back(message);
            }
        }
        if (m_sink) {
            m_sink(message);
        } else {
            std::cerr << "warning: " << message << '\n';
        }
    }

    RemoteScorerOptions m_options;
    RemoteEndpoint m_endpoint;
    std::shared_ptr<const Scorer> m_fallback;
    WarningSink m_sink;
    std::unique_ptr<std::counting_semaphore<max_slots>> m_slots;
    mutable std::atomic<std::size_t> m_warning_count{0};
    mutable std::mutex m_warnings_mutex;
    mutable std::vector<std::string> m_warnings;
};

}  // namespace viewpoint
