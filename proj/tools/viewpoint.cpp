#include <csignal>
#include <pthread.h>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "viewpoint/evaluation.hpp"
#include "viewpoint/feedback.hpp"
#include "viewpoint/json_io.hpp"
#include "viewpoint/runtime.hpp"
#include "viewpoint/service.hpp"

using namespace viewpoint;

namespace {

Settings settings_from(const std::string& config_path, const std::string& store_dir)
{
    Settings s = config_path.empty() ? Settings{} : load_settings(config_path);
    if (!store_dir.empty()) {
        s.store_dir = store_dir;
    }
    return s;
}

template <typename Record>
std::vector<Record> read_records(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io_failure, "cannot open " + path);
    }
    std::vector<Record> out;
    detail::for_each_line(in, [&](std::string_view line, std::size_t line_no) {
        if constexpr (std::is_same_v<Record, GoldAnnotation>) {
            out.push_back(detail::parse_gold_record(line, line_no));
        } else {
            out.push_back(detail::parse_text_record<Record>(line, line_no));
        }
    });
    return out;
}

void print_text(const QueryResult& r)
{
    std::cout << "claim: " << r.claim.text << "\n";
    auto side = [](const char* title, const std::vector<ClusterOutput>& clusters) {
        std::cout << "\n" << title << " (" << clusters.size() << ")\n";
        for (const auto& c : clusters) {
            const auto& p = c.representative;
            std::cout << "  [" << std::fixed << std::setprecision(3) << "rel " << p.relevance << ", stance "
                      << p.stance << "] " << p.perspective.text << "  (" << p.perspective.id << ")\n";
            for (const auto& m : c.members) {
                if (m.perspective.id != p.perspective.id) {
                    std::cout << "      ~ " << m.perspective.text << "\n";
                }
            }
            for (const auto& e : p.evidence) {
                std::cout << "      evidence " << e.evidence.id << " (" << e.verification_score
                          << "): " << e.evidence.text.substr(0, 120) << (e.evidence.text.size() > 120 ? "..." : "")
                          << "\n";
            }
        }
    };
    side("supporting", r.supporting);
    side("opposing", r.opposing);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"viewpoint: discover stance-labeled, evidence-backed perspectives for a claim"};
    app.require_subcommand(1);

    std::string config_path;
    std::string store_dir;

    auto* ingest = app.add_subcommand("ingest", "Load corpora into a store directory");
    std::string claims_file, perspectives_file, evidence_file, gold_file;
    ingest->add_option("--config", config_path, "Config file (store_dir)");
    ingest->add_option("--store", store_dir, "Store directory (overrides config)");
    ingest->add_option("--claims", claims_file, "Claims JSONL");
    ingest->add_option("--perspectives", perspectives_file, "Perspectives JSONL");
    ingest->add_option("--evidence", evidence_file, "Evidence JSONL");
    ingest->add_option("--gold", gold_file, "Gold annotations JSONL");

    auto* query = app.add_subcommand("query", "Run one claim through the pipeline");
    std::string claim;
    bool eager = false;
    bool as_json = false;
    query->add_option("--claim", claim, "Claim text")->required();
    query->add_option("--config", config_path, "Config file");
    query->add_option("--store", store_dir, "Store directory (overrides config)");
    query->add_flag("--eager-evidence", eager, "Resolve evidence for every surviving perspective");
    query->add_flag("--json", as_json, "Print the result as JSON");

    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    int port = 8080;
    std::string host = "0.0.0.0";
    std::string static_dir;
    serve->add_option("--config", config_path, "Config file")->required();
    serve->add_option("--port", port, "Listen port");
    serve->add_option("--host", host, "Listen address");
    serve->add_option("--static", static_dir, "Directory with UI assets served at /");

    auto* eval = app.add_subcommand("eval", "Sweep gating thresholds against gold annotations");
    std::string eval_claims, eval_gold, sweep;
    eval->add_option("--claims", eval_claims, "Claims JSONL")->required();
    eval->add_option("--gold", eval_gold, "Gold annotations JSONL")->required();
    eval->add_option("--sweep", sweep, "e.g. t1=0.1..0.9:0.1,t2=0..0.3:0.1");
    eval->add_option("--config", config_path, "Config file");
    eval->add_option("--store", store_dir, "Store directory (overrides config)");

    auto* export_cmd = app.add_subcommand("export-feedback", "Write feedback as training pairs (JSONL)");
    std::string feedback_dir, out_path;
    export_cmd->add_option("--config", config_path, "Config file (feedback_dir)");
    export_cmd->add_option("--feedback-dir", feedback_dir, "Feedback directory (overrides config)");
    export_cmd->add_option("--out", out_path, "Output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*ingest) {
            auto s = settings_from(config_path, store_dir);
            if (s.store_dir.empty()) {
                s.store_dir = "viewpoint-store";
            }
            auto store = CorpusStore::open(s.store_dir);
            if (!claims_file.empty()) {
                std::cout << "claims: " << store.ingest_claims(claims_file) << "\n";
            }
            if (!perspectives_file.empty()) {
                std::cout << "perspectives: " << store.ingest_perspectives(perspectives_file) << "\n";
            }
            if (!evidence_file.empty()) {
                std::cout << "evidence: " << store.ingest_evidence(evidence_file) << "\n";
            }
            if (!gold_file.empty()) {
                std::cout << "gold: " << store.ingest_gold(gold_file) << "\n";
            }
            return 0;
        }

        if (*query) {
            auto s = settings_from(config_path, store_dir);
            auto rt = build_runtime(s);
            auto config = s.pipeline;
            if (eager) {
                config.evidence_mode = EvidenceMode::eager;
            }
            std::string query_id;
            if (!s.feedback_dir.empty() && !is_blank(claim)) {
                FeedbackLog log(s.feedback_dir);
                query_id = log.log_query(normalize_whitespace(claim), config);
            }
            auto result = rt.engine->discover_perspectives(claim, config);
            result.query_id = query_id;
            if (as_json) {
                std::cout << to_json(result).dump(2) << "\n";
            } else {
                print_text(result);
            }
            return 0;
        }

        if (*serve) {
            auto s = load_settings(config_path);
            auto log = std::make_shared<FeedbackLog>(s.feedback_dir);
            Service service(log, {s.pipeline, s.query_cache_size, static_dir});
            if (!service.bind(host, port)) {
                std::cerr << "cannot bind " << host << ":" << port << "\n";
                return 1;
            }
            // Signals are taken synchronously by one thread so stopping the server
            // never runs inside a signal handler.
            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);
            std::thread waiter([&] {
                int sig = 0;
                sigwait(&signals, &sig);
                service.stop();
            });
            // Health answers 503 until the indexes are built.
            std::thread loader([&] {
                try {
                    service.set_runtime(build_runtime(s));
                    std::cerr << "ready on " << host << ":" << port << "\n";
                } catch (const std::exception& e) {
                    std::cerr << "startup failed: " << e.what() << "\n";
                    service.stop();
                }
            });
            service.listen_after_bind();
            loader.join();
            pthread_kill(waiter.native_handle(), SIGTERM);
            waiter.join();
            return 0;
        }

        if (*eval) {
            auto s = settings_from(config_path, store_dir);
            auto rt = build_runtime(s);
            auto points = evaluate_gating(*rt.engine, read_records<Claim>(eval_claims),
                                          read_records<GoldAnnotation>(eval_gold), s.pipeline, parse_sweep(sweep));
            std::cout << "t1\tt2\tt4\tpersp_precision\tpersp_recall\tevid_precision\tevid_recall\n";
            std::cout << std::fixed << std::setprecision(4);
            for (const auto& p : points) {
                std::cout << p.t1 << '\t' << p.t2 << '\t' << p.t4 << '\t' << p.perspectives.precision() << '\t'
                          << p.perspectives.recall() << '\t' << p.evidence.precision() << '\t' << p.evidence.recall()
                          << '\n';
            }
            return 0;
        }

        if (*export_cmd) {
            auto s = config_path.empty() ? Settings{} : load_settings(config_path);
            if (!feedback_dir.empty()) {
                s.feedback_dir = feedback_dir;
            }
            if (s.feedback_dir.empty()) {
                std::cerr << "no feedback directory given\n";
                return 2;
            }
            FeedbackLog log(s.feedback_dir);
            std::cout << log.export_training_pairs(out_path) << " pairs written\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
