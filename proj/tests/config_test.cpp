#include <gtest/gtest.h>

#include <sstream>

#include "support/fixtures.hpp"
#include "viewpoint/config.hpp"

using namespace viewpoint;

TEST(PipelineConfig, Defaults)
{
    PipelineConfig c;
    EXPECT_EQ(c.t1, 0.5);
    EXPECT_EQ(c.t2, 0.1);
    EXPECT_EQ(c.t4, 0.5);
    EXPECT_EQ(c.k_perspectives, 30u);
    EXPECT_EQ(c.k_evidence, 20u);
    EXPECT_EQ(c.expansion_docs, 10u);
    EXPECT_EQ(c.bm25_k1, 1.2);
    EXPECT_EQ(c.bm25_b, 0.75);
    EXPECT_NO_THROW(c.validate());
}

TEST(PipelineConfig, ValidateRejectsOutOfRange)
{
    for (auto mutate : std::vector<std::function<void(PipelineConfig&)>>{
             [](auto& c) { c.t1 = 1.5; }, [](auto& c) { c.t2 = -0.1; }, [](auto& c) { c.t4 = 2; },
             [](auto& c) { c.eps = 1.1; }, [](auto& c) { c.min_pts = 0; }, [](auto& c) { c.k_evidence = 0; },
             [](auto& c) { c.bm25_b = 1.5; }, [](auto& c) { c.bm25_k1 = -1; }}) {
        PipelineConfig c;
        mutate(c);
        EXPECT_THROW(c.validate(), Error);
    }
}

TEST(ParseSettings, ReadsAllKeys)
{
    std::istringstream in(R"(# sample
t1 = 0.3
t2=0.2
t4 = 0.6
eps = 0.5
min_pts = 3
k_perspectives = 15
k_evidence = 5
expansion_docs = 4
bm25_k1 = 1.5
bm25_b = 0.5
evidence_mode = lazy
scorer_backend = remote
remote_url = http://localhost:9000/score
remote_max_in_flight = 4
remote_timeout_s = 2.5
perspectives_path = corpus/p.jsonl
evidence_path = /abs/e.jsonl
query_cache_size = 16
)");
    auto s = parse_settings(in, "/base");
    EXPECT_EQ(s.pipeline.t1, 0.3);
    EXPECT_EQ(s.pipeline.t2, 0.2);
    EXPECT_EQ(s.pipeline.min_pts, 3u);
    EXPECT_EQ(s.pipeline.k_perspectives, 15u);
    EXPECT_EQ(s.pipeline.evidence_mode, EvidenceMode::lazy);
    EXPECT_EQ(s.scorer_backend, ScorerBackend::remote);
    EXPECT_EQ(s.remote_url, "http://localhost:9000/score");
    EXPECT_EQ(s.remote_max_in_flight, 4u);
    EXPECT_EQ(s.remote_timeout_s, 2.5);
    EXPECT_EQ(s.perspectives_path, std::filesystem::path("/base/corpus/p.jsonl"));
    EXPECT_EQ(s.evidence_path, std::filesystem::path("/abs/e.jsonl"));
    EXPECT_EQ(s.query_cache_size, 16u);
}

TEST(ParseSettings, ErrorsNameTheLine)
{
    auto message = [](const std::string& text) {
        std::istringstream in(text);
        try {
            parse_settings(in);
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message("t1 = 0.2\nbogus = 1\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("t1 = abc\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("just words\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("scorer_backend = magic\n").find("line 1"), std::string::npos);
    EXPECT_FALSE(message("t1 = 1.5\n").empty());
    EXPECT_FALSE(message("min_pts = -1\n").empty());
}

TEST(LoadSettings, BundledConfigResolvesPaths)
{
    auto s = load_settings(fixtures::data_dir() / "viewpoint.conf");
    EXPECT_TRUE(std::filesystem::exists(s.perspectives_path)) << s.perspectives_path;
    EXPECT_TRUE(std::filesystem::exists(s.evidence_path));
    EXPECT_TRUE(std::filesystem::exists(s.cue_lexicon_path));
    EXPECT_TRUE(std::filesystem::is_directory(s.expansion_dir));
    EXPECT_THROW(load_settings(fixtures::data_dir() / "missing.conf"), Error);
}

TEST(Overrides, AppliesPartialConfig)
{
    PipelineConfig base;
    auto c = apply_overrides(base, {{"t1", 0.2}, {"k_evidence", 3}, {"evidence_mode", "eager"}});
    EXPECT_EQ(c.t1, 0.2);
    EXPECT_EQ(c.k_evidence, 3u);
    EXPECT_EQ(c.t2, base.t2);
    EXPECT_EQ(apply_overrides(base, nullptr), base);
    EXPECT_EQ(apply_overrides(base, nlohmann::json::object()), base);
}

TEST(Overrides, RejectsBadValues)
{
    PipelineConfig base;
    EXPECT_THROW(apply_overrides(base, {{"t1", 1.5}}), Error);
    EXPECT_THROW(apply_overrides(base, {{"t1", "0.2"}}), Error);
    EXPECT_THROW(apply_overrides(base, {{"k_evidence", -1}}), Error);
    EXPECT_THROW(apply_overrides(base, {{"k_evidence", 2.5}}), Error);
    EXPECT_THROW(apply_overrides(base, {{"unknown", 1}}), Error);
    EXPECT_THROW(apply_overrides(base, {{"evidence_mode", "sometimes"}}), Error);
    EXPECT_THROW(apply_overrides(base, nlohmann::json::array()), Error);
}

TEST(Overrides, JsonRoundTrip)
{
    PipelineConfig c;
    c.t1 = 0.123456789;
    c.eps = 0.25;
    c.evidence_mode = EvidenceMode::lazy;
    EXPECT_EQ(apply_overrides(PipelineConfig{}, to_json(c)), c);
}
