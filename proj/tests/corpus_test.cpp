#include <gtest/gtest.h>

#include <sstream>

#include "support/fixtures.hpp"
#include "viewpoint/corpus.hpp"

using namespace viewpoint;
using fixtures::TempDir;
using fixtures::write_file;

namespace {

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::invalid_argument;
}

std::string message_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Ingest, CountsValidRecords)
{
    TempDir dir;
    write_file(dir / "p.jsonl", R"({"id":"p1","text":"one"}
{"id":"p2","text":"two"}
{"id":"p3","text":"three","source":"expansion"}
)");
    auto store = CorpusStore::open(dir / "store");
    EXPECT_EQ(store.ingest_perspectives(dir / "p.jsonl"), 3u);
    EXPECT_EQ(store.get_perspective("p3").source, Source::expansion);
    EXPECT_EQ(store.get_perspective("p1").source, Source::corpus);
}

TEST(Ingest, EmptyFileIngestsNothing)
{
    TempDir dir;
    write_file(dir / "e.jsonl", "");
    auto store = CorpusStore::open(dir / "store");
    EXPECT_EQ(store.ingest_evidence(dir / "e.jsonl"), 0u);
    EXPECT_EQ(store.ingest_perspectives(dir / "e.jsonl"), 0u);
}

TEST(Ingest, DuplicateIdNamesLineAndId)
{
    std::istringstream in(R"({"id":"p1","text":"x"}
{"id":"p1","text":"y"}
)");
    CorpusStore store;
    auto msg = message_of([&] { store.ingest_perspectives(in); });
    EXPECT_NE(msg.find("duplicate id"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("p1"), std::string::npos) << msg;
    EXPECT_TRUE(store.perspectives().empty()) << "failed batch must leave no partial state";
}

TEST(Ingest, ReingestingSameIdAlwaysErrors)
{
    CorpusStore store;
    std::istringstream a(R"({"id":"p1","text":"x"})");
    store.ingest_perspectives(a);
    std::istringstream b(R"({"id":"p1","text":"x"})");
    EXPECT_EQ(code_of([&] { store.ingest_perspectives(b); }), ErrorCode::duplicate_id);
    EXPECT_EQ(store.get_perspective("p1").text, "x");
}

TEST(Ingest, BlankTextIsRejected)
{
    CorpusStore store;
    std::istringstream in(R"({"id":"e1","text":"fine"}
{"id":"e2","text":"   "}
)");
    auto msg = message_of([&] { store.ingest_evidence(in); });
    EXPECT_NE(msg.find("empty text"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(Ingest, MalformedLineNamesLineNumber)
{
    CorpusStore store;
    std::istringstream in("{\"id\":\"p1\",\"text\":\"ok\"}\n\n{not json\n");
    auto msg = message_of([&] { store.ingest_perspectives(in); });
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;

    std::istringstream missing(R"({"id":"p1"})");
    EXPECT_EQ(code_of([&] { store.ingest_perspectives(missing); }), ErrorCode::malformed_input);
    std::istringstream bad_source(R"({"id":"p1","text":"t","source":"web"})");
    EXPECT_EQ(code_of([&] { store.ingest_perspectives(bad_source); }), ErrorCode::malformed_input);
    std::istringstream numeric_id(R"({"id":7,"text":"t"})");
    EXPECT_EQ(code_of([&] { store.ingest_perspectives(numeric_id); }), ErrorCode::malformed_input);
}

TEST(Get, RoundTripAndNotFound)
{
    CorpusStore store;
    std::istringstream in(R"({"id":"p1","text":"x"})");
    store.ingest_perspectives(in);
    EXPECT_EQ(store.get_perspective("p1"), (Perspective{"p1", "x", Source::corpus, ""}));
    EXPECT_EQ(code_of([&] { store.get_perspective("absent"); }), ErrorCode::not_found);
    EXPECT_EQ(code_of([&] { store.get_evidence("absent"); }), ErrorCode::not_found);
}

TEST(Get, RecordsSurviveReopen)
{
    TempDir dir;
    write_file(dir / "p.jsonl", "{\"id\":\"p1\",\"text\":\"x \\\"quoted\\\" é\"}\n");
    write_file(dir / "e.jsonl", "{\"id\":\"e1\",\"text\":\"para\",\"source\":\"expansion\",\"uri\":\"u\"}\n");
    write_file(dir / "c.jsonl", "{\"id\":\"c1\",\"text\":\"claim\"}\n");
    write_file(dir / "g.jsonl",
               R"({"claim_id":"c1","perspective_id":"p1","stance":"oppose","cluster_id":"k","evidence_ids":["e1"]})"
               "\n");
    {
        auto store = CorpusStore::open(dir / "store");
        store.ingest_claims(dir / "c.jsonl");
        store.ingest_perspectives(dir / "p.jsonl");
        store.ingest_evidence(dir / "e.jsonl");
        store.ingest_gold(dir / "g.jsonl");
    }
    auto reopened = CorpusStore::open(dir / "store");
    EXPECT_EQ(reopened.get_perspective("p1").text, "x \"quoted\" é");
    EXPECT_EQ(reopened.get_evidence("e1"), (EvidenceParagraph{"e1", "para", Source::expansion, "u"}));
    EXPECT_EQ(reopened.get_claim("c1").text, "claim");
    ASSERT_EQ(reopened.gold().size(), 1u);
    EXPECT_EQ(reopened.gold()[0],
              (GoldAnnotation{"c1", "p1", StanceLabel::oppose, "k", {"e1"}}));
    // Still rejects ids that only exist in the persisted log.
    EXPECT_EQ(code_of([&] { reopened.ingest_perspectives(dir / "p.jsonl"); }), ErrorCode::duplicate_id);
}

TEST(Gold, ReferencesMustResolve)
{
    CorpusStore store;
    std::istringstream c(R"({"id":"c1","text":"claim"})");
    std::istringstream p(R"({"id":"p1","text":"persp"})");
    store.ingest_claims(c);
    store.ingest_perspectives(p);
    std::istringstream bad(
        R"({"claim_id":"c1","perspective_id":"p1","stance":"support","cluster_id":"k","evidence_ids":["e9"]})");
    EXPECT_EQ(code_of([&] { store.ingest_gold(bad); }), ErrorCode::not_found);
    std::istringstream bad_stance(
        R"({"claim_id":"c1","perspective_id":"p1","stance":"neutral","cluster_id":"k","evidence_ids":[]})");
    EXPECT_EQ(code_of([&] { store.ingest_gold(bad_stance); }), ErrorCode::malformed_input);
    std::istringstream good(
        R"({"claim_id":"c1","perspective_id":"p1","stance":"support","cluster_id":"k","evidence_ids":[]})");
    EXPECT_EQ(store.ingest_gold(good), 1u);
}

TEST(Store, BundledMiniCorpusLoads)
{
    auto store = viewpoint::load_store(fixtures::mini_settings(ScorerBackend::gold));
    EXPECT_GE(store.claims().size(), 10u);
    EXPECT_GT(store.perspectives().size(), 50u);
    EXPECT_GT(store.evidence().size(), 50u);
    EXPECT_EQ(store.gold().size(), 55u);
}

TEST(Store, RoundTripPropertyOnGeneratedRecords)
{
    TempDir dir;
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> ch(0x20, 0x7e);
    std::vector<Perspective> written;
    std::string file;
    for (int i = 0; i < 200; ++i) {
        std::string text = "t";
        for (int k = 0; k < 20; ++k) {
            text.push_back(static_cast<char>(ch(rng)));
        }
        Perspective p{"id-" + std::to_string(i), text, i % 3 == 0 ? Source::expansion : Source::corpus, ""};
        written.push_back(p);
        file += detail::serialize_text_record(p) + "\n";
    }
    write_file(dir / "p.jsonl", file);
    {
        auto store = CorpusStore::open(dir / "s");
        ASSERT_EQ(store.ingest_perspectives(dir / "p.jsonl"), written.size());
    }
    auto store = CorpusStore::open(dir / "s");
    for (const auto& p : written) {
        EXPECT_EQ(store.get_perspective(p.id), p);
    }
}
