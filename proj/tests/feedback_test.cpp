#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "viewpoint/feedback.hpp"

using namespace viewpoint;
using fixtures::TempDir;

namespace {

/// Clock that advances one second per reading.
FeedbackLog::Clock ticking(std::int64_t start = 1000)
{
    return [t = start]() mutable { return t++; };
}

std::vector<nlohmann::json> read_lines(const std::filesystem::path& p)
{
    std::vector<nlohmann::json> out;
    std::istringstream in(fixtures::read_file(p));
    std::string line;
    while (std::getline(in, line)) {
        out.push_back(nlohmann::json::parse(line));
    }
    return out;
}

}  // namespace

TEST(LogQuery, IdenticalClaimsGetDistinctIds)
{
    FeedbackLog log("", ticking());
    auto a = log.log_query("same claim", {});
    auto b = log.log_query("same claim", {});
    EXPECT_NE(a, b);
    EXPECT_EQ(log.queries().size(), 2u);
}

TEST(LogQuery, SurvivesRestart)
{
    TempDir dir;
    std::string id;
    PipelineConfig c;
    c.t1 = 0.25;
    {
        FeedbackLog log(dir.path(), ticking());
        id = log.log_query("claim text", c);
    }
    FeedbackLog reopened(dir.path(), ticking());
    auto q = reopened.find_query(id);
    ASSERT_TRUE(q.has_value());
    EXPECT_EQ(q->claim_text, "claim text");
    EXPECT_EQ(q->config["t1"], 0.25);
    EXPECT_EQ(q->timestamp, 1000);
    auto next = reopened.log_query("another", {});
    EXPECT_NE(next, id) << "ids keep counting after a restart";
}

TEST(RecordFeedback, ValidVoteIsStored)
{
    TempDir dir;
    FeedbackLog log(dir.path(), ticking());
    auto q = log.log_query("claim", {});
    log.record_feedback({q, "p1", "  some   text ", Polarity::up, 0});
    ASSERT_EQ(log.feedback().size(), 1u);
    EXPECT_EQ(log.feedback()[0].perspective_text, "some text");
    EXPECT_EQ(log.feedback()[0].timestamp, 1001);
    auto lines = read_lines(dir / "feedback.jsonl");
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_EQ(lines[0]["polarity"], "up");
}

TEST(RecordFeedback, UnknownQueryIsRejected)
{
    FeedbackLog log("", ticking());
    try {
        log.record_feedback({"q-404", "p1", "t", Polarity::up, 0});
        FAIL() << "expected not_found";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::not_found);
    }
    EXPECT_TRUE(log.feedback().empty());
}

TEST(RecordFeedback, LatestVoteWinsOnExport)
{
    TempDir dir;
    FeedbackLog log(dir.path(), ticking());
    auto q = log.log_query("claim", {});
    log.record_feedback({q, "p1", "text", Polarity::up, 0});
    log.record_feedback({q, "p1", "text", Polarity::down, 0});
    EXPECT_EQ(log.feedback().size(), 2u);
    EXPECT_EQ(log.export_training_pairs(dir / "out.jsonl"), 1u);
    auto lines = read_lines(dir / "out.jsonl");
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_EQ(lines[0]["label"], 0);
    EXPECT_EQ(lines[0]["claim"], "claim");
    EXPECT_EQ(lines[0]["perspective"], "text");
}

TEST(Export, EmptyLogWritesNothing)
{
    TempDir dir;
    FeedbackLog log(dir.path(), ticking());
    EXPECT_EQ(log.export_training_pairs(dir / "out.jsonl"), 0u);
    EXPECT_EQ(fixtures::read_file(dir / "out.jsonl"), "");
}

TEST(Export, OneLinePerDistinctPair)
{
    TempDir dir;
    FeedbackLog log(dir.path(), ticking());
    auto q = log.log_query("claim", {});
    log.record_feedback({q, "p1", "a", Polarity::up, 0});
    log.record_feedback({q, "p2", "b", Polarity::up, 0});
    log.record_feedback({q, "p1", "a", Polarity::up, 0});
    EXPECT_EQ(log.export_training_pairs(dir / "out.jsonl"), 2u);
}

TEST(Export, OrderedByTimestampAndByteStable)
{
    TempDir dir;
    {
        FeedbackLog log(dir.path(), [] { return std::int64_t{50}; });
        auto q1 = log.log_query("one", {});
        auto q2 = log.log_query("two", {});
        log.record_feedback({q2, "b", "B", Polarity::down, 0});
        log.record_feedback({q1, "z", "Z", Polarity::up, 0});
        log.record_feedback({q1, "a", "A", Polarity::up, 0});
    }
    FeedbackLog log(dir.path(), ticking(10));
    log.export_training_pairs(dir / "first.jsonl");
    auto lines = read_lines(dir / "first.jsonl");
    ASSERT_EQ(lines.size(), 3u);
    // Equal timestamps fall back to query id, then perspective ref.
    EXPECT_EQ(lines[0]["perspective"], "A");
    EXPECT_EQ(lines[1]["perspective"], "Z");
    EXPECT_EQ(lines[2]["perspective"], "B");
    log.export_training_pairs(dir / "second.jsonl");
    EXPECT_EQ(fixtures::read_file(dir / "first.jsonl"), fixtures::read_file(dir / "second.jsonl"));
}

TEST(Timestamps, NeverDecreaseEvenIfClockGoesBack)
{
    std::vector<std::int64_t> readings = {100, 90, 120, 80};
    std::size_t i = 0;
    FeedbackLog log("", [&] { return readings[i++ % readings.size()]; });
    auto q = log.log_query("c", {});
    log.record_feedback({q, "p", "t", Polarity::up, 0});
    log.record_feedback({q, "p", "t", Polarity::up, 0});
    log.record_feedback({q, "p", "t", Polarity::up, 0});
    auto fb = log.feedback();
    EXPECT_EQ(fb[0].timestamp, 100);
    EXPECT_EQ(fb[1].timestamp, 120);
    EXPECT_EQ(fb[2].timestamp, 120);
}

TEST(Replay, CorruptLogIsReported)
{
    TempDir dir;
    fixtures::write_file(dir / "queries.jsonl", "{\"query_id\":\"q-1\",\"claim\":\"c\",\"timestamp\":1}\nnot json\n");
    try {
        FeedbackLog log(dir.path());
        FAIL() << "expected malformed_input";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::malformed_input);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Polarity, Parsing)
{
    EXPECT_EQ(parse_polarity("up"), Polarity::up);
    EXPECT_EQ(parse_polarity("down"), Polarity::down);
    EXPECT_FALSE(parse_polarity("maybe").has_value());
    EXPECT_FALSE(parse_polarity("UP").has_value());
}
