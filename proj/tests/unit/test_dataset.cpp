#include <set>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "narrbench/dataset.hpp"
#include "narrbench/process.hpp"

using namespace narrbench;
using nlohmann::json;
using testing_support::stdin_problem;

namespace {

std::vector<Problem> synthetic_pool(std::size_t n) {
    std::vector<Problem> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto p = stdin_problem("q" + std::to_string(i), i % 3 ? std::vector<TestCase>{{"1", "1"}}
                                                              : std::vector<TestCase>{});
        p.statement_length = 100 * (i % 17);
        if (i % 4) p.rating = static_cast<int>(800 + 100 * (i % 20));
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<std::string> ids(const std::vector<Problem>& ps) {
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(p.id);
    return out;
}

}  // namespace

TEST(Dataset, Utf8LengthCountsCodePoints) {
    EXPECT_EQ(utf8_length(""), 0u);
    EXPECT_EQ(utf8_length("abc"), 3u);
    EXPECT_EQ(utf8_length("\xc3\xa9t\xc3\xa9"), 3u);
    EXPECT_EQ(utf8_length("\xe2\x89\xa4"), 1u);
}

TEST(Dataset, ParsesRecordAndKeepsUnknownFields) {
    const json j = {{"id", "a"},
                    {"statement", "Add \xe2\x89\xa4 two"},
                    {"io_mode", "stdin_stdout"},
                    {"examples", json::array({{{"input", "1 2\n"}, {"output", "3\n"}}})},
                    {"rating", 1200},
                    {"tags", json::array({"math"})}};
    const auto p = problem_from_json(j, Source::CodeForces, 1);
    EXPECT_EQ(p.id, "a");
    EXPECT_EQ(p.statement_length, 9u);
    EXPECT_EQ(p.source, Source::CodeForces);
    ASSERT_EQ(p.examples.size(), 1u);
    EXPECT_EQ(p.examples[0].output, "3\n");
    EXPECT_EQ(p.rating, 1200);
    EXPECT_EQ(p.extra.at("tags"), json::array({"math"}));
    EXPECT_EQ(to_json(p).at("tags"), json::array({"math"}));
}

TEST(Dataset, FunctionCompletionNeedsSignatureWithDef) {
    json j = {{"id", "f"}, {"statement", "s"}, {"io_mode", "function_completion"}};
    EXPECT_THROW(problem_from_json(j, Source::HumanEval, 4), MalformedRecord);
    j["function_signature"] = "square(x)";
    EXPECT_THROW(problem_from_json(j, Source::HumanEval, 4), MalformedRecord);
    j["function_signature"] = "def square(x: int) -> int:";
    EXPECT_EQ(problem_from_json(j, Source::HumanEval, 4).entry_point(), "square");
}

TEST(Dataset, MalformedRecordsCarryLineNumbers) {
    TempDir dir("narrbench-ds");
    testing_support::write_file(dir.path() / "p.jsonl",
                                "{\"id\":\"a\",\"statement\":\"s\",\"io_mode\":\"stdin_stdout\"}\n"
                                "\n"
                                "not json\n"
                                "{\"id\":\"b\",\"statement\":\"s\",\"io_mode\":\"telepathy\"}\n"
                                "{\"statement\":\"s\",\"io_mode\":\"stdin_stdout\"}\n");
    const auto report = load_problems_report(dir.path() / "p.jsonl", Source::Custom);
    ASSERT_EQ(report.problems.size(), 1u);
    ASSERT_EQ(report.malformed.size(), 3u);
    EXPECT_EQ(report.malformed[0].line(), 3u);
    EXPECT_EQ(report.malformed[1].line(), 4u);
    EXPECT_EQ(report.malformed[2].line(), 5u);
    EXPECT_THROW(load_problems(dir.path() / "p.jsonl", Source::Custom), MalformedRecord);
    EXPECT_THROW(load_problems(dir.path() / "absent.jsonl", Source::Custom), FileNotFound);
}

TEST(Dataset, WriteThenLoadRoundTrips) {
    TempDir dir("narrbench-ds");
    auto ps = synthetic_pool(5);
    for (auto& p : ps) p.statement_length = utf8_length(p.statement);
    ps[1].checker = "import sys\n";
    ps[2].extra["difficulty"] = "hard";
    write_problems(dir.path() / "out.jsonl", ps);
    const auto back = load_problems(dir.path() / "out.jsonl", Source::Custom);
    ASSERT_EQ(back.size(), ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        EXPECT_EQ(back[i].id, ps[i].id);
        EXPECT_EQ(back[i].examples, ps[i].examples);
        EXPECT_EQ(back[i].rating, ps[i].rating);
        EXPECT_EQ(back[i].checker, ps[i].checker);
        EXPECT_EQ(back[i].extra, ps[i].extra);
    }
}

TEST(Dataset, FilterKeepsExactlyAcceptedProblemsInOrder) {
    const auto pool = synthetic_pool(200);
    DatasetFilterSpec spec;
    spec.max_length = 1000;
    spec.min_rating = 1500;
    spec.require_examples = true;
    const auto kept = apply_filter(pool, spec);
    std::vector<std::string> expected;
    for (const auto& p : pool) {
        if (p.statement_length <= 1000 && p.rating && *p.rating >= 1500 && !p.examples.empty())
            expected.push_back(p.id);
    }
    EXPECT_EQ(ids(kept), expected);
    EXPECT_FALSE(kept.empty());
}

TEST(Dataset, FilterIsIdempotentAndMonotone) {
    const auto pool = synthetic_pool(150);
    for (std::size_t max_len : {0u, 300u, 800u, 2000u}) {
        DatasetFilterSpec loose;
        if (max_len) loose.max_length = max_len;
        DatasetFilterSpec strict = loose;
        strict.require_examples = true;
        strict.min_rating = 1000;
        const auto once = apply_filter(pool, strict);
        EXPECT_EQ(ids(apply_filter(once, strict)), ids(once));
        const auto wide = apply_filter(pool, loose);
        const auto wide_list = ids(wide);
        const std::set<std::string> wide_ids(wide_list.begin(), wide_list.end());
        EXPECT_LE(once.size(), wide.size());
        for (const auto& p : once) EXPECT_TRUE(wide_ids.count(p.id)) << p.id;
    }
}

TEST(Dataset, AllowlistAndValidation) {
    const auto pool = synthetic_pool(10);
    DatasetFilterSpec spec;
    spec.id_allowlist = std::vector<std::string>{"q7", "q2", "zzz"};
    EXPECT_EQ(ids(apply_filter(pool, spec)), (std::vector<std::string>{"q2", "q7"}));
    DatasetFilterSpec bad;
    bad.max_length = 0;
    EXPECT_THROW(apply_filter(pool, bad), ConfigError);
    bad.max_length.reset();
    bad.min_rating = -1;
    EXPECT_THROW(apply_filter(pool, bad), ConfigError);
}

TEST(Dataset, LongSubsetIsSeededDistinctAndLong) {
    const auto pool = synthetic_pool(300);
    const auto a = sample_long_subset(pool, 1000, 40, 7);
    const auto b = sample_long_subset(pool, 1000, 40, 7);
    const auto c = sample_long_subset(pool, 1000, 40, 8);
    EXPECT_EQ(ids(a), ids(b));
    EXPECT_NE(ids(a), ids(c));
    std::set<std::string> distinct;
    for (const auto& p : a) {
        EXPECT_GT(p.statement_length, 1000u);
        distinct.insert(p.id);
    }
    EXPECT_EQ(distinct.size(), 40u);
}

TEST(Dataset, LongSubsetTakingWholePoolIsAPermutation) {
    const auto pool = synthetic_pool(170);
    std::size_t eligible = 0;
    for (const auto& p : pool) eligible += p.statement_length > 1000;
    const auto all = sample_long_subset(pool, 1000, eligible, 3);
    EXPECT_EQ(all.size(), eligible);
    EXPECT_THROW(sample_long_subset(pool, 1000, eligible + 1, 3), InsufficientPool);
}
