#include <gtest/gtest.h>

#include "helpers.hpp"
#include "narrbench/config.hpp"
#include "narrbench/errors.hpp"
#include "narrbench/process.hpp"
#include "narrbench/record.hpp"

using namespace narrbench;
using nlohmann::json;

namespace {

json minimal_config() {
    return {{"benchmark", {{"path", "problems.jsonl"}}},
            {"strategies", {"RS", "NarrativeOnly"}},
            {"providers", json::array({{{"backend_id", "m"}, {"kind", "mock"}, {"mock_script", "script.json"}}})},
            {"narr_backend", "m"},
            {"solve_backend", "m"},
            {"alg_backend", "m"},
            {"output_dir", "out"}};
}

}  // namespace

TEST(Arms, ParseAndName) {
    EXPECT_EQ(ArmSpec::parse("RS").strategy.kind, StrategyKind::RepeatedSampling);
    EXPECT_EQ(ArmSpec::parse("PC").strategy.kind, StrategyKind::ParaphraseConcat);
    const auto noio = ArmSpec::parse("NarrativeOnly:noio");
    EXPECT_TRUE(noio.strip_io);
    EXPECT_EQ(noio.name(), "NarrativeOnly:noio");
    const auto ext = ArmSpec::parse("External:my_template");
    EXPECT_EQ(ext.strategy.kind, StrategyKind::ExternalTemplate);
    EXPECT_EQ(ext.strategy.template_id, "my_template");
    EXPECT_EQ(ArmSpec::parse(ext.name()), ext);
    for (auto k : kAllStrategyKinds) {
        if (k == StrategyKind::ExternalTemplate) continue;
        const auto arm = ArmSpec{PromptStrategy::of(k), false};
        EXPECT_EQ(ArmSpec::parse(arm.name()), arm) << arm.name();
    }
    EXPECT_THROW(ArmSpec::parse("Telepathy"), ConfigError);
    EXPECT_THROW(ArmSpec::parse("CoT:loud"), ConfigError);
}

TEST(Arms, NarrativeFamilies) {
    EXPECT_EQ(family_for(StrategyKind::NarrativeOnly), NarrativeFamily::Tagged);
    EXPECT_EQ(family_for(StrategyKind::Permuted), NarrativeFamily::Tagged);
    EXPECT_EQ(family_for(StrategyKind::NoTagNarrative), NarrativeFamily::NoTag);
    EXPECT_EQ(family_for(StrategyKind::Misaligned), NarrativeFamily::Misaligned);
    EXPECT_EQ(family_for(StrategyKind::ParaphraseConcat), NarrativeFamily::Paraphrase);
    EXPECT_FALSE(family_for(StrategyKind::CoT));
}

TEST(Config, ParsesDefaultsAndResolvesPaths) {
    const auto c = run_config_from_json(minimal_config(), "/base");
    EXPECT_EQ(c.benchmark.path, "/base/problems.jsonl");
    EXPECT_EQ(c.output_dir, "/base/out");
    EXPECT_EQ(c.provider("m").mock_script, "/base/script.json");
    EXPECT_EQ(c.n_variants, 5);
    EXPECT_EQ(c.ks, (std::vector<int>{1, 5, 10}));
    EXPECT_EQ(c.back_translate, BackTranslatePolicy::All);
    EXPECT_EQ(c.target_samples(ArmSpec::parse("RS")), 10);
    EXPECT_EQ(c.target_samples(ArmSpec::parse("NarrativeOnly")), 5);
    EXPECT_EQ(c.target_samples(ArmSpec::parse("Paraphrase")), 5);
    EXPECT_EQ(c.target_samples(ArmSpec::parse("ParaphraseConcat")), 10);
    const auto back = run_config_from_json(to_json(c), "/elsewhere");
    EXPECT_EQ(back.benchmark.path, c.benchmark.path);
    EXPECT_EQ(back.arms, c.arms);
}

TEST(Config, RejectsBadFields) {
    auto bad = [](auto mutate) {
        auto j = minimal_config();
        mutate(j);
        return j;
    };
    const std::vector<json> cases{
        bad([](json& j) { j.erase("output_dir"); }),
        bad([](json& j) { j["strategies"] = json::array(); }),
        bad([](json& j) { j["strategies"] = {"CoT", "CoT"}; }),
        bad([](json& j) { j["n_variants"] = 0; }),
        bad([](json& j) { j["k"] = {1, 0}; }),
        bad([](json& j) { j["k"] = "five"; }),
        bad([](json& j) { j["solve_backend"] = "absent"; }),
        bad([](json& j) { j["limits"] = {{"time_ms", 0}}; }),
        bad([](json& j) { j["temperatures"] = {{"code", 3.0}}; }),
        bad([](json& j) { j["back_translate"] = "sometimes"; }),
        bad([](json& j) { j["max_in_flight"] = 0; }),
    };
    for (const auto& j : cases) EXPECT_THROW(run_config_from_json(j, "/base"), ConfigError) << j.dump();
    EXPECT_THROW(load_run_config("/nonexistent/config.json"), FileNotFound);
}

TEST(Record, RoundTripAndLastSuccessWins) {
    TempDir dir("narrbench-rec");
    const auto path = dir.path() / "sub" / "record.jsonl";
    {
        RecordWriter w(path);
        w.append({{"kind", "run"}, {"config", json::object()}, {"problem_ids", {"p1"}}});
        Exchange ok;
        ok.request = GenerationRequest::for_role(RoleTag::Solver, "x", "p1/solve/RS/s0");
        ok.response = GenerationResponse{"first", 1, "m", 0, false};
        w.append(generation_entry(ok));
        Exchange failed = ok;
        failed.response.reset();
        failed.error = "boom";
        w.append(generation_entry(failed));
        Exchange again = ok;
        again.response->text = "second";
        w.append(generation_entry(again));
        Exchange only_failed = failed;
        only_failed.request.tag = "p1/solve/RS/s1";
        w.append(generation_entry(only_failed));
        ExecutionEntry e;
        e.tag = "p1/solve/RS/s0";
        e.problem_id = "p1";
        e.arm = "RepeatedSampling";
        e.extraction_ok = true;
        e.source_code = "print(1)";
        e.verdict.per_test = {TestVerdict::Pass};
        e.verdict.finalize();
        w.append(execution_entry(e));
        w.append({{"kind", "warning"}, {"message", "careful"}});
    }
    const auto r = RunRecord::load(path);
    EXPECT_EQ(r.lines, 7u);
    EXPECT_FALSE(r.truncated_tail);
    ASSERT_TRUE(r.last_run);
    ASSERT_TRUE(r.response("p1/solve/RS/s0"));
    EXPECT_EQ(r.response("p1/solve/RS/s0")->text, "second");
    EXPECT_FALSE(r.has_response("p1/solve/RS/s1"));
    EXPECT_EQ(r.generations.at("p1/solve/RS/s1").error, "boom");
    EXPECT_TRUE(r.executions.at("p1/solve/RS/s0").verdict.overall_correct);
    EXPECT_EQ(r.warnings, std::vector<std::string>{"careful"});
}

TEST(Record, TruncatedTailIsToleratedButMidFileDamageIsNot) {
    TempDir dir("narrbench-rec");
    const auto path = dir.path() / "record.jsonl";
    const std::string good = R"({"schema_version":1,"kind":"warning","message":"a"})";
    testing_support::write_file(path, good + "\n" + good + "\n{\"schema_version\":1,\"ki");
    const auto r = RunRecord::load(path);
    EXPECT_TRUE(r.truncated_tail);
    EXPECT_EQ(r.warnings.size(), 2u);

    testing_support::write_file(path, good + "\n{broken\n" + good + "\n");
    EXPECT_THROW(RunRecord::load(path), MalformedRecord);

    testing_support::write_file(path, R"({"schema_version":2,"kind":"warning","message":"a"})" "\n");
    EXPECT_THROW(RunRecord::load(path), ConfigError);
    EXPECT_THROW(RunRecord::load(dir.path() / "absent.jsonl"), FileNotFound);
}
