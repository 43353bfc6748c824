// narrbench: narrative-prompting code generation benchmark runner.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "narrbench/analysis.hpp"
#include "narrbench/errors.hpp"
#include "narrbench/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace narrbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct RunOptions {
    std::string config;
    std::string benchmark;
    std::string output_dir;
    std::vector<std::string> strategies;
    std::vector<int> ks;
    bool dry_run = false;
    bool resume = false;
    bool exact_match = false;
    std::size_t parallel_exec = 0;
    std::size_t max_in_flight = 0;
};

struct AnalyzeOptions {
    std::string config;
    std::string record;
    std::string out;
    std::vector<std::string> analyses;
};

std::vector<std::string> split_commas(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        for (std::string part; std::getline(ss, part, ',');) {
            if (!part.empty()) out.push_back(part);
        }
    }
    return out;
}

RunConfig load_with_overrides(const RunOptions& o) {
    std::ifstream in(o.config);
    if (!in) throw FileNotFound(o.config);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + o.config + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const auto cwd = fs::current_path();
    if (!o.benchmark.empty()) j["benchmark"]["path"] = fs::absolute(cwd / o.benchmark).string();
    if (!o.output_dir.empty()) j["output_dir"] = fs::absolute(cwd / o.output_dir).string();
    if (!o.strategies.empty()) j["strategies"] = split_commas(o.strategies);
    if (!o.ks.empty()) j["k"] = o.ks;
    if (o.exact_match) j["exact_match"] = true;
    if (o.parallel_exec) j["parallel_exec"] = o.parallel_exec;
    if (o.max_in_flight) j["max_in_flight"] = o.max_in_flight;
    return run_config_from_json(j, fs::absolute(o.config).parent_path());
}

void add_run_options(CLI::App* cmd, RunOptions& o) {
    cmd->add_option("--config", o.config, "Run configuration (JSON)")->required();
    cmd->add_option("--benchmark", o.benchmark, "Problem file, overriding benchmark.path");
    cmd->add_option("--output-dir", o.output_dir, "Output directory, overriding output_dir");
    cmd->add_option("--strategies", o.strategies, "Comma-separated arms, e.g. RepeatedSampling,NarrativeOnly");
    cmd->add_option("--k", o.ks, "k values for pass@k")->delimiter(',');
    cmd->add_flag("--dry-run", o.dry_run, "Print the call plan; make no backend calls");
    cmd->add_flag("--resume", o.resume, "Continue an existing record, skipping finished work");
    cmd->add_flag("--exact-match", o.exact_match, "Compare outputs byte for byte");
    cmd->add_option("--parallel-exec", o.parallel_exec, "Concurrent sandbox executions");
    cmd->add_option("--max-in-flight", o.max_in_flight, "Concurrent backend calls");
}

std::optional<AstProbe> find_probe(const RunConfig& config) {
    return AstProbe::detect(config.astprobe_command.empty() ? AstProbe::default_command() : config.astprobe_command);
}

int report_outcome(const ReportSet& reports) {
    for (const auto& n : reports.notices) std::cerr << "notice: " << n << '\n';
    for (const auto& e : reports.errors) std::cerr << "error: " << e << '\n';
    return reports.errors.empty() ? kExitOk : kExitPartial;
}

ReportSet analyses_for(const RunView& view, const std::vector<std::string>& names) {
    std::set<Analysis> selected;
    if (names.empty()) {
        selected = applicable_analyses(view);
    } else {
        for (const auto& n : split_commas(names)) {
            if (n == "all") {
                selected = all_analyses();
                continue;
            }
            const auto a = parse_analysis(n);
            if (!a) throw ConfigError("unknown analysis: " + n);
            selected.insert(*a);
        }
    }
    std::optional<AstProbe> probe;
    if (selected.count(Analysis::AstMetrics)) probe = find_probe(view.config());
    return run_analysis(view, selected, probe ? &*probe : nullptr);
}

int run_stage(const RunOptions& o, Stage until, bool analyze) {
    const auto config = load_with_overrides(o);
    Pipeline pipeline(config, {}, &std::cerr);
    if (o.dry_run) {
        auto plan = pipeline.plan(pipeline.load_benchmark());
        if (until == Stage::Transform) plan.solve = 0;
        if (until != Stage::Eval) plan.back_translation = 0;
        std::cout << plan.describe();
        return kExitOk;
    }
    const auto result = pipeline.run(until, o.resume);
    std::cerr << fmt::format("backend calls: {}, failed generations: {}, failed executions: {}\n",
                             result.backend_calls, result.generation_failures, result.execution_failures);
    int code = result.partial() ? kExitPartial : kExitOk;
    if (until == Stage::Eval) std::cout << result.reports.files.at("summary.tsv");
    if (analyze) {
        const auto record = RunRecord::load(pipeline.record_path());
        const RunView view(record);
        const auto reports = analyses_for(view, {});
        write_reports(reports, pipeline.reports_dir());
        if (report_outcome(reports) != kExitOk) code = kExitPartial;
    }
    return code;
}

fs::path record_from(const AnalyzeOptions& o) {
    if (!o.record.empty()) return o.record;
    if (o.config.empty()) throw ConfigError("pass --record or --config");
    return load_run_config(o.config).output_dir / "record.jsonl";
}

fs::path out_dir_for(const AnalyzeOptions& o, const fs::path& record) {
    return o.out.empty() ? record.parent_path() / "reports" : fs::path(o.out);
}

int analyze(const AnalyzeOptions& o) {
    const auto path = record_from(o);
    const auto record = RunRecord::load(path);
    const RunView view(record);
    const auto reports = analyses_for(view, o.analyses);
    write_reports(reports, out_dir_for(o, path));
    for (const auto& [name, body] : reports.files) std::cout << name << '\n';
    return report_outcome(reports);
}

int report(const AnalyzeOptions& o) {
    const auto path = record_from(o);
    const auto record = RunRecord::load(path);
    const RunView view(record);
    const auto reports = summary_report(view);
    write_reports(reports, out_dir_for(o, path));
    std::cout << reports.files.at("summary.tsv");
    return kExitOk;
}

int replay(const AnalyzeOptions& o) {
    const auto record = RunRecord::load(o.record);
    const RunView view(record);
    auto reports = summary_report(view);
    reports.merge(analyses_for(view, o.analyses));
    write_reports(reports, o.out);
    for (const auto& [name, body] : reports.files) std::cout << name << '\n';
    return report_outcome(reports);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Narrative-prompting code generation benchmark runner"};
    app.require_subcommand(1);

    RunOptions transform_opts, solve_opts, eval_opts, run_opts;
    auto* transform = app.add_subcommand("transform", "Generate narrative variants");
    add_run_options(transform, transform_opts);
    auto* solve = app.add_subcommand("solve", "Generate narratives and solver outputs");
    add_run_options(solve, solve_opts);
    auto* eval = app.add_subcommand("eval", "Generate, execute in the sandbox, back-translate and score pass@k");
    add_run_options(eval, eval_opts);
    auto* run = app.add_subcommand("run", "eval followed by every applicable analysis");
    add_run_options(run, run_opts);

    AnalyzeOptions analyze_opts, report_opts, replay_opts;
    auto* analyze_cmd = app.add_subcommand("analyze", "Run analyses over a record");
    analyze_cmd->add_option("--config", analyze_opts.config, "Run configuration (locates the record)");
    analyze_cmd->add_option("--record", analyze_opts.record, "Record file");
    analyze_cmd->add_option("--analyses", analyze_opts.analyses,
                            "Comma-separated: Agreement, Decomposition, Permuted, Misaligned, "
                            "ExampleIOAblation, NoTag, AstMetrics, or all");
    analyze_cmd->add_option("--out", analyze_opts.out, "Report directory (default: next to the record)");

    auto* report_cmd = app.add_subcommand("report", "Write and print the summary table");
    report_cmd->add_option("--config", report_opts.config, "Run configuration (locates the record)");
    report_cmd->add_option("--record", report_opts.record, "Record file");
    report_cmd->add_option("--out", report_opts.out, "Report directory (default: next to the record)");

    auto* replay_cmd = app.add_subcommand("replay", "Recompute every table from a record's raw fields");
    replay_cmd->add_option("--record", replay_opts.record, "Record file")->required();
    replay_cmd->add_option("--out", replay_opts.out, "Directory for the regenerated tables")->required();
    replay_cmd->add_option("--analyses", replay_opts.analyses, "As for analyze; default: applicable ones");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*transform) return run_stage(transform_opts, Stage::Transform, false);
        if (*solve) return run_stage(solve_opts, Stage::Solve, false);
        if (*eval) return run_stage(eval_opts, Stage::Eval, false);
        if (*run) return run_stage(run_opts, Stage::Eval, true);
        if (*analyze_cmd) return analyze(analyze_opts);
        if (*report_cmd) return report(report_opts);
        if (*replay_cmd) return replay(replay_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
