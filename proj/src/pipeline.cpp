#include "narrbench/pipeline.hpp"

#include <atomic>
#include <cstdlib>
#include <ostream>
#include <set>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fmt/format.h>

#include "narrbench/errors.hpp"
#include "narrbench/rng.hpp"
#include "narrbench/sandbox.hpp"
#include "narrbench/text.hpp"

namespace narrbench {

using nlohmann::json;
namespace fs = std::filesystem;

std::string CallPlan::describe() const {
    return fmt::format(
        "problems: {}\nnarrative calls: {}\nsolver calls: {}\nback-translation calls: {}\ntotal backend calls: {}\n",
        problems, narrative, solve, back_translation, total());
}

BackendMap make_backends(const RunConfig& config) {
    BackendMap out;
    for (const auto& id : {config.narr_backend, config.solve_backend, config.alg_backend}) {
        if (!out.count(id)) out[id] = std::shared_ptr<Backend>(make_backend(config.provider(id)));
    }
    return out;
}

Pipeline::Pipeline(RunConfig config, BackendMap backends, std::ostream* log)
    : config_(std::move(config)), backends_(std::move(backends)), log_(log) {
    config_.validate();
}

std::vector<Problem> Pipeline::load_benchmark(std::vector<std::string>* warnings) const {
    auto report = load_problems_report(config_.benchmark.path, config_.benchmark.source);
    if (warnings) {
        for (const auto& m : report.malformed) warnings->push_back(m.what());
    }
    auto problems = apply_filter(report.problems, config_.benchmark.filter);
    if (const auto& l = config_.benchmark.long_subset) {
        problems = sample_long_subset(problems, l->min_length_exclusive, l->count, config_.seeds.sampling);
    }
    std::set<std::string> seen;
    for (const auto& p : problems) {
        if (!seen.insert(p.id).second) throw ConfigError("duplicate problem id: " + p.id);
    }
    return problems;
}

namespace {

std::set<NarrativeFamily> families(const RunConfig& config) {
    std::set<NarrativeFamily> out;
    for (const auto& a : config.arms) {
        if (auto f = family_for(a.strategy.kind)) out.insert(*f);
    }
    return out;
}

std::int64_t request_seed(std::uint64_t base, const std::string& tag) {
    // Kept non-negative and within 31 bits; some providers reject larger seeds.
    return static_cast<std::int64_t>(derive_seed(base, tag) >> 33);
}

// Exclusive advisory lock on output_dir/.lock for the pipeline's lifetime.
class DirLock {
public:
    explicit DirLock(const fs::path& dir) {
        fd_ = ::open((dir / ".lock").c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0) throw ConfigError("cannot create lock file in " + dir.string());
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            throw ConfigError("output_dir " + dir.string() + " is in use by another run");
        }
    }
    ~DirLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    int fd_ = -1;
};

}  // namespace

CallPlan Pipeline::plan(const std::vector<Problem>& problems) const {
    CallPlan plan;
    plan.problems = problems.size();
    const auto n = problems.size();
    plan.narrative = n * families(config_).size() * static_cast<std::size_t>(config_.n_variants);
    for (const auto& a : config_.arms) plan.solve += n * static_cast<std::size_t>(config_.target_samples(a));
    if (config_.back_translate != BackTranslatePolicy::None) plan.back_translation = plan.solve;
    return plan;
}

std::vector<SolveJob> Pipeline::solve_jobs(const RunView& view, const std::map<std::string, Problem>& problems,
                                           std::vector<std::string>* warnings) const {
    const auto templates = config_.templates_dir ? TemplateRegistry::with_overrides(*config_.templates_dir)
                                                 : TemplateRegistry::builtin();
    std::vector<SolveJob> jobs;
    auto warn = [&](std::string w) {
        if (warnings) warnings->push_back(std::move(w));
    };

    for (const auto& pid : view.problem_ids()) {
        const auto pit = problems.find(pid);
        if (pit == problems.end()) continue;
        const Problem& original = pit->second;

        for (const auto& arm : config_.arms) {
            const auto name = arm.name();
            const Problem shown = arm.strip_io ? strip_examples(original) : original;
            const auto kind = arm.strategy.kind;
            auto add = [&](std::optional<int> variant, int samples, const std::string& prompt) {
                for (int i = 0; i < samples; ++i) {
                    jobs.push_back({solve_tag(pid, name, variant, i), pid, name, variant, prompt});
                }
            };
            auto narrative_arm = [&](const std::vector<NarrativeVariant>& variants) {
                for (const auto& v : variants) {
                    if (v.validity != Validity::Valid) continue;
                    const auto nv = arm.strip_io ? strip_example_io(v) : v;
                    add(v.variant_index, config_.samples_per_variant,
                        build_solver_prompt(arm.strategy, shown, {&nv, nullptr}, *templates));
                }
            };

            switch (kind) {
                case StrategyKind::NarrativeOnly:
                case StrategyKind::NarrativeConcat:
                    narrative_arm(view.variants(pid, NarrativeFamily::Tagged));
                    break;
                case StrategyKind::NoTagNarrative:
                    narrative_arm(view.variants(pid, NarrativeFamily::NoTag));
                    break;
                case StrategyKind::Misaligned:
                    narrative_arm(view.variants(pid, NarrativeFamily::Misaligned));
                    break;
                case StrategyKind::Permuted: {
                    try {
                        narrative_arm(permute_variants(view.variants(pid, NarrativeFamily::Tagged),
                                                       derive_seed(config_.seeds.permutation, pid)));
                    } catch (const InsufficientVariants& e) {
                        warn(fmt::format("{} {}: {}", pid, name, e.what()));
                    }
                    break;
                }
                case StrategyKind::Paraphrase:
                    for (const auto& [j, text] : view.paraphrases(pid)) {
                        add(j, config_.samples_per_variant,
                            build_solver_prompt(arm.strategy, shown, {nullptr, &text}, *templates));
                    }
                    break;
                case StrategyKind::ParaphraseConcat: {
                    std::vector<std::string> texts;
                    for (const auto& [j, text] : view.paraphrases(pid)) texts.push_back(text);
                    try {
                        const auto joined = concat_paraphrases(texts, 5);
                        add(std::nullopt, config_.samples_per_strategy,
                            build_solver_prompt(arm.strategy, shown, {nullptr, &joined}, *templates));
                    } catch (const InsufficientVariants& e) {
                        warn(fmt::format("{} {}: {}", pid, name, e.what()));
                    }
                    break;
                }
                default:
                    add(std::nullopt, config_.samples_per_strategy,
                        build_solver_prompt(arm.strategy, shown, {}, *templates));
            }
        }
    }
    return jobs;
}

PipelineResult Pipeline::run(Stage until, bool resume) {
    PipelineResult result;
    auto say = [&](const std::string& s) {
        if (log_) *log_ << s << '\n';
    };

    // Credentials are checked before anything is written or sent.
    for (const auto& id : {config_.narr_backend, config_.solve_backend, config_.alg_backend}) {
        const auto& p = config_.provider(id);
        if (p.kind != "mock" && !p.credential_env_var.empty() && !std::getenv(p.credential_env_var.c_str()))
            throw AuthMissing(p.credential_env_var);
    }
    std::optional<Sandbox> sandbox;
    if (until == Stage::Eval) sandbox.emplace(SandboxConfig{config_.interpreter, config_.exact_match, true});

    fs::create_directories(config_.output_dir);
    DirLock lock(config_.output_dir);
    const auto path = record_path();
    if (fs::exists(path) && fs::file_size(path) > 0 && !resume)
        throw ConfigError("record " + path.string() + " already exists; pass --resume to continue it");

    std::vector<std::string> load_warnings;
    const auto problem_list = load_benchmark(&load_warnings);
    std::map<std::string, Problem> problems;
    std::vector<std::string> ids;
    for (const auto& p : problem_list) {
        problems[p.id] = p;
        ids.push_back(p.id);
    }
    if (backends_.empty()) backends_ = make_backends(config_);

    RecordWriter writer(path);
    auto warn = [&](const std::string& w) {
        result.warnings.push_back(w);
        writer.append({{"kind", "warning"}, {"message", w}});
        say("warning: " + w);
    };
    for (const auto& w : load_warnings) warn(w);
    writer.append({{"kind", "run"},
                   {"config", to_json(config_)},
                   {"problems", ids},
                   {"stage", until == Stage::Transform ? "transform" : until == Stage::Solve ? "solve" : "eval"}});

    std::atomic<std::size_t> calls{0};
    std::atomic<std::size_t> failures{0};
    for (auto& [id, backend] : backends_) {
        backend->set_sink([&](const Exchange& ex) {
            ++calls;
            if (!ex.error.empty()) ++failures;
            writer.append(generation_entry(ex));
        });
    }
    auto batch = [&](const std::string& backend_id, const std::vector<GenerationRequest>& requests) {
        if (requests.empty()) return;
        say(fmt::format("{} request(s) to {}", requests.size(), backend_id));
        const auto slots = generate_batch(*backends_.at(backend_id), requests, config_.max_in_flight);
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!slots[i].ok()) say(fmt::format("failed {}: {}", requests[i].tag, slots[i].error));
        }
    };
    auto make_request = [&](RoleTag role, const std::string& backend_id, std::string prompt, std::string tag) {
        auto r = GenerationRequest::for_role(role, std::move(prompt), std::move(tag));
        r.temperature = role == RoleTag::NarrativeGen ? config_.narrative_temperature : config_.code_temperature;
        r.max_tokens = config_.provider(backend_id).max_tokens;
        r.seed = request_seed(config_.seeds.sampling, r.tag);
        return r;
    };

    const auto templates = config_.templates_dir ? TemplateRegistry::with_overrides(*config_.templates_dir)
                                                 : TemplateRegistry::builtin();

    // ---- transform ----
    {
        auto record = RunRecord::load(path);
        std::vector<GenerationRequest> requests;
        for (const auto& pid : ids) {
            const auto& p = problems.at(pid);
            for (auto family : families(config_)) {
                for (int j = 1; j <= config_.n_variants; ++j) {
                    const auto tag = narrative_tag(pid, family, j);
                    if (record.has_response(tag)) continue;
                    std::string prompt;
                    switch (family) {
                        case NarrativeFamily::Tagged: prompt = build_transformation_prompt(p, true, *templates); break;
                        case NarrativeFamily::NoTag: prompt = build_transformation_prompt(p, false, *templates); break;
                        case NarrativeFamily::Misaligned:
                            prompt = build_misaligned_prompt(p, MisalignedGenreSet::shipped(),
                                                             derive_seed(config_.seeds.misalignment, tag), *templates);
                            break;
                        case NarrativeFamily::Paraphrase: prompt = build_paraphrase_prompt(p, *templates); break;
                    }
                    requests.push_back(make_request(RoleTag::NarrativeGen, config_.narr_backend, std::move(prompt), tag));
                }
            }
        }
        batch(config_.narr_backend, requests);

        std::set<std::string> fresh;
        for (const auto& r : requests) fresh.insert(r.tag);
        const auto updated = RunRecord::load(path);
        const RunView view(updated);
        std::set<std::string> free_genres;
        for (const auto& pid : ids) {
            for (const auto& v : view.variants(pid, NarrativeFamily::Tagged)) {
                if (v.genre) free_genres.insert(text::to_lower(text::trim(*v.genre)));
            }
        }
        for (const auto& pid : ids) {
            for (auto family : {NarrativeFamily::Tagged, NarrativeFamily::NoTag, NarrativeFamily::Misaligned}) {
                for (const auto& v : view.variants(pid, family)) {
                    const auto tag = narrative_tag(pid, family, v.variant_index);
                    if (!fresh.count(tag)) continue;
                    json entry{{"kind", "variant"}, {"tag", tag}, {"family", to_string(family)}, {"variant", to_json(v)}};
                    if (family == NarrativeFamily::Misaligned) {
                        const auto& genre = misaligned_genre(config_, pid, v.variant_index);
                        entry["injected_genre"] = genre;
                        if (free_genres.count(text::to_lower(genre)))
                            warn(fmt::format("{}: injected genre '{}' was also chosen freely in this run", tag, genre));
                    }
                    writer.append(std::move(entry));
                }
            }
        }
    }

    // ---- solve ----
    if (until != Stage::Transform) {
        const auto record = RunRecord::load(path);
        const RunView view(record);
        std::vector<std::string> job_warnings;
        const auto jobs = solve_jobs(view, problems, &job_warnings);
        for (const auto& w : job_warnings) warn(w);
        std::vector<GenerationRequest> requests;
        for (const auto& job : jobs) {
            if (record.has_response(job.tag)) continue;
            requests.push_back(make_request(RoleTag::Solver, config_.solve_backend, job.prompt, job.tag));
        }
        batch(config_.solve_backend, requests);
    }

    // ---- eval ----
    if (until == Stage::Eval) {
        {
            const auto record = RunRecord::load(path);
            const RunView view(record);
            const auto jobs = solve_jobs(view, problems, nullptr);
            std::vector<CandidateSolution> candidates;
            std::vector<const SolveJob*> judged;
            for (const auto& job : jobs) {
                if (record.executions.count(job.tag)) continue;
                const auto* response = record.response(job.tag);
                if (!response) continue;
                const auto extracted = extract_code(response->text);
                CandidateSolution c;
                c.problem_id = job.problem_id;
                c.strategy = ArmSpec::parse(job.arm).strategy;
                c.source_code = extracted.source_code;
                c.extraction_ok = extracted.extraction_ok;
                candidates.push_back(std::move(c));
                judged.push_back(&job);
            }
            if (!candidates.empty()) say(fmt::format("executing {} candidate(s)", candidates.size()));
            const auto slots = sandbox->run_all_slots(candidates, problems, config_.limits, config_.parallel_exec);
            for (std::size_t i = 0; i < slots.size(); ++i) {
                if (!slots[i].verdict) {
                    ++result.execution_failures;
                    warn(fmt::format("{}: sandbox failure: {}", judged[i]->tag, slots[i].error));
                    continue;
                }
                ExecutionEntry e;
                e.tag = judged[i]->tag;
                e.problem_id = judged[i]->problem_id;
                e.arm = judged[i]->arm;
                e.variant = judged[i]->variant;
                e.extraction_ok = candidates[i].extraction_ok;
                e.source_code = candidates[i].source_code;
                e.verdict = *slots[i].verdict;
                writer.append(execution_entry(e));
            }
        }

        if (config_.back_translate != BackTranslatePolicy::None) {
            for (bool retry : {false, true}) {
                const auto record = RunRecord::load(path);
                std::vector<GenerationRequest> requests;
                for (const auto& [tag, e] : record.executions) {
                    if (!problems.count(e.problem_id)) continue;
                    if (config_.back_translate == BackTranslatePolicy::Correct && !e.verdict.overall_correct) continue;
                    const auto first = back_translation_tag(tag, false);
                    const auto* answer = record.response(first);
                    if (!retry && answer) continue;
                    if (retry) {
                        // Only a first answer that came back but named no category is retried.
                        if (!answer || parse_back_translation(answer->text)) continue;
                        if (record.has_response(back_translation_tag(tag, true))) continue;
                    }
                    // Without extractable code the whole solver answer is shown.
                    const auto* solver = record.response(tag);
                    const std::string code = e.extraction_ok ? e.source_code : (solver ? solver->text : std::string());
                    requests.push_back(make_request(RoleTag::BackTranslator, config_.alg_backend,
                                                    build_back_translation_prompt(code, retry, *templates),
                                                    back_translation_tag(tag, retry)));
                }
                batch(config_.alg_backend, requests);
            }
        }

        const auto record = RunRecord::load(path);
        const RunView view(record);
        result.reports = summary_report(view);
        write_reports(result.reports, reports_dir());
        writer.append({{"kind", "metrics"}, {"summary", result.reports.files.at("summary.tsv")}});
    }

    for (auto& [id, backend] : backends_) backend->set_sink({});
    result.backend_calls = calls.load();
    result.generation_failures = failures.load();
    return result;
}

}  // namespace narrbench
