#include "tutor/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "tutor/error.hpp"
#include "tutor/json_codec.hpp"

namespace tutor {

namespace fs = std::filesystem;

ExperimentPlan plan_from_json(const Json& j) {
    ExperimentPlan plan;
    try {
        plan.samples_per_task = j.value("samples_per_task", plan.samples_per_task);
        if (j.contains("conditions")) {
            plan.conditions.clear();
            for (const auto& c : j.at("conditions")) {
                const auto cond = parse_condition(c.get<std::string>());
                if (!cond) {
                    throw Error(ErrorCode::ParseError,
                                fmt::format("unknown condition '{}'", c.get<std::string>()));
                }
                plan.conditions.push_back(*cond);
            }
        }
        for (const auto& t : j.at("tasks")) {
            plan.tasks.push_back({task_from_json(t), t.value("sample_response", "")});
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ParseError, "malformed experiment plan", e.what());
    }
    if (plan.tasks.empty()) throw Error(ErrorCode::InvalidArgument, "plan needs at least one task");
    if (plan.samples_per_task < 1) {
        throw Error(ErrorCode::InvalidArgument, "samples_per_task must be at least 1");
    }
    return plan;
}

ExperimentPlan load_plan(const fs::path& file) { return plan_from_json(read_json_file(file.string())); }

std::vector<MetricReading> ExperimentReport::readings() const {
    std::vector<MetricReading> out;
    for (const auto& a : arms) {
        if (a.reading) out.push_back(*a.reading);
    }
    return out;
}

const ArmResult* ExperimentReport::arm(const std::string& task_id, Condition condition) const noexcept {
    for (const auto& a : arms) {
        if (a.task_id == task_id && a.condition == condition) return &a;
    }
    return nullptr;
}

ExperimentReport run_experiment(const ExperimentPlan& plan,
                                const std::vector<StudentPortfolio>& cohort, const Engine& engine,
                                const KnowledgeBase& knowledge, const ExperimentOptions& options) {
    // lowest student id per tier
    std::map<SkillTier, const StudentPortfolio*> representative;
    for (const auto& p : cohort) {
        SkillTier tier;
        try {
            tier = derive_tier(p);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::InsufficientData) throw;
            continue;
        }
        auto& slot = representative[tier];
        if (!slot || p.student_id() < slot->student_id()) slot = &p;
    }
    std::vector<std::string> missing;
    for (Condition c : plan.conditions) {
        if (auto tier = tier_of(c); tier && !representative.count(*tier)) {
            missing.emplace_back(tier_slug(*tier));
        }
    }
    if (!missing.empty()) {
        throw Error(ErrorCode::MissingTier,
                    fmt::format("cohort has no student in tier(s): {}", fmt::join(missing, ", ")),
                    fmt::format("{}", fmt::join(missing, ",")));
    }

    Engine arm_engine = engine;
    arm_engine.config.consistency.samples = plan.samples_per_task;

    ExperimentReport report;
    for (const auto& pt : plan.tasks) {
        for (Condition c : plan.conditions) {
            ArmResult arm;
            arm.task_id = pt.task.task_id;
            arm.condition = c;
            arm.samples = plan.samples_per_task;
            if (auto tier = tier_of(c)) arm.student_id = representative.at(*tier)->student_id();
            report.arms.push_back(std::move(arm));
        }
    }

    auto run_arm = [&](std::size_t index) {
        ArmResult& arm = report.arms[index];
        const PlanTask& pt = plan.tasks[index / plan.conditions.size()];
        try {
            FeedbackRun run;
            if (auto tier = tier_of(arm.condition)) {
                run = run_tailored_feedback(arm_engine, knowledge, *representative.at(*tier), pt.task,
                                            pt.sample_response);
            } else {
                run = run_general_feedback(arm_engine, pt.task, pt.sample_response);
            }
            arm.reading = std::move(run.reading);
            arm.cluster_size = run.round.vote.cluster_size;
            arm.snippet_ids = run.bundle.snippet_ids;
        } catch (const Error& e) {
            arm.error = fmt::format("{}: {}", error_code_name(e.code()), e.what());
        }
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < report.arms.size(); i = next++) run_arm(i);
    };
    {
        const std::size_t workers =
            std::clamp<std::size_t>(options.arm_parallelism, 1, report.arms.size());
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }

    try {
        report.ordering_checks = check_orderings(report);
    } catch (const Error& e) {
        // plans without all four conditions have nothing to order
        if (e.code() != ErrorCode::IncompleteReport) throw;
    }
    return report;
}

std::vector<OrderingCheck> check_orderings(const ExperimentReport& report) {
    std::vector<std::string> task_ids;
    for (const auto& a : report.arms) {
        if (std::find(task_ids.begin(), task_ids.end(), a.task_id) == task_ids.end()) {
            task_ids.push_back(a.task_id);
        }
    }
    if (task_ids.empty()) throw Error(ErrorCode::IncompleteReport, "report has no arms");

    std::vector<OrderingCheck> checks;
    for (const auto& task_id : task_ids) {
        std::map<Condition, const ArmResult*> arms;
        for (Condition c : kAllConditions) {
            const ArmResult* a = report.arm(task_id, c);
            if (!a) {
                throw Error(ErrorCode::IncompleteReport,
                            fmt::format("task {} has no {} arm", task_id, condition_slug(c)));
            }
            arms[c] = a;
        }
        auto fkrs = [&](Condition c) -> std::optional<double> {
            const auto& r = arms[c]->reading;
            return r ? r->fkrs : std::nullopt;
        };
        auto time = [&](Condition c) -> std::optional<double> {
            const auto& r = arms[c]->reading;
            return r ? std::optional<double>(r->response_time_ms) : std::nullopt;
        };
        auto spec = [&](Condition c) -> std::optional<double> {
            const auto& r = arms[c]->reading;
            return r ? std::optional<double>(static_cast<double>(r->specificity_sentences))
                     : std::nullopt;
        };
        auto gt = [](std::optional<double> a, std::optional<double> b) { return a && b && *a > *b; };

        using C = Condition;
        checks.push_back({"C1", task_id, gt(fkrs(C::BelowAverage), fkrs(C::General))});
        checks.push_back({"C2", task_id,
                          gt(time(C::General), time(C::BelowAverage)) &&
                              gt(time(C::General), time(C::Average)) &&
                              gt(time(C::General), time(C::AboveAverage))});
        checks.push_back({"C3", task_id,
                          gt(time(C::Average), time(C::BelowAverage)) &&
                              gt(time(C::AboveAverage), time(C::Average))});
        checks.push_back({"C4", task_id,
                          gt(spec(C::BelowAverage), spec(C::Average)) &&
                              gt(spec(C::Average), spec(C::AboveAverage))});
    }
    return checks;
}

namespace {

std::string cell(std::optional<double> v) { return v ? fmt::format("{:.3f}", *v) : std::string{}; }

void write_plot(const ExperimentReport& report, const fs::path& file,
                std::optional<double> (*value)(const MetricReading&)) {
    std::vector<std::string> task_ids;
    std::vector<Condition> conditions;
    for (const auto& a : report.arms) {
        if (std::find(task_ids.begin(), task_ids.end(), a.task_id) == task_ids.end()) task_ids.push_back(a.task_id);
        if (std::find(conditions.begin(), conditions.end(), a.condition) == conditions.end()) conditions.push_back(a.condition);
    }
    std::string out = "task_id";
    for (Condition c : conditions) out += fmt::format(",{}", condition_slug(c));
    out += '\n';
    for (const auto& t : task_ids) {
        out += t;
        for (Condition c : conditions) {
            const ArmResult* a = report.arm(t, c);
            out += ',';
            if (a && a->reading) out += cell(value(*a->reading));
        }
        out += '\n';
    }
    write_text_file(file.string(), out);
}

}  // namespace

Json report_to_json(const ExperimentReport& report) {
    Json arms = Json::array();
    for (const auto& a : report.arms) {
        Json arm = {{"task_id", a.task_id},
                    {"condition", condition_slug(a.condition)},
                    {"student_id", a.student_id},
                    {"status", a.failed() ? "failed" : "ok"},
                    {"samples", a.samples},
                    {"cluster_size", a.cluster_size},
                    {"snippet_ids", a.snippet_ids}};
        if (a.reading) {
            arm["fkrs"] = a.reading->fkrs ? Json(*a.reading->fkrs) : Json(nullptr);
            arm["response_time_ms"] = a.reading->response_time_ms;
            arm["specificity"] = a.reading->specificity_sentences;
            arm["warnings"] = a.reading->warnings;
        } else {
            arm["error"] = a.error;
        }
        arms.push_back(std::move(arm));
    }
    Json checks = Json::array();
    for (const auto& c : report.ordering_checks) {
        checks.push_back({{"claim", c.claim_id}, {"task_id", c.task_id}, {"holds", c.holds}});
    }
    return {{"arms", std::move(arms)}, {"ordering_checks", std::move(checks)}};
}

void export_report(const ExperimentReport& report, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot create {}: {}", dir.string(), ec.message()));

    std::string csv = "task_id,condition,fkrs,response_time_ms,specificity,status\n";
    for (const auto& a : report.arms) {
        if (a.reading) {
            csv += fmt::format("{},{},{},{:.3f},{},ok\n", a.task_id, condition_slug(a.condition),
                               cell(a.reading->fkrs), a.reading->response_time_ms,
                               a.reading->specificity_sentences);
        } else {
            csv += fmt::format("{},{},,,,failed\n", a.task_id, condition_slug(a.condition));
        }
    }
    write_text_file((dir / "report.csv").string(), csv);
    write_plot(report, dir / "plot_fkrs.csv", [](const MetricReading& r) { return r.fkrs; });
    write_plot(report, dir / "plot_response_time_ms.csv",
               [](const MetricReading& r) { return std::optional<double>(r.response_time_ms); });
    write_plot(report, dir / "plot_specificity.csv", [](const MetricReading& r) {
        return std::optional<double>(static_cast<double>(r.specificity_sentences));
    });
    write_text_file((dir / "report.json").string(), report_to_json(report).dump(2) + "\n");
}

}  // namespace tutor
