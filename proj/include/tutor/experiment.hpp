#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tutor/engine.hpp"
#include "tutor/json_codec.hpp"
#include "tutor/metrics.hpp"
#include "tutor/prompting.hpp"

namespace tutor {

struct PlanTask {
    TaskSpec task;
    std::string sample_response;  // the student answer every arm is given
};

struct ExperimentPlan {
    std::vector<PlanTask> tasks;
    std::vector<Condition> conditions{std::begin(kAllConditions), std::end(kAllConditions)};
    std::size_t samples_per_task = 5;
};

/// {"samples_per_task": n, "conditions": [...], "tasks": [{task_id,
/// statement, skill_tags, complexity_rank, sample_response}]}
ExperimentPlan plan_from_json(const Json& j);
ExperimentPlan load_plan(const std::filesystem::path& file);

struct ArmResult {
    std::string task_id;
    Condition condition = Condition::General;
    std::string student_id;  // empty for the general arm
    std::optional<MetricReading> reading;
    std::size_t cluster_size = 0;
    std::size_t samples = 0;
    std::vector<std::string> snippet_ids;
    std::string error;  // set when the arm failed

    bool failed() const noexcept { return !reading.has_value(); }
};

struct OrderingCheck {
    std::string claim_id;  // C1..C4
    std::string task_id;
    bool holds = false;
};

struct ExperimentReport {
    std::vector<ArmResult> arms;  // plan task order x condition order
    std::vector<OrderingCheck> ordering_checks;

    std::vector<MetricReading> readings() const;
    const ArmResult* arm(const std::string& task_id, Condition condition) const noexcept;
};

struct ExperimentOptions {
    std::size_t arm_parallelism = 1;
};

/// Runs every (task, condition) arm: tier arms use the lowest-id student of
/// that tier, the general arm the baseline prompt. Throws MissingTier
/// (detail lists the tiers) before any generation happens.
ExperimentReport run_experiment(const ExperimentPlan& plan,
                                const std::vector<StudentPortfolio>& cohort, const Engine& engine,
                                const KnowledgeBase& knowledge, const ExperimentOptions& options = {});

/// Per task: C1 fkrs(below) > fkrs(general); C2 every tailored response time
/// < general; C3 below < average < above response time; C4 specificity
/// below > average > above. Missing readings make a claim fail. Throws
/// IncompleteReport when any task lacks one of the four arms.
std::vector<OrderingCheck> check_orderings(const ExperimentReport& report);

/// Writes report.csv, plot_fkrs.csv, plot_response_time_ms.csv,
/// plot_specificity.csv and report.json into `dir`. Throws IoError.
void export_report(const ExperimentReport& report, const std::filesystem::path& dir);

Json report_to_json(const ExperimentReport& report);

}  // namespace tutor
