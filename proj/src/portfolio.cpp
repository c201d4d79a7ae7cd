#include "tutor/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "tutor/error.hpp"

namespace tutor {

std::string_view tier_slug(SkillTier tier) noexcept {
    switch (tier) {
        case SkillTier::BelowAverage: return "below-average";
        case SkillTier::Average: return "average";
        case SkillTier::AboveAverage: return "above-average";
    }
    return "average";
}

std::string_view tier_display_name(SkillTier tier) noexcept {
    switch (tier) {
        case SkillTier::BelowAverage: return "below average";
        case SkillTier::Average: return "average";
        case SkillTier::AboveAverage: return "above average";
    }
    return "average";
}

std::optional<SkillTier> parse_tier(std::string_view slug) noexcept {
    for (SkillTier t : kAllTiers) {
        if (slug == tier_slug(t)) return t;
    }
    return std::nullopt;
}

Condition condition_of(SkillTier tier) noexcept {
    switch (tier) {
        case SkillTier::BelowAverage: return Condition::BelowAverage;
        case SkillTier::Average: return Condition::Average;
        case SkillTier::AboveAverage: return Condition::AboveAverage;
    }
    return Condition::General;
}

std::optional<SkillTier> tier_of(Condition condition) noexcept {
    switch (condition) {
        case Condition::BelowAverage: return SkillTier::BelowAverage;
        case Condition::Average: return SkillTier::Average;
        case Condition::AboveAverage: return SkillTier::AboveAverage;
        case Condition::General: return std::nullopt;
    }
    return std::nullopt;
}

std::string_view condition_slug(Condition condition) noexcept {
    if (auto tier = tier_of(condition)) return tier_slug(*tier);
    return "general";
}

std::optional<Condition> parse_condition(std::string_view slug) noexcept {
    if (slug == "general") return Condition::General;
    if (auto tier = parse_tier(slug)) return condition_of(*tier);
    return std::nullopt;
}

Mark::Mark(double value) : value_(value) {
    if (!std::isfinite(value) || value < 0.0 || value > 100.0) {
        throw Error(ErrorCode::InvalidMark, fmt::format("mark {} is outside [0, 100]", value));
    }
}

SkillTier categorize(Mark mark) {
    const double v = mark.value();
    if (v < kPassMark) {
        throw Error(ErrorCode::FailedPrerequisite,
                    fmt::format("mark {} is below the pass mark of {}", v, kPassMark));
    }
    if (v < kAverageFloor) return SkillTier::BelowAverage;
    if (v <= kAboveAverageFloor) return SkillTier::Average;
    return SkillTier::AboveAverage;
}

std::string_view kind_slug(AssessmentKind kind) noexcept {
    switch (kind) {
        case AssessmentKind::PrerequisiteFinal: return "prerequisite-final";
        case AssessmentKind::Tutorial: return "tutorial";
        case AssessmentKind::Quiz: return "quiz";
        case AssessmentKind::Assignment: return "assignment";
    }
    return "tutorial";
}

std::optional<AssessmentKind> parse_kind(std::string_view slug) noexcept {
    for (auto k : {AssessmentKind::PrerequisiteFinal, AssessmentKind::Tutorial,
                   AssessmentKind::Quiz, AssessmentKind::Assignment}) {
        if (slug == kind_slug(k)) return k;
    }
    return std::nullopt;
}

std::string_view prerequisite_subject_of(std::string_view prerequisite_ilo) noexcept {
    const auto colon = prerequisite_ilo.find(':');
    return colon == std::string_view::npos ? prerequisite_ilo : prerequisite_ilo.substr(0, colon);
}

StudentPortfolio::StudentPortfolio(std::string student_id, std::vector<IloMapping> mappings)
    : student_id_(std::move(student_id)) {
    for (auto& m : mappings) *this = with_mapping(std::move(m));
}

bool StudentPortfolio::failed_prerequisite() const noexcept {
    return std::any_of(prior_.begin(), prior_.end(),
                       [](const AssessmentRecord& r) { return r.mark.value() < kPassMark; });
}

bool StudentPortfolio::has_record(std::string_view subject_code,
                                  std::string_view assessment_id) const noexcept {
    auto same = [&](const AssessmentRecord& r) {
        return r.subject_code == subject_code && r.assessment_id == assessment_id;
    };
    return std::any_of(prior_.begin(), prior_.end(), same) ||
           std::any_of(progress_.begin(), progress_.end(), same);
}

StudentPortfolio StudentPortfolio::record_assessment(AssessmentRecord record) const {
    if (has_record(record.subject_code, record.assessment_id)) {
        throw Error(ErrorCode::DuplicateAssessment,
                    fmt::format("assessment {}/{} already recorded for {}", record.subject_code,
                                record.assessment_id, student_id_));
    }
    StudentPortfolio next = *this;
    if (record.kind == AssessmentKind::PrerequisiteFinal) {
        next.prior_.push_back(std::move(record));
    } else {
        next.progress_.push_back(std::move(record));
    }
    return next;
}

StudentPortfolio StudentPortfolio::with_mapping(IloMapping mapping) const {
    if (!(mapping.weight > 0.0 && mapping.weight <= 1.0)) {
        throw Error(ErrorCode::InvalidMapping,
                    fmt::format("ILO mapping weight {} is outside (0, 1]", mapping.weight));
    }
    if (mapping.prerequisite_ilo.empty() || mapping.target_ilo.empty()) {
        throw Error(ErrorCode::InvalidMapping, "ILO mapping ids must be nonempty");
    }
    double into_target = mapping.weight;
    for (const auto& m : mappings_) {
        if (m.target_ilo == mapping.target_ilo) into_target += m.weight;
    }
    if (into_target > 1.0 + 1e-9) {
        throw Error(ErrorCode::InvalidMapping,
                    fmt::format("weights into {} would sum to {}", mapping.target_ilo, into_target));
    }
    StudentPortfolio next = *this;
    next.mappings_.push_back(std::move(mapping));
    return next;
}

std::vector<double> StudentPortfolio::categorizable_marks() const {
    std::vector<double> marks;
    for (const auto* set : {&prior_, &progress_}) {
        for (const auto& r : *set) {
            if (r.mark.value() >= kPassMark) marks.push_back(r.mark.value());
        }
    }
    return marks;
}

std::vector<std::pair<std::string, double>> StudentPortfolio::subject_means() const {
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto* set : {&prior_, &progress_}) {
        for (const auto& r : *set) {
            auto& [sum, count] = acc[r.subject_code];
            sum += r.mark.value();
            ++count;
        }
    }
    std::vector<std::pair<std::string, double>> out;
    out.reserve(acc.size());
    for (const auto& [subject, sc] : acc) out.emplace_back(subject, sc.first / sc.second);
    return out;
}

std::vector<IloAchievement> StudentPortfolio::target_ilo_achievements() const {
    std::map<std::string, double> subject_mean;
    for (auto& [s, m] : subject_means()) subject_mean[s] = m;

    std::map<std::string, std::pair<double, double>> acc;  // weighted sum, weight total
    for (const auto& m : mappings_) {
        auto it = subject_mean.find(std::string(prerequisite_subject_of(m.prerequisite_ilo)));
        if (it == subject_mean.end()) continue;
        auto& [weighted, total] = acc[m.target_ilo];
        weighted += m.weight * it->second;
        total += m.weight;
    }
    std::vector<IloAchievement> out;
    for (const auto& [ilo, wt] : acc) out.push_back({ilo, wt.first / wt.second});
    return out;
}

std::optional<IloAchievement> StudentPortfolio::weakest_target_ilo() const {
    auto all = target_ilo_achievements();
    if (all.empty()) return std::nullopt;
    // all is sorted by id, so min_element's first-wins gives the id tie-break
    return *std::min_element(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.achievement < b.achievement;
    });
}

namespace {

double mean_of(const std::vector<double>& xs) {
    // sort first so the floating-point sum does not depend on record order
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    return std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
}

std::size_t count_words(std::string_view line) {
    std::istringstream in{std::string(line)};
    std::size_t n = 0;
    for (std::string w; in >> w;) ++n;
    return n;
}

}  // namespace

SkillTier derive_tier(const StudentPortfolio& portfolio) {
    const auto marks = portfolio.categorizable_marks();
    if (marks.empty()) {
        throw Error(ErrorCode::InsufficientData,
                    fmt::format("student {} has no passing marks to categorize",
                                portfolio.student_id()));
    }
    return categorize(Mark(mean_of(marks)));
}

PortfolioSummary summarize_for_prompt(const StudentPortfolio& portfolio) {
    const SkillTier tier = derive_tier(portfolio);
    const auto marks = portfolio.categorizable_marks();

    std::vector<std::string> lines;
    lines.push_back(fmt::format("student: {}", portfolio.student_id()));
    lines.push_back(fmt::format("skill tier: {}", tier_display_name(tier)));
    lines.push_back(fmt::format("overall mean mark: {:.1f} over {} passing records", mean_of(marks),
                                marks.size()));
    if (auto weakest = portfolio.weakest_target_ilo()) {
        lines.push_back(fmt::format("weakest target ILO: {} (mapped achievement {:.1f})",
                                    weakest->target_ilo, weakest->achievement));
    } else {
        lines.push_back("weakest target ILO: none mapped");
    }
    lines.push_back(fmt::format("failed prerequisite: {}",
                                portfolio.failed_prerequisite() ? "yes" : "no"));
    for (const auto& [subject, mean] : portfolio.subject_means()) {
        lines.push_back(fmt::format("subject {} mean mark: {:.1f}", subject, mean));
    }

    std::string text;
    std::size_t words = 0;
    for (const auto& line : lines) {
        const std::size_t n = count_words(line);
        if (words + n > kSummaryWordCap) break;
        words += n;
        text += line;
        text += '\n';
    }
    return {tier, std::move(text)};
}

}  // namespace tutor
