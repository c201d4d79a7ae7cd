#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tutor {

enum class SkillTier { BelowAverage, Average, AboveAverage };

inline constexpr SkillTier kAllTiers[] = {SkillTier::BelowAverage, SkillTier::Average,
                                          SkillTier::AboveAverage};

// "below-average", "average", "above-average"
std::string_view tier_slug(SkillTier tier) noexcept;
// "below average", "average", "above average"
std::string_view tier_display_name(SkillTier tier) noexcept;
std::optional<SkillTier> parse_tier(std::string_view slug) noexcept;

/// An experiment arm or prompt flavour: one of the tiers, or the untailored
/// general baseline.
enum class Condition { BelowAverage, Average, AboveAverage, General };

inline constexpr Condition kAllConditions[] = {Condition::BelowAverage, Condition::Average,
                                               Condition::AboveAverage, Condition::General};

Condition condition_of(SkillTier tier) noexcept;
std::optional<SkillTier> tier_of(Condition condition) noexcept;
// tier slugs plus "general"
std::string_view condition_slug(Condition condition) noexcept;
std::optional<Condition> parse_condition(std::string_view slug) noexcept;

inline constexpr double kPassMark = 50.0;
inline constexpr double kAverageFloor = 65.0;
inline constexpr double kAboveAverageFloor = 80.0;

/// A percentage score. Construction rejects anything outside [0, 100].
class Mark {
public:
    explicit Mark(double value);
    double value() const noexcept { return value_; }
    friend bool operator==(const Mark&, const Mark&) = default;

private:
    double value_;
};

/// Maps a passing mark onto its tier: [50,65) below average, [65,80] average,
/// (80,100] above average. Marks under the pass mark throw FailedPrerequisite.
SkillTier categorize(Mark mark);

enum class AssessmentKind { PrerequisiteFinal, Tutorial, Quiz, Assignment };

std::string_view kind_slug(AssessmentKind kind) noexcept;
std::optional<AssessmentKind> parse_kind(std::string_view slug) noexcept;

struct AssessmentRecord {
    std::string subject_code;
    std::string assessment_id;
    Mark mark{0.0};
    AssessmentKind kind = AssessmentKind::Tutorial;
    std::string recorded_at;  // ISO-8601

    friend bool operator==(const AssessmentRecord&, const AssessmentRecord&) = default;
};

/// Links a prerequisite ILO to a target-subject ILO. Prerequisite ILOs are
/// written "<subject>:<ilo>" (e.g. "C108:ILO3"); the subject part selects the
/// records whose marks measure achievement on that ILO. An id with no colon
/// names the subject itself.
struct IloMapping {
    std::string prerequisite_ilo;
    std::string target_ilo;
    double weight = 1.0;

    friend bool operator==(const IloMapping&, const IloMapping&) = default;
};

std::string_view prerequisite_subject_of(std::string_view prerequisite_ilo) noexcept;

struct IloAchievement {
    std::string target_ilo;
    double achievement = 0.0;
};

/// Immutable per-student knowledge base. Mutators return a new value; the
/// tier is always recomputed from the records, never cached.
class StudentPortfolio {
public:
    StudentPortfolio() = default;
    explicit StudentPortfolio(std::string student_id, std::vector<IloMapping> mappings = {});

    const std::string& student_id() const noexcept { return student_id_; }
    const std::vector<AssessmentRecord>& prior_records() const noexcept { return prior_; }
    const std::vector<AssessmentRecord>& progress_records() const noexcept { return progress_; }
    const std::vector<IloMapping>& ilo_mappings() const noexcept { return mappings_; }
    std::size_t record_count() const noexcept { return prior_.size() + progress_.size(); }

    /// True when any prerequisite final mark is below the pass mark.
    bool failed_prerequisite() const noexcept;

    bool has_record(std::string_view subject_code, std::string_view assessment_id) const noexcept;

    /// Appends `record` to prior records (prerequisite finals) or progress
    /// records (everything else). Throws DuplicateAssessment.
    StudentPortfolio record_assessment(AssessmentRecord record) const;

    /// Throws InvalidMapping for weights outside (0,1] or when the weights into
    /// one target ILO would exceed 1.
    StudentPortfolio with_mapping(IloMapping mapping) const;

    /// All passing marks (prior then progress), in record order.
    std::vector<double> categorizable_marks() const;

    /// Mean of the per-subject marks for every subject present.
    std::vector<std::pair<std::string, double>> subject_means() const;

    /// Weighted achievement per target ILO, sorted by target ILO id. ILOs
    /// whose mapped subjects have no records are omitted.
    std::vector<IloAchievement> target_ilo_achievements() const;

    /// Lowest-achievement target ILO (ties broken by id), if any is mapped.
    std::optional<IloAchievement> weakest_target_ilo() const;

    friend bool operator==(const StudentPortfolio&, const StudentPortfolio&) = default;

private:
    std::string student_id_;
    std::vector<AssessmentRecord> prior_;
    std::vector<AssessmentRecord> progress_;
    std::vector<IloMapping> mappings_;
};

/// Equal-weight mean of every passing mark across both record sets,
/// categorized. Throws InsufficientData when no mark passes.
SkillTier derive_tier(const StudentPortfolio& portfolio);

inline constexpr std::size_t kSummaryWordCap = 400;

struct PortfolioSummary {
    SkillTier tier;
    std::string text;
};

/// Deterministic plain-text block conditioning the model on the student.
PortfolioSummary summarize_for_prompt(const StudentPortfolio& portfolio);

}  // namespace tutor
