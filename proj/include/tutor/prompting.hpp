#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/knowledge_base.hpp"
#include "tutor/portfolio.hpp"

namespace tutor {

struct TierDirectiveSet {
    SkillTier tier = SkillTier::Average;
    std::vector<std::string> directives;
};

struct FewShotExample {
    std::string example_id;
    std::set<std::string> skill_tags;  // domain the example applies to
    std::string task_statement;
    std::string student_response;
    std::map<SkillTier, std::string> feedback_per_tier;
};

struct TaskSpec {
    std::string task_id;
    std::string statement;
    std::set<std::string> skill_tags;
    int complexity_rank = 1;

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// Throws InvalidArgument for an empty id, no tags or rank < 1.
void validate_task(const TaskSpec& task);

enum class SectionName { Preamble, Portfolio, Knowledge, Directives, FewShot, Task, Response };

inline constexpr std::array<SectionName, 7> kSectionOrder = {
    SectionName::Preamble,   SectionName::Portfolio, SectionName::Knowledge,
    SectionName::Directives, SectionName::FewShot,   SectionName::Task,
    SectionName::Response};

std::string_view section_slug(SectionName name) noexcept;
std::optional<SectionName> parse_section(std::string_view slug) noexcept;

struct PromptSection {
    SectionName name;
    std::string text;

    friend bool operator==(const PromptSection&, const PromptSection&) = default;
};

struct PromptBundle {
    std::vector<PromptSection> sections;  // always in kSectionOrder order
    Condition condition = Condition::General;
    std::size_t token_estimate = 0;
    std::vector<std::string> snippet_ids;  // knowledge actually included
    std::size_t fewshot_count = 0;

    const PromptSection* section(SectionName name) const noexcept;
    friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

/// ceil(characters / 4) over all section texts.
std::size_t estimate_tokens(const std::vector<PromptSection>& sections) noexcept;

/// Directive sets (one per tier) and few-shot exemplars. Immutable once
/// built; callers swap whole registries to reload.
class PromptRegistry {
public:
    /// Throws ConfigurationError on an empty directive list.
    void set_directives(TierDirectiveSet set);
    /// Throws ConfigurationError unless all three tiers have feedback.
    void add_example(FewShotExample example);

    const TierDirectiveSet* directives_for(SkillTier tier) const noexcept;
    /// Examples whose domain tags intersect the task's tags, in id order.
    std::vector<const FewShotExample*> examples_for(const TaskSpec& task) const;
    const std::vector<FewShotExample>& examples() const noexcept { return examples_; }

    /// Every directive string across all tiers.
    std::vector<std::string> all_directives() const;

    /// Loads `<dir>/directives/*.json` and `<dir>/fewshot/*.json`.
    static PromptRegistry load(const std::filesystem::path& assets_dir);

private:
    std::map<SkillTier, TierDirectiveSet> directives_;
    std::vector<FewShotExample> examples_;
};

inline constexpr std::size_t kDefaultTokenBudget = 3000;

extern const std::string_view kTailoredPreamble;
extern const std::string_view kGeneralPreamble;

/// Seven-section tier-specific prompt. Snippets go in highest score first;
/// over budget, whole snippets drop lowest-score-first, then few-shot
/// examples beyond the first. Throws ConfigurationError or PromptTooLarge.
PromptBundle build_tailored_prompt(const PromptRegistry& registry, const TaskSpec& task,
                                   std::string_view response_text,
                                   const PortfolioSummary& summary, SkillTier tier,
                                   std::vector<ScoredSnippet> snippets,
                                   std::size_t token_budget = kDefaultTokenBudget);

/// Untailored baseline: preamble, task and response only.
PromptBundle build_general_prompt(const TaskSpec& task, std::string_view response_text);

/// Sections in order, each introduced by a "=== <name> ===" line. Content
/// lines that start with "===" or a backslash get a backslash prefix.
std::string render(const PromptBundle& bundle);

/// Inverse of render's section layout. Throws ParseError on malformed text.
std::vector<PromptSection> parse_rendered(std::string_view text);

}  // namespace tutor
