#include "tutor/prompting.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "tutor/error.hpp"
#include "tutor/json_codec.hpp"

namespace tutor {

const std::string_view kTailoredPreamble =
    "You are a programming tutor reviewing a student's answer to a machine learning "
    "tutorial task. Tailor your feedback to the student profile below. Work through the "
    "numbered reasoning steps in order. Present the feedback as numbered steps, each with "
    "a short explanation and a coding example where it helps. End with a section titled "
    "\"Additional external links\" that lists useful URLs. Use the reference material and "
    "the example feedback as a guide to depth and structure.";

const std::string_view kGeneralPreamble =
    "You are a programming tutor. Review the student's answer to the task below and give "
    "feedback.";

void validate_task(const TaskSpec& task) {
    if (task.task_id.empty()) throw Error(ErrorCode::InvalidArgument, "task_id must be nonempty");
    if (task.skill_tags.empty()) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("task {} needs at least one skill tag", task.task_id));
    }
    if (task.complexity_rank < 1) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("task {} complexity_rank must be >= 1", task.task_id));
    }
}

std::string_view section_slug(SectionName name) noexcept {
    switch (name) {
        case SectionName::Preamble: return "preamble";
        case SectionName::Portfolio: return "portfolio";
        case SectionName::Knowledge: return "knowledge";
        case SectionName::Directives: return "directives";
        case SectionName::FewShot: return "fewshot";
        case SectionName::Task: return "task";
        case SectionName::Response: return "response";
    }
    return "preamble";
}

std::optional<SectionName> parse_section(std::string_view slug) noexcept {
    for (SectionName n : kSectionOrder) {
        if (section_slug(n) == slug) return n;
    }
    return std::nullopt;
}

const PromptSection* PromptBundle::section(SectionName name) const noexcept {
    for (const auto& s : sections) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

std::size_t estimate_tokens(const std::vector<PromptSection>& sections) noexcept {
    std::size_t chars = 0;
    for (const auto& s : sections) chars += s.text.size();
    return (chars + 3) / 4;
}

void PromptRegistry::set_directives(TierDirectiveSet set) {
    if (set.directives.empty()) {
        throw Error(ErrorCode::ConfigurationError,
                    fmt::format("directive set for {} is empty", tier_slug(set.tier)));
    }
    const SkillTier tier = set.tier;
    directives_[tier] = std::move(set);
}

void PromptRegistry::add_example(FewShotExample example) {
    for (SkillTier t : kAllTiers) {
        if (!example.feedback_per_tier.count(t)) {
            throw Error(ErrorCode::ConfigurationError,
                        fmt::format("few-shot example {} lacks {} feedback", example.example_id,
                                    tier_slug(t)));
        }
    }
    auto pos = std::lower_bound(
        examples_.begin(), examples_.end(), example.example_id,
        [](const FewShotExample& e, const std::string& id) { return e.example_id < id; });
    examples_.insert(pos, std::move(example));
}

const TierDirectiveSet* PromptRegistry::directives_for(SkillTier tier) const noexcept {
    auto it = directives_.find(tier);
    return it == directives_.end() ? nullptr : &it->second;
}

std::vector<const FewShotExample*> PromptRegistry::examples_for(const TaskSpec& task) const {
    std::vector<const FewShotExample*> out;
    for (const auto& e : examples_) {
        bool overlaps = std::any_of(e.skill_tags.begin(), e.skill_tags.end(),
                                    [&](const std::string& t) { return task.skill_tags.count(t); });
        if (overlaps) out.push_back(&e);
    }
    return out;
}

std::vector<std::string> PromptRegistry::all_directives() const {
    std::vector<std::string> out;
    for (const auto& [tier, set] : directives_) {
        out.insert(out.end(), set.directives.begin(), set.directives.end());
    }
    return out;
}

PromptRegistry PromptRegistry::load(const std::filesystem::path& assets_dir) {
    namespace fs = std::filesystem;
    PromptRegistry registry;
    auto json_files = [](const fs::path& dir) {
        std::vector<fs::path> files;
        if (!fs::is_directory(dir)) {
            throw Error(ErrorCode::ConfigurationError,
                        fmt::format("missing registry directory {}", dir.string()));
        }
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        return files;
    };
    for (const auto& file : json_files(assets_dir / "directives")) {
        registry.set_directives(directive_set_from_json(read_json_file(file.string())));
    }
    for (const auto& file : json_files(assets_dir / "fewshot")) {
        registry.add_example(fewshot_from_json(read_json_file(file.string())));
    }
    for (SkillTier t : kAllTiers) {
        if (!registry.directives_for(t)) {
            throw Error(ErrorCode::ConfigurationError,
                        fmt::format("no directive set for {} in {}", tier_slug(t),
                                    assets_dir.string()));
        }
    }
    return registry;
}

namespace {

std::string directives_text(const TierDirectiveSet& set) {
    std::string out;
    for (std::size_t i = 0; i < set.directives.size(); ++i) {
        if (i) out += '\n';
        out += fmt::format("{}. {}", i + 1, set.directives[i]);
    }
    return out;
}

std::string fewshot_text(const std::vector<const FewShotExample*>& examples, SkillTier tier) {
    std::string out;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& e = *examples[i];
        if (i) out += "\n\n";
        out += fmt::format("Example {}\nTask: {}\nStudent's response:\n{}\nFeedback for a {} student:\n{}",
                           i + 1, e.task_statement, e.student_response, tier_display_name(tier),
                           e.feedback_per_tier.at(tier));
    }
    return out;
}

std::string knowledge_text(const std::vector<ScoredSnippet>& snippets, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& s = snippets[i].snippet;
        if (i) out += '\n';
        out += fmt::format("[{}] ({}) {}", s.snippet_id, s.subject_code, s.body);
    }
    return out;
}

std::string task_text(const TaskSpec& task) {
    return fmt::format("Task {}: {}", task.task_id, task.statement);
}

}  // namespace

PromptBundle build_tailored_prompt(const PromptRegistry& registry, const TaskSpec& task,
                                   std::string_view response_text,
                                   const PortfolioSummary& summary, SkillTier tier,
                                   std::vector<ScoredSnippet> snippets,
                                   std::size_t token_budget) {
    const TierDirectiveSet* directives = registry.directives_for(tier);
    if (!directives) {
        throw Error(ErrorCode::ConfigurationError,
                    fmt::format("no directive set registered for {}", tier_slug(tier)));
    }
    auto examples = registry.examples_for(task);
    if (examples.empty()) {
        throw Error(ErrorCode::ConfigurationError,
                    fmt::format("no few-shot example registered for task {}", task.task_id));
    }
    std::stable_sort(snippets.begin(), snippets.end(),
                     [](const ScoredSnippet& a, const ScoredSnippet& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.snippet.snippet_id < b.snippet.snippet_id;
                     });

    std::size_t snippet_count = snippets.size();
    std::size_t example_count = examples.size();
    auto assemble = [&] {
        std::vector<const FewShotExample*> kept(examples.begin(),
                                                examples.begin() + static_cast<long>(example_count));
        return std::vector<PromptSection>{
            {SectionName::Preamble, std::string(kTailoredPreamble)},
            {SectionName::Portfolio, summary.text},
            {SectionName::Knowledge, knowledge_text(snippets, snippet_count)},
            {SectionName::Directives, directives_text(*directives)},
            {SectionName::FewShot, fewshot_text(kept, tier)},
            {SectionName::Task, task_text(task)},
            {SectionName::Response, std::string(response_text)},
        };
    };

    auto sections = assemble();
    while (estimate_tokens(sections) > token_budget && snippet_count > 0) {
        --snippet_count;
        sections = assemble();
    }
    while (estimate_tokens(sections) > token_budget && example_count > 1) {
        --example_count;
        sections = assemble();
    }
    if (estimate_tokens(sections) > token_budget) {
        throw Error(ErrorCode::PromptTooLarge,
                    fmt::format("prompt needs {} tokens without optional content (budget {})",
                                estimate_tokens(sections), token_budget));
    }

    PromptBundle bundle;
    bundle.condition = condition_of(tier);
    bundle.token_estimate = estimate_tokens(sections);
    bundle.sections = std::move(sections);
    bundle.fewshot_count = example_count;
    for (std::size_t i = 0; i < snippet_count; ++i) {
        bundle.snippet_ids.push_back(snippets[i].snippet.snippet_id);
    }
    return bundle;
}

PromptBundle build_general_prompt(const TaskSpec& task, std::string_view response_text) {
    PromptBundle bundle;
    bundle.condition = Condition::General;
    bundle.sections = {
        {SectionName::Preamble, std::string(kGeneralPreamble)},
        {SectionName::Task, task_text(task)},
        {SectionName::Response, std::string(response_text)},
    };
    bundle.token_estimate = estimate_tokens(bundle.sections);
    return bundle;
}

namespace {

constexpr std::string_view kDelimiterOpen = "=== ";
constexpr std::string_view kDelimiterClose = " ===";

bool needs_escape(std::string_view line) {
    return line.rfind("===", 0) == 0 || line.rfind('\\', 0) == 0;
}

}  // namespace

std::string render(const PromptBundle& bundle) {
    std::string out;
    for (const auto& section : bundle.sections) {
        out += kDelimiterOpen;
        out += section_slug(section.name);
        out += kDelimiterClose;
        out += '\n';
        std::string_view text = section.text;
        std::size_t start = 0;
        while (true) {
            const auto nl = text.find('\n', start);
            const auto line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
            if (needs_escape(line)) out += '\\';
            out += line;
            out += '\n';
            if (nl == std::string_view::npos) break;
            start = nl + 1;
        }
    }
    return out;
}

std::vector<PromptSection> parse_rendered(std::string_view text) {
    std::vector<PromptSection> sections;
    std::vector<std::string_view> body;
    auto flush = [&] {
        if (sections.empty()) return;
        std::string joined;
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (i) joined += '\n';
            std::string_view line = body[i];
            if (!line.empty() && line.front() == '\\') line.remove_prefix(1);
            joined += line;
        }
        sections.back().text = std::move(joined);
        body.clear();
    };

    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            throw Error(ErrorCode::ParseError, "rendered prompt must end with a newline");
        }
        std::string_view line = text.substr(start, nl - start);
        start = nl + 1;
        if (line.rfind(kDelimiterOpen, 0) == 0 && line.size() > kDelimiterOpen.size() + kDelimiterClose.size() &&
            line.substr(line.size() - kDelimiterClose.size()) == kDelimiterClose) {
            auto slug = line.substr(kDelimiterOpen.size(),
                                    line.size() - kDelimiterOpen.size() - kDelimiterClose.size());
            auto name = parse_section(slug);
            if (!name) throw Error(ErrorCode::ParseError, fmt::format("unknown section '{}'", slug));
            flush();
            sections.push_back({*name, {}});
            continue;
        }
        if (sections.empty()) throw Error(ErrorCode::ParseError, "content before first section");
        body.push_back(line);
    }
    flush();
    return sections;
}

}  // namespace tutor
