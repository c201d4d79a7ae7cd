#include "tutor/json_codec.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tutor/error.hpp"

namespace tutor {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot read {}", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path));
    out << content;
    if (!out) throw Error(ErrorCode::IoError, fmt::format("failed writing {}", path));
}

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ParseError, "malformed JSON", e.what());
    }
}

Json read_json_file(const std::string& path) {
    try {
        return parse_json(read_text_file(path));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ParseError) throw;
        throw Error(ErrorCode::ParseError, fmt::format("malformed JSON in {}", path), e.detail());
    }
}

std::vector<Json> read_json_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot read {}", path));
    std::vector<Json> out;
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const Json::parse_error& e) {
            throw Error(ErrorCode::ParseError, fmt::format("{}:{}: malformed JSON", path, lineno),
                        e.what());
        }
    }
    return out;
}

std::string require_string(const Json& obj, const char* field) {
    if (!obj.is_object() || !obj.contains(field) || !obj.at(field).is_string()) {
        throw Error(ErrorCode::ParseError, fmt::format("field '{}' must be a string", field));
    }
    return obj.at(field).get<std::string>();
}

double require_number(const Json& obj, const char* field) {
    if (!obj.is_object() || !obj.contains(field) || !obj.at(field).is_number()) {
        throw Error(ErrorCode::ParseError, fmt::format("field '{}' must be a number", field));
    }
    return obj.at(field).get<double>();
}

namespace {

std::set<std::string> string_set(const Json& obj, const char* field) {
    if (!obj.contains(field)) return {};
    const Json& arr = obj.at(field);
    if (!arr.is_array()) {
        throw Error(ErrorCode::ParseError, fmt::format("field '{}' must be an array", field));
    }
    std::set<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) {
            throw Error(ErrorCode::ParseError,
                        fmt::format("field '{}' must hold only strings", field));
        }
        out.insert(v.get<std::string>());
    }
    return out;
}

}  // namespace

Json record_to_json(const AssessmentRecord& record) {
    return {{"subject_code", record.subject_code},
            {"assessment_id", record.assessment_id},
            {"kind", kind_slug(record.kind)},
            {"mark", record.mark.value()},
            {"recorded_at", record.recorded_at}};
}

AssessmentRecord record_from_json(const Json& j) {
    AssessmentRecord r;
    r.subject_code = require_string(j, "subject_code");
    r.assessment_id = require_string(j, "assessment_id");
    const std::string kind = require_string(j, "kind");
    const auto parsed = parse_kind(kind);
    if (!parsed) throw Error(ErrorCode::ParseError, fmt::format("unknown assessment kind '{}'", kind));
    r.kind = *parsed;
    r.mark = Mark(require_number(j, "mark"));
    r.recorded_at = j.contains("recorded_at") ? require_string(j, "recorded_at") : std::string{};
    return r;
}

Json mapping_to_json(const IloMapping& m) {
    return {{"prerequisite_ilo", m.prerequisite_ilo},
            {"target_ilo", m.target_ilo},
            {"weight", m.weight}};
}

IloMapping mapping_from_json(const Json& j) {
    return {require_string(j, "prerequisite_ilo"), require_string(j, "target_ilo"),
            require_number(j, "weight")};
}

Json portfolio_to_json(const StudentPortfolio& p) {
    Json prior = Json::array();
    for (const auto& r : p.prior_records()) prior.push_back(record_to_json(r));
    Json progress = Json::array();
    for (const auto& r : p.progress_records()) progress.push_back(record_to_json(r));
    Json mappings = Json::array();
    for (const auto& m : p.ilo_mappings()) mappings.push_back(mapping_to_json(m));
    return {{"student_id", p.student_id()},
            {"prior_records", std::move(prior)},
            {"progress_records", std::move(progress)},
            {"ilo_mappings", std::move(mappings)},
            {"failed_prerequisite", p.failed_prerequisite()}};
}

StudentPortfolio portfolio_from_json(const Json& j) {
    StudentPortfolio p(require_string(j, "student_id"));
    if (j.contains("ilo_mappings")) {
        for (const auto& m : j.at("ilo_mappings")) p = p.with_mapping(mapping_from_json(m));
    }
    for (const char* field : {"prior_records", "progress_records"}) {
        if (!j.contains(field)) continue;
        for (const auto& r : j.at(field)) p = p.record_assessment(record_from_json(r));
    }
    return p;
}

Json snippet_to_json(const KnowledgeSnippet& s) {
    return {{"snippet_id", s.snippet_id},
            {"subject_code", s.subject_code},
            {"ilo_ids", s.ilo_ids},
            {"skill_tags", s.skill_tags},
            {"body", s.body}};
}

KnowledgeSnippet snippet_from_json(const Json& j) {
    KnowledgeSnippet s;
    s.snippet_id = require_string(j, "snippet_id");
    s.subject_code = j.contains("subject_code") ? require_string(j, "subject_code") : std::string{};
    s.ilo_ids = string_set(j, "ilo_ids");
    s.skill_tags = string_set(j, "skill_tags");
    s.body = require_string(j, "body");
    return s;
}

Json task_to_json(const TaskSpec& t) {
    return {{"task_id", t.task_id},
            {"statement", t.statement},
            {"skill_tags", t.skill_tags},
            {"complexity_rank", t.complexity_rank}};
}

TaskSpec task_from_json(const Json& j) {
    TaskSpec t;
    t.task_id = require_string(j, "task_id");
    t.statement = require_string(j, "statement");
    t.skill_tags = string_set(j, "skill_tags");
    t.complexity_rank = static_cast<int>(require_number(j, "complexity_rank"));
    validate_task(t);
    return t;
}

TierDirectiveSet directive_set_from_json(const Json& j) {
    const std::string slug = require_string(j, "tier");
    const auto tier = parse_tier(slug);
    if (!tier) throw Error(ErrorCode::ParseError, fmt::format("unknown tier '{}'", slug));
    TierDirectiveSet set;
    set.tier = *tier;
    for (const auto& d : j.at("directives")) set.directives.push_back(d.get<std::string>());
    return set;
}

FewShotExample fewshot_from_json(const Json& j) {
    FewShotExample e;
    e.example_id = require_string(j, "example_id");
    e.skill_tags = string_set(j, "skill_tags");
    e.task_statement = require_string(j, "task_statement");
    e.student_response = require_string(j, "student_response");
    for (const auto& [slug, text] : j.at("feedback_per_tier").items()) {
        const auto tier = parse_tier(slug);
        if (!tier) throw Error(ErrorCode::ParseError, fmt::format("unknown tier '{}'", slug));
        e.feedback_per_tier[*tier] = text.get<std::string>();
    }
    return e;
}

}  // namespace tutor
