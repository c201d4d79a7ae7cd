#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutor/knowledge_base.hpp"
#include "tutor/portfolio.hpp"
#include "tutor/prompting.hpp"

namespace tutor {

using Json = nlohmann::json;

// File helpers. All throw IoError (unreadable/unwritable) or ParseError.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
Json read_json_file(const std::string& path);
std::vector<Json> read_json_lines(const std::string& path);
Json parse_json(const std::string& text);

// Field access that reports schema problems as ParseError instead of the
// library's exception types.
std::string require_string(const Json& obj, const char* field);
double require_number(const Json& obj, const char* field);

Json record_to_json(const AssessmentRecord& record);
AssessmentRecord record_from_json(const Json& j);

Json mapping_to_json(const IloMapping& mapping);
IloMapping mapping_from_json(const Json& j);

Json portfolio_to_json(const StudentPortfolio& portfolio);
StudentPortfolio portfolio_from_json(const Json& j);

Json snippet_to_json(const KnowledgeSnippet& snippet);
KnowledgeSnippet snippet_from_json(const Json& j);

Json task_to_json(const TaskSpec& task);
TaskSpec task_from_json(const Json& j);

TierDirectiveSet directive_set_from_json(const Json& j);
FewShotExample fewshot_from_json(const Json& j);

}  // namespace tutor
