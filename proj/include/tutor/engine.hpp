#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tutor/consistency.hpp"
#include "tutor/knowledge_base.hpp"
#include "tutor/llm_gateway.hpp"
#include "tutor/metrics.hpp"
#include "tutor/portfolio.hpp"
#include "tutor/prompting.hpp"

namespace tutor {

enum class BackendKind { Scripted, Remote };

struct BackendConfig {
    BackendKind kind = BackendKind::Scripted;
    std::filesystem::path scripted_dir;  // defaults to <assets>/scripted
    RemoteConfig remote;
    std::chrono::milliseconds timeout{60000};
    std::size_t parallelism = 5;
};

/// Everything tunable lives in one JSON file; see README for the schema.
/// Relative paths resolve against the config file's directory.
struct EngineConfig {
    std::filesystem::path assets_dir;
    std::filesystem::path data_dir = "tutor-data";
    ConsistencyOptions consistency;
    std::size_t retrieval_k = 3;
    ScoreWeights retrieval_weights;
    std::size_t token_budget = kDefaultTokenBudget;
    BackendConfig backend;
    std::vector<std::filesystem::path> knowledge_files;  // bulk-loaded at startup
    std::size_t snapshot_every = 50;
    std::filesystem::path static_dir;  // built web UI served under "/", if present
};

/// Compiled-in location of the shipped data files.
std::filesystem::path default_assets_dir();

/// Defaults, then the file (if given), then ENGINE_LLM_URL/MODEL/KEY and
/// TUTOR_DATA_DIR. Throws ConfigurationError or ParseError.
EngineConfig load_engine_config(const std::optional<std::filesystem::path>& file);

std::shared_ptr<Backend> make_backend(const BackendConfig& config, const std::filesystem::path& assets_dir);

/// Immutable collaborators every feedback round needs.
struct Engine {
    EngineConfig config;
    std::shared_ptr<const PromptRegistry> registry;
    std::shared_ptr<const BandTable> bands;
    std::shared_ptr<const Gateway> gateway;

    /// Loads registries and the band table from the assets dir and builds
    /// the configured backend.
    static Engine create(EngineConfig config);
    /// Fresh knowledge base holding the configured bulk-load files.
    KnowledgeBase initial_knowledge() const;
};

struct FeedbackRun {
    Condition condition = Condition::General;
    PromptBundle bundle;
    std::vector<ScoredSnippet> retrieved;
    SelfConsistencyRound round;
    MetricReading reading;
};

/// derive_tier -> retrieve -> build_tailored_prompt -> self-consistency -> measure.
FeedbackRun run_tailored_feedback(const Engine& engine, const KnowledgeBase& knowledge,
                                  const StudentPortfolio& portfolio, const TaskSpec& task,
                                  std::string_view response_text);

/// Baseline prompt -> self-consistency -> measure.
FeedbackRun run_general_feedback(const Engine& engine, const TaskSpec& task,
                                 std::string_view response_text);

}  // namespace tutor
