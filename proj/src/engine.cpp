#include "tutor/engine.hpp"

#include <cstdlib>

#include <fmt/format.h>

#include "tutor/error.hpp"
#include "tutor/json_codec.hpp"

#ifndef TUTOR_DEFAULT_ASSETS_DIR
#define TUTOR_DEFAULT_ASSETS_DIR "data"
#endif

namespace tutor {

namespace fs = std::filesystem;

fs::path default_assets_dir() { return fs::path(TUTOR_DEFAULT_ASSETS_DIR); }

EngineConfig load_engine_config(const std::optional<fs::path>& file) {
    EngineConfig cfg;
    cfg.assets_dir = default_assets_dir();
    fs::path base = fs::current_path();

    if (file) {
        const Json doc = read_json_file(file->string());
        base = fs::absolute(*file).parent_path();
        auto resolve = [&](const std::string& p) {
            fs::path path(p);
            return path.is_absolute() ? path : base / path;
        };
        try {
            if (doc.contains("assets_dir")) cfg.assets_dir = resolve(doc.at("assets_dir").get<std::string>());
            if (doc.contains("data_dir")) cfg.data_dir = resolve(doc.at("data_dir").get<std::string>());
            if (doc.contains("self_consistency")) {
                const auto& sc = doc.at("self_consistency");
                cfg.consistency.samples = sc.value("samples", cfg.consistency.samples);
                cfg.consistency.threshold = sc.value("threshold", cfg.consistency.threshold);
                cfg.consistency.temperature = sc.value("temperature", cfg.consistency.temperature);
                cfg.consistency.max_output_tokens =
                    sc.value("max_output_tokens", cfg.consistency.max_output_tokens);
            }
            if (doc.contains("retrieval")) {
                const auto& r = doc.at("retrieval");
                cfg.retrieval_k = r.value("k", cfg.retrieval_k);
                cfg.retrieval_weights.skills = r.value("skill_weight", cfg.retrieval_weights.skills);
                cfg.retrieval_weights.ilos = r.value("ilo_weight", cfg.retrieval_weights.ilos);
            }
            cfg.token_budget = doc.value("token_budget", cfg.token_budget);
            cfg.snapshot_every = doc.value("snapshot_every", cfg.snapshot_every);
            if (doc.contains("static_dir")) cfg.static_dir = resolve(doc.at("static_dir").get<std::string>());
            if (doc.contains("knowledge_files")) {
                for (const auto& f : doc.at("knowledge_files")) cfg.knowledge_files.push_back(resolve(f.get<std::string>()));
            }
            if (doc.contains("backend")) {
                const auto& b = doc.at("backend");
                const std::string kind = b.value("kind", "scripted");
                if (kind == "scripted") {
                    cfg.backend.kind = BackendKind::Scripted;
                } else if (kind == "remote") {
                    cfg.backend.kind = BackendKind::Remote;
                } else {
                    throw Error(ErrorCode::ConfigurationError, fmt::format("unknown backend kind '{}'", kind));
                }
                if (b.contains("scripted_dir")) cfg.backend.scripted_dir = resolve(b.at("scripted_dir").get<std::string>());
                cfg.backend.remote.url = b.value("url", "");
                cfg.backend.remote.model = b.value("model", "");
                cfg.backend.remote.api_key = b.value("api_key", "");
                cfg.backend.timeout = std::chrono::milliseconds(b.value("timeout_ms", 60000));
                cfg.backend.parallelism = b.value("parallelism", cfg.backend.parallelism);
            }
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::ParseError, fmt::format("bad config {}", file->string()), e.what());
        }
    }
    cfg.backend.remote = remote_config_from_env(cfg.backend.remote);
    if (const char* dir = std::getenv("TUTOR_DATA_DIR")) cfg.data_dir = dir;
    if (cfg.knowledge_files.empty() && fs::exists(cfg.assets_dir / "knowledge.jsonl")) {
        cfg.knowledge_files.push_back(cfg.assets_dir / "knowledge.jsonl");
    }
    return cfg;
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config, const fs::path& assets_dir) {
    if (config.kind == BackendKind::Remote) return std::make_shared<RemoteBackend>(config.remote);
    const fs::path dir = config.scripted_dir.empty() ? assets_dir / "scripted" : config.scripted_dir;
    return std::make_shared<ScriptedBackend>(dir);
}

Engine Engine::create(EngineConfig config) {
    Engine engine;
    engine.registry = std::make_shared<const PromptRegistry>(PromptRegistry::load(config.assets_dir));
    engine.bands = std::make_shared<const BandTable>(BandTable::load(config.assets_dir / "bands.json"));
    GatewayOptions options{config.backend.timeout, config.backend.parallelism};
    engine.gateway = std::make_shared<const Gateway>(make_backend(config.backend, config.assets_dir), options);
    engine.config = std::move(config);
    return engine;
}

KnowledgeBase Engine::initial_knowledge() const {
    KnowledgeBase kb(config.retrieval_weights);
    for (const auto& f : config.knowledge_files) load_snippets_file(kb, f.string());
    return kb;
}

FeedbackRun run_tailored_feedback(const Engine& engine, const KnowledgeBase& knowledge,
                                  const StudentPortfolio& portfolio, const TaskSpec& task,
                                  std::string_view response_text) {
    const PortfolioSummary summary = summarize_for_prompt(portfolio);

    RetrievalQuery query;
    query.task_skill_tags = task.skill_tags;
    if (auto weakest = portfolio.weakest_target_ilo()) query.weak_ilo_ids.insert(weakest->target_ilo);
    query.tier = summary.tier;
    query.k = engine.config.retrieval_k;

    FeedbackRun run;
    run.condition = condition_of(summary.tier);
    run.retrieved = knowledge.retrieve(query);
    run.bundle = build_tailored_prompt(*engine.registry, task, response_text, summary, summary.tier,
                                       run.retrieved, engine.config.token_budget);
    run.round = run_self_consistency(run.bundle, *engine.gateway, engine.config.consistency);
    run.reading = measure(run.round, run.condition, task.task_id);
    return run;
}

FeedbackRun run_general_feedback(const Engine& engine, const TaskSpec& task,
                                 std::string_view response_text) {
    FeedbackRun run;
    run.condition = Condition::General;
    run.bundle = build_general_prompt(task, response_text);
    run.round = run_self_consistency(run.bundle, *engine.gateway, engine.config.consistency);
    run.reading = measure(run.round, run.condition, task.task_id);
    return run;
}

}  // namespace tutor
