#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/error.hpp"

namespace tutor {

struct GenerationRequest {
    std::string prompt_text;
    double temperature = 0.7;
    int max_output_tokens = 1024;
    std::optional<std::int64_t> seed_hint;
};

struct GenerationResult {
    std::string text;
    double latency_ms = 0.0;
    std::string backend_id;
    bool simulated_latency = false;
};

/// What a backend hands back for one slot. A backend may report a latency
/// instead of letting the gateway time the exchange (scripted fixtures do
/// this to make experiment timings reproducible).
struct BackendReply {
    std::string text;
    std::optional<double> simulated_latency_ms;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    /// Produces the completion for `slot` of a batch. Must be safe to call
    /// concurrently. Throws Error (Timeout, BackendError).
    virtual BackendReply complete(const GenerationRequest& request, std::size_t slot,
                                  std::chrono::milliseconds deadline) = 0;
};

/// 64-bit FNV-1a of the prompt, as 16 lowercase hex digits.
std::string prompt_hash(std::string_view prompt_text);

struct ScriptedOptions {
    std::chrono::milliseconds delay{0};                // slept in every slot
    std::map<std::size_t, ErrorCode> failing_slots;    // slot -> injected failure
};

/// Canned responses read from a directory:
///   <hash>-<slot>.txt   response for that prompt and slot
///   <hash>.txt          response for that prompt, any slot
///   routes.json         substring routes, first match wins:
///     {"simulated_latency": bool,
///      "routes": [{"name", "all_of": [..], "none_of": [..],
///                  "latency_ms": number, "responses": [{"text"} | {"file"}]}]}
/// Route slot i answers with responses[i % size]. Everything is loaded up
/// front, so replies are a pure function of (prompt, slot).
class ScriptedBackend final : public Backend {
public:
    explicit ScriptedBackend(const std::filesystem::path& dir, ScriptedOptions options = {});
    /// Inline construction for tests: a single catch-all route.
    ScriptedBackend(std::vector<std::string> responses, ScriptedOptions options = {});

    std::string id() const override { return "scripted"; }
    BackendReply complete(const GenerationRequest& request, std::size_t slot,
                          std::chrono::milliseconds deadline) override;

    void add_canned(std::string_view prompt_text, std::optional<std::size_t> slot, std::string text);

    struct Route {
        std::string name;
        std::vector<std::string> all_of;
        std::vector<std::string> none_of;
        std::vector<std::string> responses;
        std::optional<double> latency_ms;
    };

private:
    ScriptedOptions options_;
    bool simulated_latency_ = false;
    std::map<std::string, std::string> canned_;  // "<hash>" or "<hash>-<slot>"
    std::vector<Route> routes_;
};

struct RemoteConfig {
    std::string url;    // full chat-completions endpoint, http:// or https://
    std::string model;
    std::string api_key;
};

/// Reads ENGINE_LLM_URL / ENGINE_LLM_MODEL / ENGINE_LLM_KEY over `base`.
RemoteConfig remote_config_from_env(RemoteConfig base = {});

/// Chat-completion style HTTP backend: one user message with the prompt,
/// reply text taken from choices[0].message.content.
class RemoteBackend final : public Backend {
public:
    explicit RemoteBackend(RemoteConfig config);
    std::string id() const override { return "remote:" + config_.model; }
    BackendReply complete(const GenerationRequest& request, std::size_t slot,
                          std::chrono::milliseconds deadline) override;

private:
    RemoteConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

struct GatewayOptions {
    std::chrono::milliseconds timeout{60000};
    std::size_t parallelism = 5;
};

struct SlotOutcome {
    std::size_t slot = 0;
    std::optional<GenerationResult> result;
    ErrorCode error = ErrorCode::Ok;
    std::string error_message;

    bool ok() const noexcept { return result.has_value(); }
};

struct BatchResult {
    std::vector<SlotOutcome> slots;  // issue order
    double wall_clock_ms = 0.0;
    bool simulated = false;

    std::size_t succeeded() const noexcept;
};

class Gateway {
public:
    Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});

    /// Single generation (slot 0). Throws Timeout, BackendError,
    /// EmptyCompletion or InvalidArgument.
    GenerationResult generate(const GenerationRequest& request) const;

    /// n generations issued concurrently up to the configured parallelism.
    /// Failed slots carry their error; throws BatchFailed if none succeed.
    BatchResult generate_batch(const GenerationRequest& request, std::size_t n) const;

    const GatewayOptions& options() const noexcept { return options_; }
    const Backend& backend() const noexcept { return *backend_; }

private:
    GenerationResult run_slot(const GenerationRequest& request, std::size_t slot) const;

    std::shared_ptr<Backend> backend_;
    GatewayOptions options_;
};

/// Makespan of running `durations` in order on `workers` parallel workers,
/// each slot going to the earliest-free worker.
double simulated_makespan(const std::vector<double>& durations, std::size_t workers);

}  // namespace tutor
