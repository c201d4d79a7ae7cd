#include "tutor/llm_gateway.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <queue>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "httplib.h"
#include "tutor/json_codec.hpp"

namespace tutor {

using Clock = std::chrono::steady_clock;

namespace {

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

bool contains(std::string_view haystack, std::string_view needle) {
    return haystack.find(needle) != std::string_view::npos;
}

}  // namespace

std::string prompt_hash(std::string_view prompt_text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : prompt_text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

ScriptedBackend::ScriptedBackend(const std::filesystem::path& dir, ScriptedOptions options)
    : options_(std::move(options)) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw Error(ErrorCode::ConfigurationError,
                    fmt::format("scripted response directory {} does not exist", dir.string()));
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") continue;
        const std::string stem = entry.path().stem().string();
        const auto dash = stem.find('-');
        const std::string hash = stem.substr(0, dash);
        const bool hashed = hash.size() == 16 && std::all_of(hash.begin(), hash.end(), [](char c) {
                                return std::isxdigit(static_cast<unsigned char>(c));
                            });
        if (hashed) canned_[stem] = read_text_file(entry.path().string());
    }
    const auto routes_file = dir / "routes.json";
    if (fs::exists(routes_file)) {
        const auto doc = read_json_file(routes_file.string());
        simulated_latency_ = doc.value("simulated_latency", false);
        for (const auto& r : doc.at("routes")) {
            Route route;
            route.name = r.value("name", "");
            route.all_of = r.value("all_of", std::vector<std::string>{});
            route.none_of = r.value("none_of", std::vector<std::string>{});
            if (r.contains("latency_ms")) route.latency_ms = r.at("latency_ms").get<double>();
            for (const auto& resp : r.at("responses")) {
                if (resp.contains("file")) {
                    route.responses.push_back(
                        read_text_file((dir / resp.at("file").get<std::string>()).string()));
                } else {
                    route.responses.push_back(resp.at("text").get<std::string>());
                }
            }
            if (route.responses.empty()) {
                throw Error(ErrorCode::ConfigurationError,
                            fmt::format("scripted route '{}' has no responses", route.name));
            }
            routes_.push_back(std::move(route));
        }
    }
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses, ScriptedOptions options)
    : options_(std::move(options)) {
    if (responses.empty()) {
        throw Error(ErrorCode::ConfigurationError, "scripted backend needs at least one response");
    }
    routes_.push_back({"inline", {}, {}, std::move(responses), std::nullopt});
}

void ScriptedBackend::add_canned(std::string_view prompt_text, std::optional<std::size_t> slot,
                                 std::string text) {
    std::string key = prompt_hash(prompt_text);
    if (slot) key += fmt::format("-{}", *slot);
    canned_[key] = std::move(text);
}

BackendReply ScriptedBackend::complete(const GenerationRequest& request, std::size_t slot,
                                       std::chrono::milliseconds deadline) {
    if (options_.delay.count() > 0) {
        if (options_.delay > deadline) {
            std::this_thread::sleep_for(deadline);
            throw Error(ErrorCode::Timeout,
                        fmt::format("scripted slot {} exceeded the {} ms deadline", slot,
                                    deadline.count()));
        }
        std::this_thread::sleep_for(options_.delay);
    }
    if (auto it = options_.failing_slots.find(slot); it != options_.failing_slots.end()) {
        throw Error(it->second, fmt::format("injected failure in scripted slot {}", slot));
    }

    const std::string hash = prompt_hash(request.prompt_text);
    if (auto it = canned_.find(fmt::format("{}-{}", hash, slot)); it != canned_.end()) {
        return {it->second, std::nullopt};
    }
    if (auto it = canned_.find(hash); it != canned_.end()) return {it->second, std::nullopt};

    for (const auto& route : routes_) {
        const bool all = std::all_of(route.all_of.begin(), route.all_of.end(), [&](const auto& s) {
            return contains(request.prompt_text, s);
        });
        const bool none = std::none_of(route.none_of.begin(), route.none_of.end(),
                                       [&](const auto& s) { return contains(request.prompt_text, s); });
        if (all && none) {
            BackendReply reply{route.responses[slot % route.responses.size()], std::nullopt};
            if (simulated_latency_) reply.simulated_latency_ms = route.latency_ms.value_or(0.0);
            return reply;
        }
    }
    throw Error(ErrorCode::BackendError,
                fmt::format("no scripted response for prompt hash {} slot {}", hash, slot));
}

RemoteConfig remote_config_from_env(RemoteConfig base) {
    if (const char* v = std::getenv("ENGINE_LLM_URL")) base.url = v;
    if (const char* v = std::getenv("ENGINE_LLM_MODEL")) base.model = v;
    if (const char* v = std::getenv("ENGINE_LLM_KEY")) base.api_key = v;
    return base;
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.url.find("://");
    if (config_.url.empty() || scheme_end == std::string::npos) {
        throw Error(ErrorCode::ConfigurationError,
                    fmt::format("remote backend URL '{}' must look like http(s)://host[:port]/path",
                                config_.url));
    }
    const auto path_start = config_.url.find('/', scheme_end + 3);
    scheme_host_port_ = config_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
}

BackendReply RemoteBackend::complete(const GenerationRequest& request, std::size_t slot,
                                     std::chrono::milliseconds deadline) {
    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(deadline);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(deadline - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

    nlohmann::json body = {
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt_text}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_output_tokens},
    };
    if (request.seed_hint) body["seed"] = *request.seed_hint + static_cast<std::int64_t>(slot);

    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::Read || err == httplib::Error::Write ||
            err == httplib::Error::ConnectionTimeout) {
            throw Error(ErrorCode::Timeout, fmt::format("remote backend timed out ({})",
                                                        httplib::to_string(err)));
        }
        throw Error(ErrorCode::BackendError,
                    fmt::format("remote backend unreachable: {}", httplib::to_string(err)),
                    scheme_host_port_);
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::BackendError,
                    fmt::format("remote backend returned HTTP {}", res->status), res->body);
    }
    try {
        const auto doc = nlohmann::json::parse(res->body);
        return {doc.at("choices").at(0).at("message").at("content").get<std::string>(),
                std::nullopt};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BackendError, "malformed completion response", e.what());
    }
}

std::size_t BatchResult::succeeded() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(slots.begin(), slots.end(), [](const SlotOutcome& s) { return s.ok(); }));
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(options) {
    if (!backend_) throw Error(ErrorCode::ConfigurationError, "gateway needs a backend");
    if (options_.parallelism == 0) options_.parallelism = 1;
}

GenerationResult Gateway::run_slot(const GenerationRequest& request, std::size_t slot) const {
    if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("temperature {} is outside [0, 2]", request.temperature));
    }
    if (request.max_output_tokens < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_output_tokens must be positive");
    }
    const auto start = Clock::now();
    BackendReply reply = backend_->complete(request, slot, options_.timeout);
    const double measured = elapsed_ms(start);
    if (reply.text.empty()) {
        throw Error(ErrorCode::EmptyCompletion,
                    fmt::format("{} returned an empty completion for slot {}", backend_->id(), slot));
    }
    GenerationResult result;
    result.text = std::move(reply.text);
    result.backend_id = backend_->id();
    result.simulated_latency = reply.simulated_latency_ms.has_value();
    result.latency_ms = reply.simulated_latency_ms.value_or(measured);
    return result;
}

GenerationResult Gateway::generate(const GenerationRequest& request) const {
    return run_slot(request, 0);
}

BatchResult Gateway::generate_batch(const GenerationRequest& request, std::size_t n) const {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be at least 1");
    BatchResult batch;
    batch.slots.resize(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t slot = next++; slot < n; slot = next++) {
            SlotOutcome& out = batch.slots[slot];
            out.slot = slot;
            try {
                out.result = run_slot(request, slot);
            } catch (const Error& e) {
                out.error = e.code();
                out.error_message = e.what();
            } catch (const std::exception& e) {
                out.error = ErrorCode::BackendError;
                out.error_message = e.what();
            }
        }
    };

    const auto start = Clock::now();
    {
        const std::size_t workers = std::min(n, options_.parallelism);
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    batch.wall_clock_ms = elapsed_ms(start);

    if (batch.succeeded() == 0) {
        // detail names the shared cause when every slot failed the same way
        const ErrorCode first = batch.slots.front().error;
        const bool uniform = std::all_of(batch.slots.begin(), batch.slots.end(),
                                         [&](const SlotOutcome& s) { return s.error == first; });
        throw Error(ErrorCode::BatchFailed,
                    fmt::format("all {} generations failed; first error: {}", n,
                                batch.slots.front().error_message),
                    uniform ? std::string(error_code_name(first)) : "Mixed");
    }
    const bool all_simulated =
        std::all_of(batch.slots.begin(), batch.slots.end(),
                    [](const SlotOutcome& s) { return !s.ok() || s.result->simulated_latency; });
    if (all_simulated) {
        std::vector<double> durations;
        for (const auto& s : batch.slots) durations.push_back(s.ok() ? s.result->latency_ms : 0.0);
        batch.simulated = true;
        batch.wall_clock_ms = simulated_makespan(durations, options_.parallelism);
    }
    return batch;
}

double simulated_makespan(const std::vector<double>& durations, std::size_t workers) {
    if (workers == 0) workers = 1;
    std::priority_queue<double, std::vector<double>, std::greater<>> free_at;
    for (std::size_t i = 0; i < workers; ++i) free_at.push(0.0);
    double makespan = 0.0;
    for (double d : durations) {
        const double start = free_at.top();
        free_at.pop();
        free_at.push(start + d);
        makespan = std::max(makespan, start + d);
    }
    return makespan;
}

}  // namespace tutor
