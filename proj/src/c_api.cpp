#include "tutor/tutor_c.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "tutor/cohort.hpp"
#include "tutor/engine.hpp"
#include "tutor/error.hpp"
#include "tutor/experiment.hpp"
#include "tutor/metrics.hpp"
#include "tutor/service.hpp"

struct tutor_engine {
    tutor::EngineConfig config;
    std::once_flag once;
    std::optional<tutor::Engine> engine;

    const tutor::Engine& get() {
        std::call_once(once, [this] { engine = tutor::Engine::create(config); });
        return *engine;
    }
};

struct tutor_service {
    std::unique_ptr<tutor::Service> service;
};

namespace {

thread_local std::string last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <class F>
tutor_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return TUTOR_OK;
    } catch (const tutor::Error& e) {
        last_error = e.detail().empty() ? e.what() : std::string(e.what()) + " (" + e.detail() + ")";
        return static_cast<tutor_status>(e.code());
    } catch (const std::exception& e) {
        last_error = e.what();
        return TUTOR_E_INTERNAL;
    }
}

tutor_status null_argument(const char* name) {
    last_error = std::string(name) + " must not be NULL";
    return TUTOR_E_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* tutor_last_error(void) { return last_error.c_str(); }

void tutor_string_free(char* s) { std::free(s); }

tutor_status tutor_engine_open(const char* config_path, const char* backend_override,
                               tutor_engine** out) {
    if (!out) return null_argument("out");
    return guarded([&] {
        auto handle = std::make_unique<tutor_engine>();
        std::optional<std::filesystem::path> file;
        if (config_path) file = config_path;
        handle->config = tutor::load_engine_config(file);
        if (backend_override) {
            const std::string kind = backend_override;
            if (kind == "scripted") {
                handle->config.backend.kind = tutor::BackendKind::Scripted;
            } else if (kind == "remote") {
                handle->config.backend.kind = tutor::BackendKind::Remote;
            } else {
                throw tutor::Error(tutor::ErrorCode::InvalidArgument,
                                   "backend must be 'scripted' or 'remote'");
            }
        }
        *out = handle.release();
    });
}

void tutor_engine_close(tutor_engine* engine) { delete engine; }

tutor_status tutor_categorize(double mark, int* tier_out) {
    if (!tier_out) return null_argument("tier_out");
    return guarded([&] { *tier_out = static_cast<int>(tutor::categorize(tutor::Mark(mark))); });
}

tutor_status tutor_fkrs(tutor_engine* engine, const char* text, double* score_out, char** band_out) {
    if (!engine) return null_argument("engine");
    if (!text) return null_argument("text");
    if (!score_out) return null_argument("score_out");
    return guarded([&] {
        const double score = tutor::flesch_reading_ease(std::string_view(text));
        *score_out = score;
        if (band_out) {
            const auto bands = tutor::BandTable::load(engine->config.assets_dir / "bands.json");
            *band_out = dup_string(bands.interpret(score));
        }
    });
}

tutor_status tutor_cohort_generate(size_t n, double mean, double std_dev, uint64_t seed,
                                   char** jsonl_out) {
    if (!jsonl_out) return null_argument("jsonl_out");
    return guarded([&] {
        tutor::CohortSpec spec;
        spec.n = n;
        spec.mean = mean;
        spec.std_dev = std_dev;
        spec.seed = seed;
        *jsonl_out = dup_string(tutor::cohort_to_jsonl(tutor::generate_cohort(spec)));
    });
}

tutor_status tutor_experiment_run(tutor_engine* engine, const char* plan_path,
                                  const char* cohort_path, const char* out_dir,
                                  char** report_json_out) {
    if (!engine) return null_argument("engine");
    if (!plan_path) return null_argument("plan_path");
    if (!cohort_path) return null_argument("cohort_path");
    return guarded([&] {
        const tutor::Engine& e = engine->get();
        const auto plan = tutor::load_plan(plan_path);
        const auto cohort = tutor::cohort_from_jsonl_file(cohort_path);
        const auto knowledge = e.initial_knowledge();
        const auto report = tutor::run_experiment(plan, tutor::portfolios_of(cohort), e, knowledge);
        if (out_dir) tutor::export_report(report, out_dir);
        if (report_json_out) *report_json_out = dup_string(tutor::report_to_json(report).dump(2));
    });
}

tutor_status tutor_service_create(tutor_engine* engine, tutor_service** out) {
    if (!engine) return null_argument("engine");
    if (!out) return null_argument("out");
    return guarded([&] {
        auto handle = std::make_unique<tutor_service>();
        handle->service = std::make_unique<tutor::Service>(engine->get());
        *out = handle.release();
    });
}

void tutor_service_destroy(tutor_service* service) { delete service; }

tutor_status tutor_service_handle(tutor_service* service, const char* method, const char* path,
                                  const char* body, int* status_out, char** body_out) {
    if (!service) return null_argument("service");
    if (!method || !path) return null_argument("method/path");
    if (!status_out || !body_out) return null_argument("status_out/body_out");
    return guarded([&] {
        const auto res = service->service->handle({method, path, body ? body : ""});
        *status_out = res.status;
        *body_out = dup_string(res.body);
    });
}

tutor_status tutor_service_serve(tutor_service* service, const char* host, int port) {
    if (!service) return null_argument("service");
    return guarded([&] { service->service->serve(host ? host : "0.0.0.0", port); });
}

void tutor_service_stop(tutor_service* service) {
    if (service) service->service->stop();
}

}  // extern "C"
