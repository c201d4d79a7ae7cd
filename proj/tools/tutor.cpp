// tutor: command-line front end over the C interface.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tutor/tutor_c.h"

namespace {

int fail(tutor_status status, const char* what) {
    std::cerr << "tutor: " << what << " failed (" << status << "): " << tutor_last_error() << "\n";
    return 1;
}

struct EngineHandle {
    tutor_engine* ptr = nullptr;
    ~EngineHandle() { tutor_engine_close(ptr); }
};

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { tutor_string_free(ptr); }
};

tutor_service* g_service = nullptr;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personalized tutoring feedback engine"};
    app.require_subcommand(1);

    std::string config;
    app.add_option("--config", config, "Engine configuration file (JSON)");

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    int port = 8080;
    std::string host = "0.0.0.0";
    serve->add_option("--port", port, "Listen port");
    serve->add_option("--host", host, "Listen address");
    serve->add_option("--config", config, "Engine configuration file (JSON)");

    auto* cohort = app.add_subcommand("cohort", "Synthetic cohort tools");
    cohort->require_subcommand(1);
    auto* generate = cohort->add_subcommand("generate", "Generate a seeded normal cohort");
    std::size_t n = 30;
    double mean = 72.0;
    double std_dev = 8.0;
    std::uint64_t seed = 42;
    std::string cohort_out;
    generate->add_option("--n", n, "Number of students");
    generate->add_option("--mean", mean, "Mark mean");
    generate->add_option("--std", std_dev, "Mark standard deviation");
    generate->add_option("--seed", seed, "Random seed");
    generate->add_option("--out", cohort_out, "Output file (stdout when omitted)");

    auto* experiment = app.add_subcommand("experiment", "Tier-comparison experiment");
    experiment->require_subcommand(1);
    auto* run = experiment->add_subcommand("run", "Run tasks x conditions and export the report");
    std::string plan, cohort_file, backend = "scripted", out_dir;
    run->add_option("--plan", plan, "Experiment plan file")->required();
    run->add_option("--cohort", cohort_file, "Cohort file from `cohort generate`")->required();
    run->add_option("--backend", backend, "scripted or remote")
        ->check(CLI::IsMember({"scripted", "remote"}));
    run->add_option("--out", out_dir, "Report directory")->required();
    run->add_option("--config", config, "Engine configuration file (JSON)");

    auto* metrics = app.add_subcommand("metrics", "Feedback metrics");
    metrics->require_subcommand(1);
    auto* fkrs = metrics->add_subcommand("fkrs", "Flesch reading ease of a text file");
    std::string text_file;
    fkrs->add_option("--file", text_file, "Text file")->required()->check(CLI::ExistingFile);
    fkrs->add_option("--config", config, "Engine configuration file (JSON)");

    CLI11_PARSE(app, argc, argv);
    const char* config_path = config.empty() ? nullptr : config.c_str();

    if (*generate) {
        OwnedString jsonl;
        if (auto s = tutor_cohort_generate(n, mean, std_dev, seed, &jsonl.ptr)) {
            return fail(s, "cohort generate");
        }
        if (cohort_out.empty()) {
            std::cout << jsonl.ptr;
        } else {
            std::ofstream out(cohort_out, std::ios::binary | std::ios::trunc);
            out << jsonl.ptr;
            if (!out) {
                std::cerr << "tutor: cannot write " << cohort_out << "\n";
                return 1;
            }
        }
        return 0;
    }

    EngineHandle engine;
    const char* override_backend = *run ? backend.c_str() : nullptr;
    if (auto s = tutor_engine_open(config_path, override_backend, &engine.ptr)) {
        return fail(s, "engine open");
    }

    if (*run) {
        OwnedString report;
        if (auto s = tutor_experiment_run(engine.ptr, plan.c_str(), cohort_file.c_str(),
                                          out_dir.c_str(), &report.ptr)) {
            return fail(s, "experiment run");
        }
        std::cout << report.ptr << "\n";
        return 0;
    }

    if (*fkrs) {
        std::ifstream in(text_file, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        double score = 0.0;
        OwnedString band;
        if (auto s = tutor_fkrs(engine.ptr, buf.str().c_str(), &score, &band.ptr)) {
            return fail(s, "metrics fkrs");
        }
        std::printf("%.3f %s\n", score, band.ptr);
        return 0;
    }

    if (*serve) {
        if (auto s = tutor_service_create(engine.ptr, &g_service)) return fail(s, "service create");
        std::signal(SIGINT, [](int) { tutor_service_stop(g_service); });
        std::signal(SIGTERM, [](int) { tutor_service_stop(g_service); });
        std::cerr << "tutor: serving on " << host << ":" << port << "\n";
        const auto s = tutor_service_serve(g_service, host.c_str(), port);
        tutor_service_destroy(g_service);
        if (s) return fail(s, "serve");
        return 0;
    }
    return 0;
}
