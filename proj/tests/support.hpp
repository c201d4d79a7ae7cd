#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "tutor/portfolio.hpp"

namespace testing {

inline std::filesystem::path assets_dir() { return TUTOR_TEST_ASSETS_DIR; }

// removed on destruction
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("tutor-test-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

inline tutor::AssessmentRecord record(std::string subject, std::string id, double mark,
                                      tutor::AssessmentKind kind = tutor::AssessmentKind::Tutorial) {
    return {std::move(subject), std::move(id), tutor::Mark(mark), kind, "2025-03-07T00:00:00Z"};
}

inline tutor::AssessmentRecord prior(std::string subject, double mark) {
    return record(std::move(subject), "final", mark, tutor::AssessmentKind::PrerequisiteFinal);
}

}  // namespace testing

#include "tutor/engine.hpp"

namespace testing {

inline tutor::Engine make_engine(const std::filesystem::path& data_dir) {
    tutor::EngineConfig cfg;
    cfg.assets_dir = assets_dir();
    cfg.data_dir = data_dir;
    cfg.knowledge_files = {assets_dir() / "knowledge.jsonl"};
    return tutor::Engine::create(cfg);
}

}  // namespace testing
