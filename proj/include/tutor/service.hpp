#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "tutor/engine.hpp"
#include "tutor/json_codec.hpp"

namespace httplib {
class Server;
}

namespace tutor {

inline constexpr std::size_t kMaxResponseBytes = 64 * 1024;

struct ApiRequest {
    std::string method;
    std::string path;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string body;  // JSON
};

/// Append-only line-delimited JSON event log. Sequence numbers are strictly
/// increasing; one writer at a time.
class EventLog {
public:
    explicit EventLog(std::filesystem::path file);

    /// Stamps sequence and time, writes and flushes one line, returns the
    /// stored event.
    Json append(std::string_view kind, Json payload);

    /// Events with sequence > after, in file order.
    std::vector<Json> read_after(std::uint64_t after) const;

    std::uint64_t last_sequence() const;
    void set_last_sequence(std::uint64_t seq);
    const std::filesystem::path& file() const noexcept { return file_; }

private:
    std::filesystem::path file_;
    mutable std::mutex mutex_;
    std::uint64_t last_ = 0;
};

/// The tutoring service: HTTP routes over the engine, with state rebuilt from
/// `<data_dir>/snapshot.json` plus `<data_dir>/events.jsonl` on construction.
class Service {
public:
    explicit Service(Engine engine);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Routes one request. Never throws; failures become {code, message,
    /// detail} bodies with the matching status.
    ApiResponse handle(const ApiRequest& request);

    /// Blocks serving HTTP until stop().
    void serve(const std::string& host, int port);
    /// Binds an ephemeral port and serves on a background thread.
    int start_background(const std::string& host = "127.0.0.1");
    void stop();

    /// Writes the snapshot now (also done every `snapshot_every` events).
    void write_snapshot();
    std::uint64_t last_sequence() const { return log_.last_sequence(); }

    /// Blocks until no experiment job is running.
    void wait_for_experiments();

private:
    struct StudentState {
        StudentPortfolio portfolio;
        std::vector<Json> feedback_history;
    };
    struct ExperimentJob {
        std::string status = "running";
        Json report;
        std::string error;
    };

    ApiResponse route(const ApiRequest& request);

    ApiResponse create_student(const Json& body);
    ApiResponse record_assessment(const std::string& student_id, const Json& body);
    ApiResponse get_portfolio(const std::string& student_id);
    ApiResponse get_feedback_history(const std::string& student_id);
    ApiResponse list_students();
    ApiResponse cohort_summary();
    ApiResponse create_task(const Json& body);
    ApiResponse list_tasks();
    ApiResponse add_snippet(const Json& body);
    ApiResponse issue_feedback(const Json& body);
    ApiResponse start_experiment(const Json& body);
    ApiResponse get_experiment(const std::string& run_id);

    // state transitions shared by live requests and replay; callers hold
    // state_mutex_ exclusively and have already validated
    void commit(const Json& event);
    Json append_and_commit(std::string_view kind, Json payload);
    void recover();
    void maybe_snapshot();
    std::mutex& student_lock(const std::string& student_id);
    Json portfolio_body(const StudentPortfolio& portfolio) const;

    Engine engine_;
    EventLog log_;
    std::filesystem::path snapshot_file_;

    mutable std::shared_mutex state_mutex_;
    std::map<std::string, StudentState> students_;
    std::map<std::string, TaskSpec> tasks_;
    KnowledgeBase knowledge_;
    std::vector<std::string> api_snippet_ids_;
    std::uint64_t events_since_snapshot_ = 0;

    std::mutex student_locks_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> student_locks_;

    std::mutex experiments_mutex_;
    std::map<std::string, ExperimentJob> experiments_;
    std::uint64_t next_run_ = 1;
    bool experiment_running_ = false;
    std::jthread experiment_thread_;

    std::unique_ptr<httplib::Server> server_;
    std::jthread server_thread_;
};

}  // namespace tutor
