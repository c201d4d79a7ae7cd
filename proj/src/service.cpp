#include "tutor/service.hpp"

#include <chrono>
#include <fstream>
#include <numeric>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "httplib.h"
#include "tutor/cohort.hpp"
#include "tutor/error.hpp"
#include "tutor/experiment.hpp"

namespace tutor {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

ApiResponse json_response(int status, const Json& body) { return {status, body.dump()}; }

ApiResponse error_response(int status, std::string_view code, const std::string& message,
                           const std::string& detail = {}) {
    return json_response(status, {{"code", code}, {"message", message}, {"detail", detail}});
}

int status_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::InvalidMark:
        case ErrorCode::InvalidMapping:
        case ErrorCode::InvalidSnippet:
        case ErrorCode::InvalidArgument:
        case ErrorCode::ParseError:
        case ErrorCode::PromptTooLarge:
            return 422;
        case ErrorCode::DuplicateAssessment:
        case ErrorCode::DuplicateSnippet:
        case ErrorCode::InsufficientData:
        case ErrorCode::MissingTier:
        case ErrorCode::Conflict:
            return 409;
        case ErrorCode::NotFound:
            return 404;
        case ErrorCode::Timeout:
            return 504;
        case ErrorCode::BatchFailed:
            return e.detail() == error_code_name(ErrorCode::Timeout) ? 504 : 502;
        case ErrorCode::BackendError:
        case ErrorCode::EmptyCompletion:
            return 502;
        default:
            return 500;
    }
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= path.size()) {
        auto slash = path.find('/', start);
        if (slash == std::string::npos) slash = path.size();
        if (slash > start) parts.push_back(path.substr(start, slash - start));
        start = slash + 1;
    }
    return parts;
}

Json parse_body(const std::string& body) {
    Json j = parse_json(body.empty() ? "{}" : body);
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
    return j;
}

}  // namespace

EventLog::EventLog(fs::path file) : file_(std::move(file)) {}

Json EventLog::append(std::string_view kind, Json payload) {
    std::scoped_lock lock(mutex_);
    Json event = {{"sequence", last_ + 1},
                  {"kind", kind},
                  {"at", utc_now()},
                  {"payload", std::move(payload)}};
    std::ofstream out(file_, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot append to {}", file_.string()));
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, fmt::format("failed writing {}", file_.string()));
    ++last_;
    return event;
}

std::vector<Json> EventLog::read_after(std::uint64_t after) const {
    std::scoped_lock lock(mutex_);
    if (!fs::exists(file_)) return {};
    std::vector<Json> out;
    for (auto& event : read_json_lines(file_.string())) {
        if (event.at("sequence").get<std::uint64_t>() > after) out.push_back(std::move(event));
    }
    return out;
}

std::uint64_t EventLog::last_sequence() const {
    std::scoped_lock lock(mutex_);
    return last_;
}

void EventLog::set_last_sequence(std::uint64_t seq) {
    std::scoped_lock lock(mutex_);
    last_ = seq;
}

Service::Service(Engine engine)
    : engine_(std::move(engine)),
      log_(engine_.config.data_dir / "events.jsonl"),
      snapshot_file_(engine_.config.data_dir / "snapshot.json"),
      knowledge_(engine_.initial_knowledge()) {
    std::error_code ec;
    fs::create_directories(engine_.config.data_dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, fmt::format("cannot create data dir {}: {}",
                                                    engine_.config.data_dir.string(), ec.message()));
    }
    recover();
}

Service::~Service() {
    stop();
    wait_for_experiments();
}

void Service::commit(const Json& event) {
    const std::string kind = event.at("kind").get<std::string>();
    const Json& payload = event.at("payload");
    if (kind == "student-created") {
        StudentPortfolio p(payload.at("student_id").get<std::string>());
        for (const auto& m : payload.value("ilo_mappings", Json::array())) {
            p = p.with_mapping(mapping_from_json(m));
        }
        const std::string id = p.student_id();
        students_[id] = StudentState{std::move(p), {}};
    } else if (kind == "assessment-recorded") {
        auto& s = students_.at(payload.at("student_id").get<std::string>());
        s.portfolio = s.portfolio.record_assessment(record_from_json(payload.at("record")));
    } else if (kind == "snippet-added") {
        knowledge_.add_snippet(snippet_from_json(payload));
        api_snippet_ids_.push_back(payload.at("snippet_id").get<std::string>());
    } else if (kind == "task-registered") {
        TaskSpec task = task_from_json(payload);
        const std::string id = task.task_id;
        tasks_[id] = std::move(task);
    } else if (kind == "feedback-issued") {
        Json envelope = payload;
        envelope["sequence"] = event.at("sequence");
        envelope["issued_at"] = event.at("at");
        students_.at(payload.at("student_id").get<std::string>())
            .feedback_history.push_back(std::move(envelope));
    } else {
        throw Error(ErrorCode::ParseError, fmt::format("unknown event kind '{}'", kind));
    }
}

Json Service::append_and_commit(std::string_view kind, Json payload) {
    Json event = log_.append(kind, std::move(payload));
    commit(event);
    ++events_since_snapshot_;
    maybe_snapshot();
    return event;
}

void Service::maybe_snapshot() {
    if (engine_.config.snapshot_every > 0 && events_since_snapshot_ >= engine_.config.snapshot_every) {
        write_snapshot();
    }
}

void Service::recover() {
    std::unique_lock lock(state_mutex_);
    std::uint64_t after = 0;
    if (fs::exists(snapshot_file_)) {
        const Json snap = read_json_file(snapshot_file_.string());
        after = snap.at("sequence").get<std::uint64_t>();
        for (const auto& s : snap.at("students")) {
            StudentState state{portfolio_from_json(s.at("portfolio")), {}};
            for (const auto& f : s.at("feedback_history")) state.feedback_history.push_back(f);
            const std::string id = state.portfolio.student_id();
            students_[id] = std::move(state);
        }
        for (const auto& t : snap.at("tasks")) {
            TaskSpec task = task_from_json(t);
            const std::string id = task.task_id;
            tasks_[id] = std::move(task);
        }
        for (const auto& sn : snap.at("snippets")) {
            knowledge_.add_snippet(snippet_from_json(sn));
            api_snippet_ids_.push_back(sn.at("snippet_id").get<std::string>());
        }
    }
    std::uint64_t last = after;
    for (const auto& event : log_.read_after(after)) {
        const auto seq = event.at("sequence").get<std::uint64_t>();
        if (seq <= last) {
            throw Error(ErrorCode::ParseError, fmt::format("event log sequence {} is out of order", seq));
        }
        commit(event);
        last = seq;
    }
    log_.set_last_sequence(last);
}

void Service::write_snapshot() {
    // callers either hold state_mutex_ exclusively or are the only user
    Json students = Json::array();
    for (const auto& [id, s] : students_) {
        students.push_back({{"portfolio", portfolio_to_json(s.portfolio)},
                            {"feedback_history", s.feedback_history}});
    }
    Json tasks = Json::array();
    for (const auto& [id, t] : tasks_) tasks.push_back(task_to_json(t));
    Json snippets = Json::array();
    for (const auto& s : knowledge_.snippets()) {
        if (std::find(api_snippet_ids_.begin(), api_snippet_ids_.end(), s.snippet_id) !=
            api_snippet_ids_.end()) {
            snippets.push_back(snippet_to_json(s));
        }
    }
    Json snap = {{"sequence", log_.last_sequence()},
                 {"students", std::move(students)},
                 {"tasks", std::move(tasks)},
                 {"snippets", std::move(snippets)}};
    const fs::path tmp = snapshot_file_.string() + ".tmp";
    write_text_file(tmp.string(), snap.dump() + "\n");
    std::error_code ec;
    fs::rename(tmp, snapshot_file_, ec);
    if (ec) throw Error(ErrorCode::IoError, fmt::format("cannot replace snapshot: {}", ec.message()));
    events_since_snapshot_ = 0;
}

std::mutex& Service::student_lock(const std::string& student_id) {
    std::scoped_lock lock(student_locks_mutex_);
    auto& slot = student_locks_[student_id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

Json Service::portfolio_body(const StudentPortfolio& portfolio) const {
    Json body = portfolio_to_json(portfolio);
    body["record_count"] = portfolio.record_count();
    try {
        const PortfolioSummary summary = summarize_for_prompt(portfolio);
        body["tier"] = tier_slug(summary.tier);
        body["summary"] = summary.text;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientData) throw;
        body["tier"] = nullptr;
        body["summary"] = nullptr;
    }
    return body;
}

ApiResponse Service::handle(const ApiRequest& request) {
    try {
        return route(request);
    } catch (const Error& e) {
        return error_response(status_for(e), error_code_name(e.code()), e.what(), e.detail());
    } catch (const Json::exception& e) {
        return error_response(422, "ParseError", "request body does not match the schema", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "Internal", e.what());
    }
}

ApiResponse Service::route(const ApiRequest& req) {
    const auto parts = split_path(req.path);
    const std::string& m = req.method;
    if (parts.size() < 2 || parts[0] != "api") {
        return error_response(404, "NotFound", fmt::format("no route for {}", req.path));
    }
    auto method_not_allowed = [&] {
        return error_response(405, "MethodNotAllowed", fmt::format("{} {} is not supported", m, req.path));
    };

    const std::string& resource = parts[1];
    if (resource == "students") {
        if (parts.size() == 2) {
            if (m == "POST") return create_student(parse_body(req.body));
            if (m == "GET") return list_students();
            return method_not_allowed();
        }
        if (parts.size() == 4) {
            const std::string& id = parts[2];
            if (parts[3] == "assessments") {
                return m == "PUT" || m == "POST" ? record_assessment(id, parse_body(req.body))
                                                 : method_not_allowed();
            }
            if (parts[3] == "portfolio") return m == "GET" ? get_portfolio(id) : method_not_allowed();
            if (parts[3] == "feedback-history") {
                return m == "GET" ? get_feedback_history(id) : method_not_allowed();
            }
        }
    } else if (resource == "cohort" && parts.size() == 3 && parts[2] == "summary") {
        return m == "GET" ? cohort_summary() : method_not_allowed();
    } else if (resource == "tasks" && parts.size() == 2) {
        if (m == "POST") return create_task(parse_body(req.body));
        if (m == "GET") return list_tasks();
        return method_not_allowed();
    } else if (resource == "knowledge" && parts.size() == 3 && parts[2] == "snippets") {
        return m == "POST" ? add_snippet(parse_body(req.body)) : method_not_allowed();
    } else if (resource == "feedback" && parts.size() == 2) {
        return m == "POST" ? issue_feedback(parse_body(req.body)) : method_not_allowed();
    } else if (resource == "experiments") {
        if (parts.size() == 2) return m == "POST" ? start_experiment(parse_body(req.body)) : method_not_allowed();
        if (parts.size() == 3) return m == "GET" ? get_experiment(parts[2]) : method_not_allowed();
    }
    return error_response(404, "NotFound", fmt::format("no route for {}", req.path));
}

ApiResponse Service::create_student(const Json& body) {
    const std::string id = require_string(body, "student_id");
    if (id.empty()) throw Error(ErrorCode::InvalidArgument, "student_id must be nonempty");
    Json mappings = Json::array();
    StudentPortfolio probe(id);
    for (const auto& m : body.value("ilo_mappings", Json::array())) {
        probe = probe.with_mapping(mapping_from_json(m));
        mappings.push_back(m);
    }
    std::unique_lock lock(state_mutex_);
    if (students_.count(id)) {
        throw Error(ErrorCode::Conflict, fmt::format("student {} already exists", id));
    }
    append_and_commit("student-created", {{"student_id", id}, {"ilo_mappings", mappings}});
    return json_response(201, portfolio_body(students_.at(id).portfolio));
}

ApiResponse Service::record_assessment(const std::string& student_id, const Json& body) {
    AssessmentRecord record = record_from_json(body);
    if (record.recorded_at.empty()) record.recorded_at = utc_now();
    std::scoped_lock per_student(student_lock(student_id));
    std::unique_lock lock(state_mutex_);
    auto it = students_.find(student_id);
    if (it == students_.end()) {
        throw Error(ErrorCode::NotFound, fmt::format("unknown student {}", student_id));
    }
    (void)it->second.portfolio.record_assessment(record);  // validates before logging
    append_and_commit("assessment-recorded",
                      {{"student_id", student_id}, {"record", record_to_json(record)}});
    return json_response(200, portfolio_body(students_.at(student_id).portfolio));
}

ApiResponse Service::get_portfolio(const std::string& student_id) {
    std::shared_lock lock(state_mutex_);
    auto it = students_.find(student_id);
    if (it == students_.end()) {
        throw Error(ErrorCode::NotFound, fmt::format("unknown student {}", student_id));
    }
    return json_response(200, portfolio_body(it->second.portfolio));
}

ApiResponse Service::get_feedback_history(const std::string& student_id) {
    std::shared_lock lock(state_mutex_);
    auto it = students_.find(student_id);
    if (it == students_.end()) {
        throw Error(ErrorCode::NotFound, fmt::format("unknown student {}", student_id));
    }
    return json_response(200, {{"student_id", student_id},
                               {"feedback", it->second.feedback_history}});
}

ApiResponse Service::list_students() {
    std::shared_lock lock(state_mutex_);
    Json out = Json::array();
    for (const auto& [id, s] : students_) {
        Json row = {{"student_id", id}, {"record_count", s.portfolio.record_count()}};
        try {
            row["tier"] = tier_slug(derive_tier(s.portfolio));
        } catch (const Error&) {
            row["tier"] = nullptr;
        }
        out.push_back(std::move(row));
    }
    return json_response(200, {{"students", std::move(out)}});
}

ApiResponse Service::cohort_summary() {
    std::shared_lock lock(state_mutex_);
    std::map<std::string, std::size_t> histogram{
        {"below-average", 0}, {"average", 0}, {"above-average", 0}, {"uncategorized", 0}};
    std::map<std::string, std::vector<double>> means;
    Json rows = Json::array();
    for (const auto& [id, s] : students_) {
        const auto marks = s.portfolio.categorizable_marks();
        std::string tier = "uncategorized";
        Json mean = nullptr;
        if (!marks.empty()) {
            tier = tier_slug(derive_tier(s.portfolio));
            const double m = std::accumulate(marks.begin(), marks.end(), 0.0) / static_cast<double>(marks.size());
            means[tier].push_back(m);
            mean = m;
        }
        ++histogram[tier];
        rows.push_back({{"student_id", id}, {"tier", tier}, {"mean_mark", mean}});
    }
    Json tier_means = Json::object();
    for (const auto& [tier, ms] : means) {
        tier_means[tier] = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
    }
    return json_response(200, {{"student_count", students_.size()},
                               {"histogram", histogram},
                               {"tier_mean_marks", tier_means},
                               {"students", rows}});
}

ApiResponse Service::create_task(const Json& body) {
    TaskSpec task = task_from_json(body);
    std::unique_lock lock(state_mutex_);
    if (tasks_.count(task.task_id)) {
        throw Error(ErrorCode::Conflict, fmt::format("task {} already exists", task.task_id));
    }
    append_and_commit("task-registered", task_to_json(task));
    return json_response(201, task_to_json(task));
}

ApiResponse Service::list_tasks() {
    std::shared_lock lock(state_mutex_);
    Json out = Json::array();
    for (const auto& [id, t] : tasks_) out.push_back(task_to_json(t));
    return json_response(200, {{"tasks", std::move(out)}});
}

ApiResponse Service::add_snippet(const Json& body) {
    KnowledgeSnippet snippet = normalize_snippet(snippet_from_json(body));
    std::unique_lock lock(state_mutex_);
    if (knowledge_.contains(snippet.snippet_id)) {
        throw Error(ErrorCode::DuplicateSnippet,
                    fmt::format("snippet {} already exists", snippet.snippet_id));
    }
    append_and_commit("snippet-added", snippet_to_json(snippet));
    return json_response(201, snippet_to_json(snippet));
}

ApiResponse Service::issue_feedback(const Json& body) {
    const std::string student_id = require_string(body, "student_id");
    const std::string task_id = require_string(body, "task_id");
    const std::string response_text = require_string(body, "response_text");
    if (response_text.size() > kMaxResponseBytes) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("response_text is {} bytes (max {})", response_text.size(), kMaxResponseBytes));
    }

    std::scoped_lock per_student(student_lock(student_id));
    StudentPortfolio portfolio;
    TaskSpec task;
    {
        std::shared_lock lock(state_mutex_);
        auto s = students_.find(student_id);
        if (s == students_.end()) throw Error(ErrorCode::NotFound, fmt::format("unknown student {}", student_id));
        auto t = tasks_.find(task_id);
        if (t == tasks_.end()) throw Error(ErrorCode::NotFound, fmt::format("unknown task {}", task_id));
        portfolio = s->second.portfolio;
        task = t->second;
    }

    const FeedbackRun run = run_tailored_feedback(engine_, knowledge_, portfolio, task, response_text);
    const MetricReading& r = run.reading;
    Json metrics = {{"fkrs", r.fkrs ? Json(*r.fkrs) : Json(nullptr)},
                    {"readability_band", r.fkrs ? Json(engine_.bands->interpret(*r.fkrs)) : Json(nullptr)},
                    {"response_time_ms", r.response_time_ms},
                    {"specificity_sentences", r.specificity_sentences},
                    {"warnings", r.warnings}};
    Json envelope = {{"student_id", student_id},
                     {"task_id", task_id},
                     {"feedback_text", run.round.vote.chosen},
                     {"tier_used", condition_slug(run.condition)},
                     {"metrics", std::move(metrics)},
                     {"vote", {{"cluster_size", run.round.vote.cluster_size}, {"n", run.round.vote.n}}},
                     {"retrieved_snippet_ids", run.bundle.snippet_ids}};

    std::unique_lock lock(state_mutex_);
    const Json event = append_and_commit("feedback-issued", envelope);
    return json_response(200, students_.at(student_id).feedback_history.back());
}

ApiResponse Service::start_experiment(const Json& body) {
    ExperimentPlan plan = body.contains("plan") ? plan_from_json(body.at("plan"))
                                                : load_plan(engine_.config.assets_dir / "plan.json");
    std::vector<StudentPortfolio> cohort;
    if (body.contains("cohort_spec")) {
        const Json& s = body.at("cohort_spec");
        CohortSpec spec;
        spec.n = s.value("n", spec.n);
        spec.mean = s.value("mean", spec.mean);
        spec.std_dev = s.value("std_dev", spec.std_dev);
        spec.seed = s.value("seed", spec.seed);
        cohort = portfolios_of(generate_cohort(spec));
    } else {
        std::shared_lock lock(state_mutex_);
        for (const auto& [id, s] : students_) cohort.push_back(s.portfolio);
    }
    ExperimentOptions options;
    options.arm_parallelism = body.value("arm_parallelism", std::size_t{1});

    std::scoped_lock lock(experiments_mutex_);
    if (experiment_running_) {
        throw Error(ErrorCode::Conflict, "an experiment is already running");
    }
    const std::string run_id = fmt::format("run-{}", next_run_++);
    experiments_[run_id] = ExperimentJob{};
    experiment_running_ = true;
    KnowledgeBase knowledge = knowledge_;
    if (experiment_thread_.joinable()) experiment_thread_.join();
    experiment_thread_ = std::jthread([this, run_id, plan = std::move(plan), cohort = std::move(cohort),
                                       knowledge = std::move(knowledge), options] {
        ExperimentJob job;
        try {
            job.report = report_to_json(run_experiment(plan, cohort, engine_, knowledge, options));
            job.status = "completed";
        } catch (const std::exception& e) {
            job.status = "failed";
            job.error = e.what();
        }
        std::scoped_lock done(experiments_mutex_);
        experiments_[run_id] = std::move(job);
        experiment_running_ = false;
    });
    return json_response(202, {{"run_id", run_id}, {"status", "running"}});
}

ApiResponse Service::get_experiment(const std::string& run_id) {
    std::scoped_lock lock(experiments_mutex_);
    auto it = experiments_.find(run_id);
    if (it == experiments_.end()) {
        throw Error(ErrorCode::NotFound, fmt::format("unknown experiment run {}", run_id));
    }
    Json body = {{"run_id", run_id}, {"status", it->second.status}};
    if (it->second.status == "completed") body["report"] = it->second.report;
    if (it->second.status == "failed") body["error"] = it->second.error;
    return json_response(200, body);
}

void Service::wait_for_experiments() {
    if (experiment_thread_.joinable()) experiment_thread_.join();
}

namespace {

void install_routes(httplib::Server& server, Service& service, const fs::path& static_dir) {
    if (!static_dir.empty() && fs::is_directory(static_dir)) {
        server.set_mount_point("/", static_dir.string());
    }
    auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        const ApiResponse out = service.handle({req.method, req.path, req.body});
        res.status = out.status;
        res.set_content(out.body, "application/json");
    };
    const std::string pattern = "/api/.*";
    server.Get(pattern, forward);
    server.Post(pattern, forward);
    server.Put(pattern, forward);
    server.Delete(pattern, forward);
}

}  // namespace

void Service::serve(const std::string& host, int port) {
    server_ = std::make_unique<httplib::Server>();
    install_routes(*server_, *this, engine_.config.static_dir);
    if (!server_->listen(host, port)) {
        throw Error(ErrorCode::IoError, fmt::format("cannot listen on {}:{}", host, port));
    }
}

int Service::start_background(const std::string& host) {
    server_ = std::make_unique<httplib::Server>();
    install_routes(*server_, *this, engine_.config.static_dir);
    const int port = server_->bind_to_any_port(host);
    if (port < 0) throw Error(ErrorCode::IoError, fmt::format("cannot bind {}", host));
    server_thread_ = std::jthread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void Service::stop() {
    if (server_) server_->stop();
    if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace tutor
