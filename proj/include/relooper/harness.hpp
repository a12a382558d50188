#pragma once

// Suite runner: loads a scenario suite from a JSON config, wires backend +
// prompts + agent, enforces the wall-clock budget at task starts, streams a
// JSONL trajectory log, and renders Table-style reports.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "relooper/agent.hpp"
#include "relooper/llm.hpp"
#include "relooper/prompt.hpp"
#include "relooper/remote.hpp"
#include "relooper/textworld.hpp"

namespace relooper::harness {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class BackendKind { kScripted, kPersona, kOracle, kRemote };

struct BackendSpec {
    BackendKind kind = BackendKind::kScripted;
    std::string script_path;  // scripted/persona: shared fallback script
    std::string persona;
    int oracle_think_lines = 0;
    remote::RemoteConfig remote;
};

struct ScenarioEntry {
    std::string id;
    std::string world_path;
    std::string script_path;  // optional per-task script
};

struct SuiteConfig {
    std::vector<ScenarioEntry> scenarios;
    std::string exemplar_dir;
    BackendSpec backend;
    agent::Limits limits;
    std::chrono::milliseconds budget{std::chrono::hours(1)};
    std::string output_dir;  // empty = keep everything in memory
    std::string seed_note;
    std::string catalog_path;  // optional observation wording override
    int parallel = 1;
};

// "500ms", "30s", "5m", "12h"; bare digits are seconds.
inline std::chrono::milliseconds parse_duration(std::string_view text) {
    std::size_t digits = 0;
    while (digits < text.size() && text[digits] >= '0' && text[digits] <= '9') ++digits;
    if (digits == 0) throw ConfigError("bad duration: " + std::string(text));
    const long long value = std::stoll(std::string(text.substr(0, digits)));
    const std::string_view unit = text.substr(digits);
    using std::chrono::milliseconds;
    if (unit == "ms") return milliseconds(value);
    if (unit.empty() || unit == "s") return std::chrono::seconds(value);
    if (unit == "m") return std::chrono::minutes(value);
    if (unit == "h") return std::chrono::hours(value);
    throw ConfigError("bad duration unit: " + std::string(text));
}

// CLI form: scripted:<script>, persona:<name>, oracle[:<think_lines>], remote.
inline BackendSpec parse_backend_spec(const std::string& text) {
    BackendSpec spec;
    if (text == "remote") {
        spec.kind = BackendKind::kRemote;
        spec.remote = remote::remote_config_from_env();
        return spec;
    }
    if (text == "oracle" || text.starts_with("oracle:")) {
        spec.kind = BackendKind::kOracle;
        if (text.size() > 7) {
            int n = 0;
            if (!detail::parse_positive_int(text.substr(7), n))
                throw ConfigError("bad oracle think count: " + text);
            spec.oracle_think_lines = n;
        }
        return spec;
    }
    if (text.starts_with("scripted:")) {
        spec.kind = BackendKind::kScripted;
        spec.script_path = text.substr(9);
        if (spec.script_path.empty()) throw ConfigError("scripted backend needs a script path");
        return spec;
    }
    if (text.starts_with("persona:")) {
        spec.kind = BackendKind::kPersona;
        spec.persona = text.substr(8);
        if (!llm::parse_persona(spec.persona)) throw ConfigError("unknown persona: " + spec.persona);
        return spec;
    }
    throw ConfigError("bad backend spec: " + text);
}

namespace detail_harness {

inline std::string resolve(const std::filesystem::path& base, const std::string& path) {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (base / p).lexically_normal().string();
}

inline BackendSpec parse_backend_json(const nlohmann::json& node) {
    if (node.is_string()) return parse_backend_spec(node.get<std::string>());
    if (!node.is_object()) throw ConfigError("backend: expected an object or spec string");
    const std::string kind = node.value("kind", "");
    BackendSpec spec;
    if (kind == "scripted") {
        spec.kind = BackendKind::kScripted;
        spec.script_path = node.value("script", "");
    } else if (kind == "persona") {
        spec.kind = BackendKind::kPersona;
        spec.persona = node.value("persona", "");
        if (!llm::parse_persona(spec.persona)) throw ConfigError("unknown persona: " + spec.persona);
        spec.script_path = node.value("script", "");
    } else if (kind == "oracle") {
        spec.kind = BackendKind::kOracle;
        spec.oracle_think_lines = node.value("think_lines", 0);
        if (spec.oracle_think_lines < 0) throw ConfigError("think_lines must be >= 0");
    } else if (kind == "remote") {
        spec.kind = BackendKind::kRemote;
        spec.remote.url = node.value("url", "");
        spec.remote.model = node.value("model", "");
        spec.remote.token = node.value("token", "");
        spec.remote.max_attempts = node.value("max_attempts", spec.remote.max_attempts);
        spec.remote.initial_backoff =
            std::chrono::milliseconds(node.value("initial_backoff_ms", 100));
        spec.remote.request_timeout = std::chrono::seconds(node.value("request_timeout_s", 60));
        spec.remote.max_in_flight = node.value("max_in_flight", spec.remote.max_in_flight);
        spec.remote = remote::remote_config_from_env(spec.remote);
    } else {
        throw ConfigError("backend.kind must be scripted, persona, oracle, or remote");
    }
    return spec;
}

}  // namespace detail_harness

inline SuiteConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    if (!doc.contains("scenarios") || !doc.at("scenarios").is_array() || doc.at("scenarios").empty())
        throw ConfigError("config: needs a non-empty \"scenarios\" array");

    SuiteConfig config;
    for (const auto& node : doc.at("scenarios")) {
        ScenarioEntry entry;
        if (node.is_string()) {
            entry.world_path = detail_harness::resolve(base_dir, node.get<std::string>());
            entry.id = std::filesystem::path(entry.world_path).stem().string();
        } else if (node.is_object()) {
            entry.world_path = detail_harness::resolve(base_dir, node.value("world", ""));
            entry.id = node.value("id", std::filesystem::path(entry.world_path).stem().string());
            entry.script_path = detail_harness::resolve(base_dir, node.value("script", ""));
        } else {
            throw ConfigError("scenario entries must be paths or objects");
        }
        if (entry.world_path.empty()) throw ConfigError("scenario is missing a world path");
        config.scenarios.push_back(std::move(entry));
    }

    config.exemplar_dir = detail_harness::resolve(base_dir, doc.value("exemplar_dir", ""));
    if (config.exemplar_dir.empty()) throw ConfigError("config: needs \"exemplar_dir\"");
    if (doc.contains("backend")) config.backend = detail_harness::parse_backend_json(doc.at("backend"));
    if (doc.contains("limits")) {
        config.limits.max_steps = doc.at("limits").value("max_steps", config.limits.max_steps);
        config.limits.max_trials = doc.at("limits").value("max_trials", config.limits.max_trials);
        if (config.limits.max_steps < 1 || config.limits.max_trials < 1)
            throw ConfigError("limits must be >= 1");
    }
    if (doc.contains("budget")) config.budget = parse_duration(doc.at("budget").get<std::string>());
    if (config.budget <= std::chrono::milliseconds::zero())
        throw ConfigError("budget must be positive");
    config.output_dir = detail_harness::resolve(base_dir, doc.value("output_dir", ""));
    config.seed_note = doc.value("seed_note", "");
    config.catalog_path = detail_harness::resolve(base_dir, doc.value("catalog", ""));
    config.parallel = doc.value("parallel", 1);
    if (config.parallel < 1) throw ConfigError("parallel must be >= 1");
    return config;
}

inline SuiteConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(doc, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// Reports

struct TaskSummary {
    std::string task_id;
    bool success = false;
    std::optional<int> total_steps;  // nullopt renders as "fail"
    int trials = 0;
    std::optional<std::string> error;  // backend failure; task still counts as attempted
};

struct SuiteReport {
    std::vector<TaskSummary> per_task;
    int success_rate = 0;  // rounded percent
    int attempted = 0;
    int succeeded = 0;
    bool budget_exhausted = false;
    std::string seed_note;
};

inline void finalize_report(SuiteReport& report) {
    report.attempted = static_cast<int>(report.per_task.size());
    report.succeeded = 0;
    for (const auto& task : report.per_task) report.succeeded += task.success ? 1 : 0;
    report.success_rate =
        report.attempted == 0
            ? 0
            : static_cast<int>(std::lround(100.0 * report.succeeded / report.attempted));
}

inline nlohmann::json report_to_json(const SuiteReport& report) {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& task : report.per_task) {
        nlohmann::json node{{"task_id", task.task_id},
                            {"success", task.success},
                            {"trials", task.trials}};
        if (task.total_steps)
            node["total_steps"] = *task.total_steps;
        else
            node["total_steps"] = "fail";
        if (task.error) node["error"] = *task.error;
        tasks.push_back(std::move(node));
    }
    return nlohmann::json{{"success_rate", report.success_rate},
                          {"attempted", report.attempted},
                          {"succeeded", report.succeeded},
                          {"budget_exhausted", report.budget_exhausted},
                          {"seed_note", report.seed_note},
                          {"per_task", std::move(tasks)}};
}

inline SuiteReport report_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("per_task"))
        throw ConfigError("report: expected an object with per_task");
    SuiteReport report;
    report.success_rate = doc.value("success_rate", 0);
    report.attempted = doc.value("attempted", 0);
    report.succeeded = doc.value("succeeded", 0);
    report.budget_exhausted = doc.value("budget_exhausted", false);
    report.seed_note = doc.value("seed_note", "");
    for (const auto& node : doc.at("per_task")) {
        TaskSummary task;
        task.task_id = node.value("task_id", "");
        task.success = node.value("success", false);
        task.trials = node.value("trials", 0);
        if (node.contains("total_steps") && node.at("total_steps").is_number())
            task.total_steps = node.at("total_steps").get<int>();
        if (node.contains("error")) task.error = node.at("error").get<std::string>();
        report.per_task.push_back(std::move(task));
    }
    return report;
}

inline SuiteReport load_report(const std::string& run_dir_or_file) {
    namespace fs = std::filesystem;
    fs::path path(run_dir_or_file);
    if (fs::is_directory(path)) path /= "report.json";
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open report: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return report_from_json(doc);
}

enum class ReportFormat { kTable, kCsv };

inline std::string steps_cell(const TaskSummary& task) {
    return task.total_steps ? std::to_string(*task.total_steps) : "fail";
}

inline std::string emit_report(const SuiteReport& report, ReportFormat format) {
    std::ostringstream out;
    if (format == ReportFormat::kCsv) {
        out << "# success_rate=" << report.success_rate << " succeeded=" << report.succeeded
            << " attempted=" << report.attempted
            << " budget_exhausted=" << (report.budget_exhausted ? 1 : 0) << "\n";
        out << "task_id,success,total_steps,trials,error\n";
        for (const auto& task : report.per_task) {
            out << task.task_id << ',' << (task.success ? "true" : "false") << ','
                << steps_cell(task) << ',' << task.trials << ',' << task.error.value_or("")
                << "\n";
        }
        return out.str();
    }

    out << "success rate (%)  successes  attempted  budget exhausted\n";
    char line[128];
    std::snprintf(line, sizeof(line), "%16d  %9d  %9d  %16s\n", report.success_rate,
                  report.succeeded, report.attempted, report.budget_exhausted ? "yes" : "no");
    out << line << "\n";
    out << "task                      steps  trials\n";
    for (const auto& task : report.per_task) {
        std::snprintf(line, sizeof(line), "%-24s  %5s  %6d\n", task.task_id.c_str(),
                      steps_cell(task).c_str(), task.trials);
        out << line;
    }
    bool any_error = false;
    for (const auto& task : report.per_task) any_error |= task.error.has_value();
    if (any_error) {
        out << "\nerrors\n";
        for (const auto& task : report.per_task)
            if (task.error) out << task.task_id << ": " << *task.error << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Trajectory log

class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path) : out_(path, std::ios::trunc) {
        if (!out_) throw ConfigError("cannot open log file: " + path);
    }

    void write(const nlohmann::json& record) {
        std::lock_guard lock(mu_);
        out_ << record.dump() << '\n';
    }

    void flush() {
        std::lock_guard lock(mu_);
        out_.flush();
    }

private:
    std::ofstream out_;
    std::mutex mu_;
};

class JsonlTaskSink : public agent::TrajectorySink {
public:
    JsonlTaskSink(JsonlWriter* writer, std::string task_id)
        : writer_(writer), task_id_(std::move(task_id)) {}

    void on_step(const agent::StepEvent& event) override {
        if (!writer_) return;
        writer_->write({{"record", "step"},
                        {"task_id", task_id_},
                        {"ep", event.ep},
                        {"k", event.k},
                        {"kind", std::string(agent::step_kind_name(event.kind))},
                        {"line", std::string(event.line)},
                        {"observation", std::string(event.observation)},
                        {"reward", event.reward},
                        {"prompt_chars", event.prompt_chars}});
    }

    void on_trial(const agent::TrialRecord& trial) override {
        if (!writer_) return;
        nlohmann::json record{
            {"record", "trial"},
            {"task_id", task_id_},
            {"ep", trial.ep},
            {"outcome",
             trial.outcome == agent::TrialOutcome::kSuccess ? "success" : "step_cap_reached"},
            {"steps", trial.steps.size()}};
        if (trial.adaptation) record["adaptation"] = *trial.adaptation;
        writer_->write(record);
    }

private:
    JsonlWriter* writer_;
    std::string task_id_;
};

// ---------------------------------------------------------------------------
// Suite execution

namespace detail_harness {

struct PreparedScenario {
    ScenarioEntry entry;
    textworld::World world;
    prompt::PromptBundle bundle;
    std::unique_ptr<llm::Backend> backend;  // null for the shared remote backend
};

inline llm::Script scenario_script(const BackendSpec& spec, const ScenarioEntry& entry) {
    const std::string& path = entry.script_path.empty() ? spec.script_path : entry.script_path;
    if (path.empty())
        throw ConfigError(entry.id + ": " +
                          (spec.kind == BackendKind::kPersona ? "persona" : "scripted") +
                          std::string(" backend needs a script (scenario or backend level)"));
    return llm::load_script(path);
}

inline std::unique_ptr<llm::Backend> build_backend(const BackendSpec& spec,
                                                   const ScenarioEntry& entry,
                                                   const textworld::World& world) {
    switch (spec.kind) {
        case BackendKind::kScripted:
            return std::make_unique<llm::ScriptedBackend>(scenario_script(spec, entry));
        case BackendKind::kPersona: {
            const auto persona = llm::parse_persona(spec.persona);
            if (!persona) throw ConfigError("unknown persona: " + spec.persona);
            try {
                return llm::make_persona_backend(*persona, scenario_script(spec, entry));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(entry.id + ": " + e.what());
            }
        }
        case BackendKind::kOracle:
            try {
                return llm::make_oracle_backend(world, spec.oracle_think_lines);
            } catch (const llm::OracleError& e) {
                throw ConfigError(entry.id + ": " + e.what());
            }
        case BackendKind::kRemote:
            return nullptr;
    }
    throw ConfigError("unknown backend kind");
}

}  // namespace detail_harness

inline SuiteReport run_suite(const SuiteConfig& config) {
    namespace fs = std::filesystem;
    if (config.scenarios.empty()) throw ConfigError("no scenarios configured");
    if (config.budget <= std::chrono::milliseconds::zero())
        throw ConfigError("budget must be positive");

    // Preflight: every input is loaded and validated before the first task
    // starts, so configuration errors cannot waste a partial run.
    const textworld::ObservationCatalog catalog = config.catalog_path.empty()
                                                      ? textworld::default_catalog()
                                                      : textworld::load_catalog(config.catalog_path);
    prompt::ExemplarStore store;
    try {
        store = prompt::load_exemplars(config.exemplar_dir);
    } catch (const prompt::ExemplarError& e) {
        throw ConfigError(e.what());
    }

    std::shared_ptr<remote::RemoteBackend> shared_remote;
    if (config.backend.kind == BackendKind::kRemote) {
        try {
            shared_remote = std::make_shared<remote::RemoteBackend>(config.backend.remote);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }

    std::vector<detail_harness::PreparedScenario> prepared;
    prepared.reserve(config.scenarios.size());
    for (const auto& entry : config.scenarios) {
        detail_harness::PreparedScenario scenario;
        scenario.entry = entry;
        try {
            scenario.world = textworld::load_world_file(entry.world_path);
        } catch (const textworld::WorldFileError& e) {
            throw ConfigError(e.what());
        }
        const auto type = scenario.world.task.type;
        scenario.bundle.react_exemplars = store.get(type, prompt::ExemplarKind::kReact);
        scenario.bundle.reflexion_exemplars = store.get(type, prompt::ExemplarKind::kReflexion);
        scenario.bundle.task_text = textworld::initial_observation(scenario.world, catalog);
        try {
            scenario.backend = detail_harness::build_backend(config.backend, entry, scenario.world);
        } catch (const llm::ScriptError& e) {
            throw ConfigError(e.what());
        }
        prepared.push_back(std::move(scenario));
    }

    std::unique_ptr<JsonlWriter> writer;
    if (!config.output_dir.empty()) {
        fs::create_directories(config.output_dir);
        writer = std::make_unique<JsonlWriter>(
            (fs::path(config.output_dir) / "trajectory.jsonl").string());
    }

    // Budget is checked at task start only; an in-flight task always finishes.
    const auto start_time = std::chrono::steady_clock::now();
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> exhausted{false};
    std::vector<std::optional<TaskSummary>> slots(prepared.size());

    auto run_one = [&](std::size_t index) {
        auto& scenario = prepared[index];
        TaskSummary summary;
        summary.task_id = scenario.entry.id;
        JsonlTaskSink sink(writer.get(), scenario.entry.id);
        try {
            llm::Backend& backend =
                scenario.backend ? *scenario.backend : static_cast<llm::Backend&>(*shared_remote);
            const textworld::World& world = scenario.world;
            agent::TaskRecord record =
                agent::run_task(backend, [&world] { return world; }, scenario.bundle,
                                config.limits, scenario.entry.id, &sink, catalog);
            summary.success = record.success;
            summary.total_steps = record.total_steps;
            summary.trials = static_cast<int>(record.trials.size());
            if (writer)
                writer->write({{"record", "task"},
                               {"task_id", summary.task_id},
                               {"success", summary.success},
                               {"total_steps", record.total_steps
                                                   ? nlohmann::json(*record.total_steps)
                                                   : nlohmann::json("fail")},
                               {"trials", summary.trials}});
        } catch (const std::exception& e) {
            summary.error = e.what();
            if (writer)
                writer->write({{"record", "task"},
                               {"task_id", summary.task_id},
                               {"success", false},
                               {"total_steps", "fail"},
                               {"trials", summary.trials},
                               {"error", *summary.error}});
        }
        slots[index] = std::move(summary);
    };

    auto worker = [&] {
        for (;;) {
            if (exhausted.load()) return;
            if (std::chrono::steady_clock::now() - start_time >= config.budget) {
                if (cursor.load() < prepared.size()) exhausted.store(true);
                return;
            }
            const std::size_t index = cursor.fetch_add(1);
            if (index >= prepared.size()) return;
            run_one(index);
        }
    };

    const int workers = std::max(1, std::min<int>(config.parallel,
                                                  static_cast<int>(prepared.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SuiteReport report;
    report.seed_note = config.seed_note;
    report.budget_exhausted = exhausted.load();
    for (auto& slot : slots)
        if (slot) report.per_task.push_back(std::move(*slot));
    finalize_report(report);

    if (!config.output_dir.empty()) {
        if (writer) writer->flush();
        std::ofstream out(fs::path(config.output_dir) / "report.json");
        if (!out) throw ConfigError("cannot write report under " + config.output_dir);
        out << report_to_json(report).dump(2) << "\n";
    }
    return report;
}

}  // namespace relooper::harness
