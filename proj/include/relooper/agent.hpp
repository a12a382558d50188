#pragma once

// The episode loop: think/act steps against the environment, failure
// prompting, reflection extraction, and context compression across trials.
//
// Prompt protocol: the running prompt starts as assemble(bundle), which ends
// with the "> " cue. Each step appends "{line}\n{observation}\n> " so the
// transcript matches the exemplar rendering. A failed trial's prompt drops
// the trailing cue and appends "STATUS: FAIL\nNew plan: "; the continuation
// is the reflection. Compression then discards the whole trajectory and
// restarts from the trial-1 bundle plus accumulated adaptations.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relooper/llm.hpp"
#include "relooper/prompt.hpp"
#include "relooper/strings.hpp"
#include "relooper/textworld.hpp"

namespace relooper::agent {

inline constexpr std::string_view kThinkPrefix = "think:";
inline constexpr std::string_view kOkObservation = "OK.";
inline constexpr std::string_view kStatusFail = "STATUS: FAIL";

inline const llm::DecodingParams kActionParams{0.0, 128, {"\n"}};
inline const llm::DecodingParams kReflectionParams{0.0, 256, {}};

struct Limits {
    int max_steps = 49;
    int max_trials = 10;
};

enum class StepKind { kThought, kAction, kBlank };

inline std::string_view step_kind_name(StepKind kind) {
    switch (kind) {
        case StepKind::kThought: return "thought";
        case StepKind::kAction: return "action";
        case StepKind::kBlank: return "blank";
    }
    return "?";
}

struct StepRecord {
    int k = 0;
    StepKind kind = StepKind::kAction;
    std::string emitted_line;
    std::string observation;
    int reward = 0;
};

enum class TrialOutcome { kSuccess, kStepCapReached };

struct TrialRecord {
    int ep = 1;
    std::vector<StepRecord> steps;
    TrialOutcome outcome = TrialOutcome::kStepCapReached;
    std::optional<std::string> adaptation;  // extracted reflection, failed trials only
};

struct TaskRecord {
    std::string task_id;
    std::vector<TrialRecord> trials;
    bool success = false;
    std::optional<int> total_steps;  // nullopt renders as "fail"
};

inline std::string total_steps_text(const TaskRecord& record) {
    return record.total_steps ? std::to_string(*record.total_steps) : "fail";
}

inline StepKind classify_output(std::string_view line) {
    if (line.empty()) return StepKind::kBlank;
    if (line.starts_with(kThinkPrefix)) return StepKind::kThought;
    return StepKind::kAction;
}

// Per-step event for trajectory logging; prompt_chars is the prompt length at
// query time, so at k=0 it equals |assemble(bundle)|.
struct StepEvent {
    int ep = 1;
    int k = 0;
    StepKind kind = StepKind::kAction;
    std::string_view line;
    std::string_view observation;
    int reward = 0;
    std::size_t prompt_chars = 0;
};

class TrajectorySink {
public:
    virtual ~TrajectorySink() = default;
    virtual void on_step(const StepEvent&) {}
    virtual void on_trial(const TrialRecord&) {}
};

struct TrialResult {
    TrialRecord record;
    std::string prompt;  // running prompt at trial end, still carrying the cue
};

inline TrialResult run_trial(llm::Backend& backend, textworld::World world,
                             const prompt::PromptBundle& bundle, const Limits& limits, int ep = 1,
                             TrajectorySink* sink = nullptr,
                             const textworld::ObservationCatalog& catalog = textworld::default_catalog()) {
    TrialResult result;
    result.record.ep = ep;
    result.prompt = prompt::assemble(bundle);

    for (int k = 0; k < limits.max_steps; ++k) {
        const std::size_t prompt_chars = result.prompt.size();
        const std::string completion = backend.complete(result.prompt, kActionParams);
        const std::string line =
            prompt::extract_next_line(completion, result.prompt, prompt::EchoMode::kBareContinuation);

        StepRecord step;
        step.k = k;
        step.kind = classify_output(line);
        step.emitted_line = line;
        switch (step.kind) {
            case StepKind::kThought:
                step.observation = kOkObservation;
                break;
            case StepKind::kBlank:
                step.observation = catalog.nothing;
                break;
            case StepKind::kAction: {
                const auto action = textworld::parse_action(line);
                if (!action) {
                    step.observation = catalog.nothing;
                } else {
                    const auto obs = textworld::step(world, *action, catalog);
                    step.observation = obs.text;
                    step.reward = obs.reward;
                }
                break;
            }
        }

        if (sink)
            sink->on_step({ep, k, step.kind, step.emitted_line, step.observation, step.reward,
                           prompt_chars});
        result.prompt += step.emitted_line;
        result.prompt += "\n";
        result.prompt += step.observation;
        result.prompt += "\n";
        result.prompt += prompt::kStepCue;
        const int reward = step.reward;
        result.record.steps.push_back(std::move(step));
        if (reward == 1) {
            result.record.outcome = TrialOutcome::kSuccess;
            break;
        }
    }
    return result;
}

inline std::string build_failure_prompt(std::string trajectory_text) {
    if (trajectory_text.ends_with(prompt::kStepCue))
        trajectory_text.erase(trajectory_text.size() - prompt::kStepCue.size());
    trajectory_text += kStatusFail;
    trajectory_text += "\n";
    trajectory_text += llm::kNewPlanCue;
    return trajectory_text;
}

// Continuation up to the first blank line, whitespace-trimmed.
inline std::string extract_reflection(const std::string& completion) {
    std::string text{detail::trim(completion)};
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '\n') continue;
        std::size_t j = i + 1;
        while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
        if (j < text.size() && text[j] == '\n') {
            text.erase(i);
            break;
        }
    }
    return std::string{detail::trim(text)};
}

inline prompt::PromptBundle compress(prompt::PromptBundle bundle, const std::string& adaptation) {
    if (!adaptation.empty()) bundle.adaptations.push_back(adaptation);
    return bundle;
}

template <typename WorldFactory>
TaskRecord run_task(llm::Backend& backend, WorldFactory&& world_factory, prompt::PromptBundle bundle,
                    const Limits& limits, std::string task_id = {}, TrajectorySink* sink = nullptr,
                    const textworld::ObservationCatalog& catalog = textworld::default_catalog()) {
    TaskRecord record;
    record.task_id = std::move(task_id);

    const auto session = backend.session();
    llm::Backend& policy = session ? *session : backend;

    int steps_total = 0;
    for (int ep = 1; ep <= limits.max_trials; ++ep) {
        TrialResult trial = run_trial(policy, world_factory(), bundle, limits, ep, sink, catalog);
        steps_total += static_cast<int>(trial.record.steps.size());

        if (trial.record.outcome == TrialOutcome::kSuccess) {
            if (sink) sink->on_trial(trial.record);
            record.trials.push_back(std::move(trial.record));
            record.success = true;
            record.total_steps = steps_total;
            break;
        }

        const std::string failure_prompt = build_failure_prompt(trial.prompt);
        const std::string reflection =
            extract_reflection(policy.complete(failure_prompt, kReflectionParams));
        if (!reflection.empty()) trial.record.adaptation = reflection;
        if (sink) sink->on_trial(trial.record);
        record.trials.push_back(std::move(trial.record));
        bundle = compress(std::move(bundle), reflection);
    }
    return record;
}

}  // namespace relooper::agent
