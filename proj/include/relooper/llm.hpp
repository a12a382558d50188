#pragma once

// The policy seen by the agent: a text-completion interface with deterministic
// scripted implementations. Scripted backends key their responses on (trial,
// step) counters or on prompt suffixes; a failure prompt (ending in the
// "New plan: " cue) advances the trial counter and resets the step cursor.

#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "relooper/oracle.hpp"
#include "relooper/textworld.hpp"

namespace relooper::llm {

inline constexpr std::string_view kNewPlanCue = "New plan: ";

struct DecodingParams {
    double temperature = 0.0;  // 0 = greedy decoding
    int max_new_tokens = 128;
    std::vector<std::string> stop_sequences;
};

class Backend {
public:
    virtual ~Backend() = default;

    // Returns the bare continuation; prompt echoing is normalized away inside
    // backends, never in the agent.
    virtual std::string complete(const std::string& prompt, const DecodingParams& params) = 0;

    // Fresh per-episode cursor state. nullptr means the backend is stateless
    // and may be used directly.
    virtual std::unique_ptr<Backend> session() { return nullptr; }
};

// ---------------------------------------------------------------------------
// Scripts

struct ScriptError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScriptRule {
    // Index matcher: absent fields match any value. Trials are 1-based,
    // steps 0-based within a trial.
    std::optional<int> trial;
    std::optional<int> step;
    // Suffix matcher: matches when the prompt ends with this text. Mutually
    // exclusive with the index matcher.
    std::optional<std::string> pattern;
    std::string response;
};

struct Script {
    std::vector<ScriptRule> rules;  // first match wins
    std::string default_response;
};

inline Script parse_script(const nlohmann::json& doc) {
    using nlohmann::json;
    Script script;

    const json* rules = nullptr;
    if (doc.is_array()) {
        rules = &doc;
    } else if (doc.is_object()) {
        if (!doc.contains("rules") || !doc.at("rules").is_array())
            throw ScriptError("script: expected a \"rules\" array");
        rules = &doc.at("rules");
        script.default_response = doc.value("default_response", "");
    } else {
        throw ScriptError("script: expected a JSON array or object");
    }

    for (std::size_t i = 0; i < rules->size(); ++i) {
        const std::string where = "script rule " + std::to_string(i);
        const json& node = (*rules)[i];
        if (!node.is_object()) throw ScriptError(where + ": expected an object");
        if (!node.contains("response") || !node.at("response").is_string())
            throw ScriptError(where + ": missing string field 'response'");

        ScriptRule rule;
        rule.response = node.at("response").get<std::string>();
        if (node.contains("match")) {
            const json& match = node.at("match");
            if (!match.is_object()) throw ScriptError(where + ": 'match' must be an object");
            if (match.contains("pattern")) {
                if (match.contains("trial") || match.contains("step"))
                    throw ScriptError(where + ": 'pattern' cannot be combined with indices");
                rule.pattern = match.at("pattern").get<std::string>();
            } else {
                if (match.contains("trial")) rule.trial = match.at("trial").get<int>();
                if (match.contains("step")) rule.step = match.at("step").get<int>();
            }
        }
        script.rules.push_back(std::move(rule));
    }
    return script;
}

inline Script load_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScriptError("cannot open script file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ScriptError(path + ": " + e.what());
    }
    return parse_script(doc);
}

namespace detail_llm {

inline bool rule_matches(const ScriptRule& rule, const std::string& prompt, int trial, int step) {
    if (rule.pattern) return prompt.ends_with(*rule.pattern);
    if (rule.trial && *rule.trial != trial) return false;
    if (rule.step && *rule.step != step) return false;
    return true;
}

inline const std::string& respond(const Script& script, const std::string& prompt, int trial, int step) {
    for (const auto& rule : script.rules)
        if (rule_matches(rule, prompt, trial, step)) return rule.response;
    return script.default_response;
}

inline bool is_reflection_query(const std::string& prompt) { return prompt.ends_with(kNewPlanCue); }

}  // namespace detail_llm

// Pure function of the script and its (trial, step) cursor; replay-identical.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(Script script) : script_(std::move(script)) {}

    std::string complete(const std::string& prompt, const DecodingParams&) override {
        const bool reflection = detail_llm::is_reflection_query(prompt);
        std::string out = detail_llm::respond(script_, prompt, trial_, step_);
        if (reflection) {
            ++trial_;
            step_ = 0;
        } else {
            ++step_;
        }
        return out;
    }

    std::unique_ptr<Backend> session() override { return std::make_unique<ScriptedBackend>(script_); }

private:
    Script script_;
    int trial_ = 1;
    int step_ = 0;
};

// ---------------------------------------------------------------------------
// Failure-mode personas

enum class Persona {
    kLoopOnMissingObject,  // repeats one doomed action until the step cap
    kWrongObject,          // manipulates an object of the wrong class
    kSubgoalOrder,         // tackles subgoals in an unsolvable order
    kEmptyStall,           // goes silent after a scripted failure point
    kFailThenAdapt,        // fails trial 1, then follows its own reflection
};

inline std::optional<Persona> parse_persona(std::string_view name) {
    if (name == "loop_on_missing_object") return Persona::kLoopOnMissingObject;
    if (name == "wrong_object") return Persona::kWrongObject;
    if (name == "subgoal_order") return Persona::kSubgoalOrder;
    if (name == "empty_stall") return Persona::kEmptyStall;
    if (name == "fail_then_adapt") return Persona::kFailThenAdapt;
    return std::nullopt;
}

// Emits the trial-1 script until its reflection has been emitted AND appears
// verbatim in the prompt; only then do later-trial rules take effect. A prompt
// ending in the "New plan: " cue yields the scripted reflection.
class FailThenAdaptBackend : public Backend {
public:
    explicit FailThenAdaptBackend(Script script) : script_(std::move(script)) {}

    std::string complete(const std::string& prompt, const DecodingParams&) override {
        if (detail_llm::is_reflection_query(prompt)) {
            std::string out = detail_llm::respond(script_, prompt, trial_, step_);
            last_reflection_ = out;
            ++trial_;
            step_ = 0;
            return out;
        }
        const bool adapted =
            !last_reflection_.empty() && prompt.find(last_reflection_) != std::string::npos;
        const int effective_trial = adapted ? trial_ : 1;
        std::string out = detail_llm::respond(script_, prompt, effective_trial, step_);
        ++step_;
        return out;
    }

    std::unique_ptr<Backend> session() override { return std::make_unique<FailThenAdaptBackend>(script_); }

private:
    Script script_;
    int trial_ = 1;
    int step_ = 0;
    std::string last_reflection_;
};

inline std::unique_ptr<Backend> make_persona_backend(Persona persona, Script scenario) {
    auto has_pattern_rule = [&] {
        for (const auto& rule : scenario.rules)
            if (rule.pattern) return true;
        return false;
    };
    auto has_later_trial_rule = [&] {
        for (const auto& rule : scenario.rules)
            if (rule.trial && *rule.trial >= 2) return true;
        return false;
    };

    switch (persona) {
        case Persona::kFailThenAdapt:
            if (!has_pattern_rule())
                throw std::invalid_argument("fail_then_adapt scenario needs a reflection pattern rule");
            if (!has_later_trial_rule())
                throw std::invalid_argument("fail_then_adapt scenario needs trial>=2 rules");
            return std::make_unique<FailThenAdaptBackend>(std::move(scenario));
        case Persona::kEmptyStall: {
            if (!scenario.default_response.empty())
                throw std::invalid_argument("empty_stall scenario must default to empty output");
            return std::make_unique<ScriptedBackend>(std::move(scenario));
        }
        case Persona::kLoopOnMissingObject: {
            bool has_fallback = !scenario.default_response.empty();
            for (const auto& rule : scenario.rules)
                has_fallback |= !rule.trial && !rule.step && !rule.pattern && !rule.response.empty();
            if (!has_fallback)
                throw std::invalid_argument("loop_on_missing_object scenario needs a looping fallback line");
            return std::make_unique<ScriptedBackend>(std::move(scenario));
        }
        case Persona::kWrongObject:
        case Persona::kSubgoalOrder:
            return std::make_unique<ScriptedBackend>(std::move(scenario));
    }
    throw std::invalid_argument("unknown persona");
}

// ---------------------------------------------------------------------------
// Oracle-driven backend

struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Plays the BFS plan one line per call, optionally preceded by think lines.
// Ignores the prompt entirely.
class OracleBackend : public Backend {
public:
    OracleBackend(std::vector<std::string> lines) : lines_(std::move(lines)) {}

    std::string complete(const std::string&, const DecodingParams&) override {
        if (cursor_ >= lines_.size()) return {};
        return lines_[cursor_++];
    }

    std::unique_ptr<Backend> session() override { return std::make_unique<OracleBackend>(lines_); }

private:
    std::vector<std::string> lines_;
    std::size_t cursor_ = 0;
};

inline std::unique_ptr<Backend> make_oracle_backend(const textworld::World& world, int think_lines = 0,
                                                    int max_depth = 40) {
    const auto plan = textworld::solve_oracle(world, max_depth);
    if (!plan)
        throw OracleError("world is not solvable within depth " + std::to_string(max_depth));

    std::vector<std::string> lines;
    lines.reserve(static_cast<std::size_t>(think_lines) + plan->size());
    for (int i = 0; i < think_lines; ++i) {
        lines.push_back(i == 0 ? "think: To solve the task, I need to " +
                                     textworld::format_goal_instruction(world.task) + "."
                               : "think: I will continue with the plan.");
    }
    for (const auto& action : *plan) lines.push_back(textworld::format_action(action));
    return std::make_unique<OracleBackend>(std::move(lines));
}

}  // namespace relooper::llm
