#pragma once

// Prompt assembly and completion post-processing. A bundle concatenates the
// instruction header, two ReAct exemplars, optionally two Reflexion exemplars,
// the task cue, accumulated adaptations, and the task description, ending with
// the "> " cue for the model. Blocks are separated by single blank lines.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relooper/strings.hpp"
#include "relooper/textworld.hpp"

namespace relooper::prompt {

inline constexpr std::string_view kHeader =
    "Interact with a household to solve a task. Here are two examples.";
inline constexpr std::string_view kTaskCue = "Here is the task.";
inline constexpr std::string_view kStepCue = "> ";

enum class ExemplarKind { kReact, kReflexion };

inline std::string exemplar_kind_name(ExemplarKind kind) {
    return kind == ExemplarKind::kReact ? "react" : "reflexion";
}

struct Exemplar {
    textworld::TaskType task_type = textworld::TaskType::kPickAndPlace;
    ExemplarKind kind = ExemplarKind::kReact;
    std::string body;
};

struct PromptBundle {
    std::string header{kHeader};
    std::vector<Exemplar> react_exemplars;      // exactly 2
    std::vector<Exemplar> reflexion_exemplars;  // 0 or 2
    std::string task_text;                      // initial_observation output
    std::vector<std::string> adaptations;       // oldest first
    // Alternative placement: adaptations after the task description instead of
    // above it. Off by default.
    bool adaptations_after_task = false;
};

inline std::string assemble(const PromptBundle& bundle) {
    std::vector<std::string_view> blocks;
    blocks.reserve(8 + bundle.adaptations.size());
    blocks.push_back(bundle.header);
    for (const auto& ex : bundle.react_exemplars) blocks.push_back(ex.body);
    for (const auto& ex : bundle.reflexion_exemplars) blocks.push_back(ex.body);
    blocks.push_back(kTaskCue);
    if (!bundle.adaptations_after_task)
        for (const auto& a : bundle.adaptations) blocks.push_back(a);
    blocks.push_back(bundle.task_text);
    if (bundle.adaptations_after_task)
        for (const auto& a : bundle.adaptations) blocks.push_back(a);

    std::string out;
    std::size_t total = 0;
    for (const auto& b : blocks) total += b.size() + 2;
    out.reserve(total + 3);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += blocks[i];
    }
    out += "\n";
    out += kStepCue;
    return out;
}

enum class EchoMode { kBareContinuation, kEchoesPrompt };

// First line of the model's continuation: strips the echoed prompt when the
// backend echoes, drops a leading "> ", and trims surrounding whitespace.
inline std::string extract_next_line(std::string_view completion, std::string_view prompt,
                                     EchoMode mode) {
    std::string_view continuation = completion;
    if (mode == EchoMode::kEchoesPrompt && continuation.starts_with(prompt))
        continuation.remove_prefix(prompt.size());

    const std::size_t newline = continuation.find('\n');
    if (newline != std::string_view::npos) continuation = continuation.substr(0, newline);

    std::string line = relooper::detail::trim(continuation);
    if (line.starts_with(">")) {
        line.erase(0, 1);
        line = relooper::detail::trim(line);
    }
    return line;
}

// ---------------------------------------------------------------------------
// Exemplar store

struct ExemplarError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ExemplarStore {
public:
    using Key = std::pair<textworld::TaskType, ExemplarKind>;

    void add(Exemplar exemplar) {
        exemplars_[{exemplar.task_type, exemplar.kind}].push_back(std::move(exemplar));
    }

    const std::vector<Exemplar>& get(textworld::TaskType type, ExemplarKind kind) const {
        const auto it = exemplars_.find({type, kind});
        if (it == exemplars_.end())
            throw ExemplarError("no exemplars loaded for " + textworld::task_type_name(type) + "." +
                                exemplar_kind_name(kind));
        return it->second;
    }

    bool empty() const { return exemplars_.empty(); }

private:
    std::map<Key, std::vector<Exemplar>> exemplars_;
};

namespace detail_prompt {

inline constexpr std::string_view kDelimiter = "---";

inline bool has_think_line(const std::string& body) {
    for (const auto& line : relooper::detail::split_lines(body))
        if (relooper::detail::trim(line).starts_with("> think:")) return true;
    return false;
}

// A reflexion body must carry a "STATUS:" line with a non-empty reflection
// after it.
inline bool has_status_and_reflection(const std::string& body) {
    const auto lines = relooper::detail::split_lines(body);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!relooper::detail::trim(lines[i]).starts_with("STATUS:")) continue;
        std::string rest;
        for (std::size_t j = i + 1; j < lines.size(); ++j) rest += lines[j];
        return !relooper::detail::trim(rest).empty();
    }
    return false;
}

inline void validate_exemplar(const Exemplar& exemplar, const std::string& where) {
    if (exemplar.kind == ExemplarKind::kReact) {
        if (!has_think_line(exemplar.body))
            throw ExemplarError(where + ": react exemplar has no '> think:' line");
    } else {
        if (!has_status_and_reflection(exemplar.body))
            throw ExemplarError(where + ": reflexion exemplar lacks a 'STATUS:' line followed by a reflection");
    }
}

}  // namespace detail_prompt

// Loads "{task_type}.{kind}.txt" for all six task types and both kinds.
// Each file holds two exemplars separated by a line containing only "---".
inline ExemplarStore load_exemplars(const std::filesystem::path& directory) {
    using textworld::TaskType;
    static constexpr TaskType kTypes[] = {
        TaskType::kPickAndPlace, TaskType::kExamineInLight, TaskType::kCleanAndPlace,
        TaskType::kHeatAndPlace, TaskType::kCoolAndPlace,   TaskType::kPickTwoAndPlace,
    };
    static constexpr ExemplarKind kKinds[] = {ExemplarKind::kReact, ExemplarKind::kReflexion};

    std::vector<std::string> missing;
    ExemplarStore store;

    for (TaskType type : kTypes) {
        for (ExemplarKind kind : kKinds) {
            const std::string filename =
                textworld::task_type_name(type) + "." + exemplar_kind_name(kind) + ".txt";
            const std::filesystem::path path = directory / filename;
            std::ifstream in(path);
            if (!in) {
                missing.push_back(filename);
                continue;
            }
            std::stringstream buffer;
            buffer << in.rdbuf();
            const std::string text = buffer.str();

            std::vector<std::string> parts;
            std::string current;
            for (const auto& line : relooper::detail::split_lines(text)) {
                if (relooper::detail::trim(line) == detail_prompt::kDelimiter) {
                    parts.push_back(current);
                    current.clear();
                    continue;
                }
                current += line;
                current += "\n";
            }
            parts.push_back(current);
            if (parts.size() != 2)
                throw ExemplarError(path.string() + ": expected exactly one '---' delimiter, found " +
                                    std::to_string(parts.size() - 1));

            for (std::size_t i = 0; i < parts.size(); ++i) {
                Exemplar exemplar{type, kind, relooper::detail::trim(parts[i])};
                if (exemplar.body.empty())
                    throw ExemplarError(path.string() + ": exemplar " + std::to_string(i + 1) + " is empty");
                detail_prompt::validate_exemplar(exemplar,
                                                 path.string() + ": exemplar " + std::to_string(i + 1));
                store.add(std::move(exemplar));
            }
        }
    }

    if (!missing.empty()) {
        std::string message = "missing exemplar files in " + directory.string() + ":";
        for (const auto& name : missing) message += " " + name;
        throw ExemplarError(message);
    }
    return store;
}

}  // namespace relooper::prompt
