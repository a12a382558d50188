#pragma once

// Deterministic household text game. A world is a set of receptacles holding
// objects, a single-handed agent, and one goal drawn from six task types.
// Commands follow the nine-action grammar; anything whose preconditions fail
// observes "Nothing happens." and leaves the world untouched.

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "relooper/ids.hpp"
#include "relooper/strings.hpp"

namespace relooper::textworld {

enum class Capability { kNone, kCleaner, kHeater, kCooler, kLamp };

struct ObjectState {
    bool is_clean = false;
    bool is_hot = false;
    bool is_cool = false;

    auto operator<=>(const ObjectState&) const = default;
};

struct Receptacle {
    ReceptacleId id;
    bool openable = false;
    bool is_open = true;  // non-openable receptacles are always open
    Capability capability = Capability::kNone;
    std::vector<ObjectId> contents;  // unique; listed in arrival order

    bool operator==(const Receptacle&) const = default;
};

enum class TaskType {
    kPickAndPlace,
    kExamineInLight,
    kCleanAndPlace,
    kHeatAndPlace,
    kCoolAndPlace,
    kPickTwoAndPlace,
};

enum class Phrasing { kA, kB };

struct TaskSpec {
    TaskType type = TaskType::kPickAndPlace;
    std::string object_class;
    // The goal target: a bare class ("sofa") or one specific instance ("sofa 1").
    std::string receptacle_class;  // empty for ExamineInLight
    std::optional<int> receptacle_index;
    std::string lamp_class;  // ExamineInLight only
    Phrasing phrasing = Phrasing::kA;

    bool operator==(const TaskSpec&) const = default;

    std::string receptacle_text() const {
        return receptacle_index ? receptacle_class + " " + std::to_string(*receptacle_index)
                                : receptacle_class;
    }
};

struct World {
    std::vector<Receptacle> receptacles;
    std::map<ObjectId, ObjectState> objects;
    std::optional<ReceptacleId> agent_location;  // nullopt until the first go-to
    std::optional<ObjectId> inventory;           // at most one object in hand
    TaskSpec task;
    bool done = false;
    bool examined_in_light = false;  // latch for ExamineInLight goals

    bool operator==(const World&) const = default;
};

struct Observation {
    std::string text;
    int reward = 0;
};

// ---------------------------------------------------------------------------
// Actions

struct GoTo {
    ReceptacleId target;
    bool operator==(const GoTo&) const = default;
};
struct Open {
    ReceptacleId target;
    bool operator==(const Open&) const = default;
};
struct Close {
    ReceptacleId target;
    bool operator==(const Close&) const = default;
};
struct Take {
    ObjectId object;
    ReceptacleId from;
    bool operator==(const Take&) const = default;
};
struct Put {
    ObjectId object;
    ReceptacleId target;
    bool operator==(const Put&) const = default;
};
struct Clean {
    ObjectId object;
    ReceptacleId with;
    bool operator==(const Clean&) const = default;
};
struct Heat {
    ObjectId object;
    ReceptacleId with;
    bool operator==(const Heat&) const = default;
};
struct Cool {
    ObjectId object;
    ReceptacleId with;
    bool operator==(const Cool&) const = default;
};
struct Use {
    ReceptacleId target;
    bool operator==(const Use&) const = default;
};

using Action = std::variant<GoTo, Open, Close, Take, Put, Clean, Heat, Cool, Use>;

inline std::string format_action(const Action& action) {
    struct Renderer {
        std::string operator()(const GoTo& a) const { return "go to " + a.target.str(); }
        std::string operator()(const Open& a) const { return "open " + a.target.str(); }
        std::string operator()(const Close& a) const { return "close " + a.target.str(); }
        std::string operator()(const Take& a) const { return "take " + a.object.str() + " from " + a.from.str(); }
        std::string operator()(const Put& a) const { return "put " + a.object.str() + " in/on " + a.target.str(); }
        std::string operator()(const Clean& a) const { return "clean " + a.object.str() + " with " + a.with.str(); }
        std::string operator()(const Heat& a) const { return "heat " + a.object.str() + " with " + a.with.str(); }
        std::string operator()(const Cool& a) const { return "cool " + a.object.str() + " with " + a.with.str(); }
        std::string operator()(const Use& a) const { return "use " + a.target.str(); }
    };
    return std::visit(Renderer{}, action);
}

// Parses one command line (without the leading "> "). Whitespace runs are
// collapsed first; keywords are case-sensitive and "in/on" must appear
// literally. Returns nullopt when no grammar variant matches.
inline std::optional<Action> parse_action(std::string_view line) {
    const auto words = relooper::detail::split_words(line);
    if (words.empty()) return std::nullopt;

    auto recep_at = [&](std::size_t i) -> std::optional<ReceptacleId> {
        if (i + 1 >= words.size()) return std::nullopt;
        return parse_receptacle_id(words[i] + " " + words[i + 1]);
    };
    auto object_at = [&](std::size_t i) -> std::optional<ObjectId> {
        if (i + 1 >= words.size()) return std::nullopt;
        return parse_object_id(words[i] + " " + words[i + 1]);
    };

    const std::string& verb = words[0];

    if (verb == "go" && words.size() == 4 && words[1] == "to") {
        if (auto r = recep_at(2)) return Action(GoTo{*r});
        return std::nullopt;
    }
    if ((verb == "open" || verb == "close" || verb == "use") && words.size() == 3) {
        auto r = recep_at(1);
        if (!r) return std::nullopt;
        if (verb == "open") return Action(Open{*r});
        if (verb == "close") return Action(Close{*r});
        return Action(Use{*r});
    }
    if (verb == "take" && words.size() == 6 && words[3] == "from") {
        auto o = object_at(1);
        auto r = recep_at(4);
        if (o && r) return Action(Take{*o, *r});
        return std::nullopt;
    }
    if (verb == "put" && words.size() == 6 && words[3] == "in/on") {
        auto o = object_at(1);
        auto r = recep_at(4);
        if (o && r) return Action(Put{*o, *r});
        return std::nullopt;
    }
    if ((verb == "clean" || verb == "heat" || verb == "cool") && words.size() == 6 && words[3] == "with") {
        auto o = object_at(1);
        auto r = recep_at(4);
        if (!o || !r) return std::nullopt;
        if (verb == "clean") return Action(Clean{*o, *r});
        if (verb == "heat") return Action(Heat{*o, *r});
        return Action(Cool{*o, *r});
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Observation wording catalog
//
// The defaults below are the canonical sentence templates; data/observations.txt
// ships the same catalog as a plain-text file and a test keeps the two in sync.

struct ObservationCatalog {
    std::string room_intro = "You are in the middle of a room. Looking quickly around you, you see {list}.";
    std::string task_line = "Your task is to: {goal}.";
    std::string goto_closed = "The {recep} is closed.";
    std::string goto_open = "The {recep} is open. In it, you see {list}.";
    std::string goto_surface = "On the {recep}, you see {list}.";
    std::string open_recep = "You open the {recep}. The {recep} is open. In it, you see {list}.";
    std::string close_recep = "You close the {recep}.";
    std::string take = "You pick up the {obj} from the {recep}.";
    std::string put = "You put the {obj} in/on the {recep}.";
    std::string clean = "You clean the {obj} using the {recep}.";
    std::string heat = "You heat the {obj} using the {recep}.";
    std::string cool = "You cool the {obj} using the {recep}.";
    std::string use = "You turn on the {recep}.";
    std::string nothing = "Nothing happens.";
    std::string empty_list = "nothing";

    bool operator==(const ObservationCatalog&) const = default;
};

inline const ObservationCatalog& default_catalog() {
    static const ObservationCatalog catalog;
    return catalog;
}

struct CatalogError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Plain-text format: one "key = template" per line, '#' starts a comment.
inline ObservationCatalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CatalogError("cannot open observation catalog: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();

    ObservationCatalog catalog;
    std::map<std::string, std::string*> slots{
        {"room_intro", &catalog.room_intro}, {"task_line", &catalog.task_line},
        {"goto_closed", &catalog.goto_closed}, {"goto_open", &catalog.goto_open},
        {"goto_surface", &catalog.goto_surface}, {"open", &catalog.open_recep},
        {"close", &catalog.close_recep}, {"take", &catalog.take},
        {"put", &catalog.put}, {"clean", &catalog.clean},
        {"heat", &catalog.heat}, {"cool", &catalog.cool},
        {"use", &catalog.use}, {"nothing", &catalog.nothing},
        {"empty_list", &catalog.empty_list},
    };
    std::set<std::string> seen;
    int lineno = 0;
    for (const auto& raw : relooper::detail::split_lines(buffer.str())) {
        ++lineno;
        const std::string line = relooper::detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CatalogError(path + ":" + std::to_string(lineno) + ": expected 'key = template'");
        const std::string key = relooper::detail::trim(line.substr(0, eq));
        const std::string value = relooper::detail::trim(line.substr(eq + 1));
        auto it = slots.find(key);
        if (it == slots.end())
            throw CatalogError(path + ":" + std::to_string(lineno) + ": unknown event key '" + key + "'");
        *it->second = value;
        seen.insert(key);
    }
    for (const auto& [key, slot] : slots)
        if (!seen.count(key)) throw CatalogError(path + ": missing event key '" + key + "'");
    return catalog;
}

// "a x 1" / "a x 1, and a y 1" / "a x 1, a y 1, and a z 1"; empty lists render
// as the catalog's empty_list word.
inline std::string item_list(const std::vector<std::string>& names, const ObservationCatalog& catalog) {
    if (names.empty()) return catalog.empty_list;
    if (names.size() == 1) return "a " + names[0];
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) out += i + 1 == names.size() ? ", and a " : ", a ";
        else out += "a ";
        out += names[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Goal instructions: two phrasings per task type.

inline std::string format_goal_instruction(const TaskSpec& task) {
    using relooper::detail::substitute;
    const std::string obj = task.object_class;
    const std::string recep = task.receptacle_text();
    const bool a = task.phrasing == Phrasing::kA;
    switch (task.type) {
        case TaskType::kPickAndPlace:
            return substitute(a ? "put a {obj} in {recep}" : "put some {obj} on {recep}",
                              {{"obj", obj}, {"recep", recep}});
        case TaskType::kExamineInLight:
            return substitute(a ? "look at {obj} under the {lamp}" : "examine the {obj} with the {lamp}",
                              {{"obj", obj}, {"lamp", task.lamp_class}});
        case TaskType::kCleanAndPlace:
            return substitute(a ? "put a clean {obj} in {recep}" : "clean some {obj} and put it in {recep}",
                              {{"obj", obj}, {"recep", recep}});
        case TaskType::kHeatAndPlace:
            return substitute(a ? "put a hot {obj} in {recep}" : "heat some {obj} and put it in {recep}",
                              {{"obj", obj}, {"recep", recep}});
        case TaskType::kCoolAndPlace:
            return substitute(a ? "put a cool {obj} in {recep}" : "cool some {obj} and put it in {recep}",
                              {{"obj", obj}, {"recep", recep}});
        case TaskType::kPickTwoAndPlace:
            return substitute(a ? "put two {obj} in {recep}" : "find two {obj} and put them in {recep}",
                              {{"obj", obj}, {"recep", recep}});
    }
    return {};
}

// Receptacle roll call plus the goal line, in world-file order.
inline std::string initial_observation(const World& world,
                                       const ObservationCatalog& catalog = default_catalog()) {
    std::vector<std::string> names;
    names.reserve(world.receptacles.size());
    for (const auto& r : world.receptacles) names.push_back(r.id.str());
    std::string text = relooper::detail::substitute(catalog.room_intro, {{"list", item_list(names, catalog)}});
    text += "\n";
    text += relooper::detail::substitute(catalog.task_line, {{"goal", format_goal_instruction(world.task)}});
    return text;
}

// ---------------------------------------------------------------------------
// Transition semantics

namespace detail_world {

inline Receptacle* find_receptacle(World& w, const ReceptacleId& id) {
    for (auto& r : w.receptacles)
        if (r.id == id) return &r;
    return nullptr;
}

inline const Receptacle* find_receptacle(const World& w, const ReceptacleId& id) {
    for (const auto& r : w.receptacles)
        if (r.id == id) return &r;
    return nullptr;
}

inline bool agent_at(const World& w, const ReceptacleId& id) {
    return w.agent_location && *w.agent_location == id;
}

inline std::string contents_list(const Receptacle& r, const ObservationCatalog& catalog) {
    std::vector<std::string> names;
    names.reserve(r.contents.size());
    for (const auto& o : r.contents) names.push_back(o.str());
    return item_list(names, catalog);
}

inline bool matches_target(const TaskSpec& task, const Receptacle& r) {
    if (r.id.class_name != task.receptacle_class) return false;
    return !task.receptacle_index || r.id.index == *task.receptacle_index;
}

}  // namespace detail_world

inline bool goal_satisfied(const World& w) {
    const TaskSpec& task = w.task;
    if (task.type == TaskType::kExamineInLight) return w.examined_in_light;

    for (const auto& r : w.receptacles) {
        if (!detail_world::matches_target(task, r)) continue;
        int count = 0;
        bool flagged = false;
        for (const auto& obj : r.contents) {
            if (obj.class_name != task.object_class) continue;
            ++count;
            const auto it = w.objects.find(obj);
            if (it == w.objects.end()) continue;
            const ObjectState& st = it->second;
            const bool ok = task.type == TaskType::kCleanAndPlace  ? st.is_clean
                            : task.type == TaskType::kHeatAndPlace ? st.is_hot
                            : task.type == TaskType::kCoolAndPlace ? st.is_cool
                                                                   : true;
            flagged = flagged || ok;
        }
        switch (task.type) {
            case TaskType::kPickAndPlace:
                if (count >= 1) return true;
                break;
            case TaskType::kCleanAndPlace:
            case TaskType::kHeatAndPlace:
            case TaskType::kCoolAndPlace:
                if (flagged) return true;
                break;
            case TaskType::kPickTwoAndPlace:
                if (count >= 2) return true;
                break;
            case TaskType::kExamineInLight:
                break;
        }
    }
    return false;
}

// Applies one action. Failed preconditions observe "Nothing happens." and
// leave the world bit-identical; successful actions mutate the world and then
// latch done (reward 1) the first time the goal predicate holds.
inline Observation step(World& w, const Action& action,
                        const ObservationCatalog& catalog = default_catalog()) {
    if (w.done) throw std::logic_error("step() called on a finished world");

    using namespace detail_world;
    using relooper::detail::substitute;

    const Observation nothing{catalog.nothing, 0};
    Observation obs;
    bool acted = false;

    if (const auto* go = std::get_if<GoTo>(&action)) {
        Receptacle* r = find_receptacle(w, go->target);
        if (!r) return nothing;
        w.agent_location = r->id;
        if (r->openable && !r->is_open) {
            obs.text = substitute(catalog.goto_closed, {{"recep", r->id.str()}});
        } else if (r->openable) {
            obs.text = substitute(catalog.goto_open, {{"recep", r->id.str()}, {"list", contents_list(*r, catalog)}});
        } else {
            obs.text = substitute(catalog.goto_surface, {{"recep", r->id.str()}, {"list", contents_list(*r, catalog)}});
        }
        acted = true;
    } else if (const auto* open = std::get_if<Open>(&action)) {
        Receptacle* r = find_receptacle(w, open->target);
        if (!r || !agent_at(w, open->target) || !r->openable || r->is_open) return nothing;
        r->is_open = true;
        obs.text = substitute(catalog.open_recep, {{"recep", r->id.str()}, {"list", contents_list(*r, catalog)}});
        acted = true;
    } else if (const auto* close = std::get_if<Close>(&action)) {
        Receptacle* r = find_receptacle(w, close->target);
        if (!r || !agent_at(w, close->target) || !r->openable || !r->is_open) return nothing;
        r->is_open = false;
        obs.text = substitute(catalog.close_recep, {{"recep", r->id.str()}});
        acted = true;
    } else if (const auto* take = std::get_if<Take>(&action)) {
        Receptacle* r = find_receptacle(w, take->from);
        if (!r || !agent_at(w, take->from) || !r->is_open || w.inventory) return nothing;
        auto it = std::find(r->contents.begin(), r->contents.end(), take->object);
        if (it == r->contents.end()) return nothing;
        r->contents.erase(it);
        w.inventory = take->object;
        obs.text = substitute(catalog.take, {{"obj", take->object.str()}, {"recep", r->id.str()}});
        acted = true;
    } else if (const auto* put = std::get_if<Put>(&action)) {
        Receptacle* r = find_receptacle(w, put->target);
        if (!r || !agent_at(w, put->target) || !w.inventory || *w.inventory != put->object) return nothing;
        r->contents.push_back(put->object);
        w.inventory.reset();
        obs.text = substitute(catalog.put, {{"obj", put->object.str()}, {"recep", r->id.str()}});
        acted = true;
    } else if (const auto* clean = std::get_if<Clean>(&action)) {
        Receptacle* r = find_receptacle(w, clean->with);
        if (!r || !agent_at(w, clean->with) || r->capability != Capability::kCleaner) return nothing;
        if (!w.inventory || *w.inventory != clean->object) return nothing;
        w.objects.at(clean->object).is_clean = true;
        obs.text = substitute(catalog.clean, {{"obj", clean->object.str()}, {"recep", r->id.str()}});
        acted = true;
    } else if (const auto* heat = std::get_if<Heat>(&action)) {
        Receptacle* r = find_receptacle(w, heat->with);
        if (!r || !agent_at(w, heat->with) || r->capability != Capability::kHeater) return nothing;
        if (!w.inventory || *w.inventory != heat->object) return nothing;
        auto& st = w.objects.at(heat->object);
        st.is_hot = true;
        st.is_cool = false;
        obs.text = substitute(catalog.heat, {{"obj", heat->object.str()}, {"recep", r->id.str()}});
        acted = true;
    } else if (const auto* cool = std::get_if<Cool>(&action)) {
        Receptacle* r = find_receptacle(w, cool->with);
        if (!r || !agent_at(w, cool->with) || r->capability != Capability::kCooler) return nothing;
        if (!w.inventory || *w.inventory != cool->object) return nothing;
        auto& st = w.objects.at(cool->object);
        st.is_cool = true;
        st.is_hot = false;
        obs.text = substitute(catalog.cool, {{"obj", cool->object.str()}, {"recep", r->id.str()}});
        acted = true;
    } else if (const auto* use = std::get_if<Use>(&action)) {
        Receptacle* r = find_receptacle(w, use->target);
        if (!r || !agent_at(w, use->target) || r->capability != Capability::kLamp) return nothing;
        if (w.task.type == TaskType::kExamineInLight && w.inventory &&
            w.inventory->class_name == w.task.object_class && r->id.class_name == w.task.lamp_class) {
            w.examined_in_light = true;
        }
        obs.text = substitute(catalog.use, {{"recep", r->id.str()}});
        acted = true;
    }

    if (acted && !w.done && goal_satisfied(w)) {
        w.done = true;
        obs.reward = 1;
    }
    return obs;
}

// ---------------------------------------------------------------------------
// World files (JSON scenarios)

struct WorldFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail_world {

inline Capability default_capability(const std::string& class_name) {
    if (class_name == "sinkbasin") return Capability::kCleaner;
    if (class_name == "microwave") return Capability::kHeater;
    if (class_name == "fridge") return Capability::kCooler;
    if (class_name == "desklamp" || class_name == "floorlamp") return Capability::kLamp;
    return Capability::kNone;
}

inline bool default_openable(const std::string& class_name) {
    return class_name == "fridge" || class_name == "microwave" || class_name == "cabinet" ||
           class_name == "drawer" || class_name == "safe";
}

inline Capability parse_capability(const std::string& text, const std::string& where) {
    if (text == "none") return Capability::kNone;
    if (text == "cleaner") return Capability::kCleaner;
    if (text == "heater") return Capability::kHeater;
    if (text == "cooler") return Capability::kCooler;
    if (text == "lamp") return Capability::kLamp;
    throw WorldFileError(where + ": unknown capability '" + text + "'");
}

inline TaskType parse_task_type(const std::string& text, const std::string& where) {
    if (text == "pick_and_place") return TaskType::kPickAndPlace;
    if (text == "examine_in_light") return TaskType::kExamineInLight;
    if (text == "clean_and_place") return TaskType::kCleanAndPlace;
    if (text == "heat_and_place") return TaskType::kHeatAndPlace;
    if (text == "cool_and_place") return TaskType::kCoolAndPlace;
    if (text == "pick_two_and_place") return TaskType::kPickTwoAndPlace;
    throw WorldFileError(where + ": unknown task type '" + text + "'");
}

}  // namespace detail_world

inline std::string task_type_name(TaskType type) {
    switch (type) {
        case TaskType::kPickAndPlace: return "pick_and_place";
        case TaskType::kExamineInLight: return "examine_in_light";
        case TaskType::kCleanAndPlace: return "clean_and_place";
        case TaskType::kHeatAndPlace: return "heat_and_place";
        case TaskType::kCoolAndPlace: return "cool_and_place";
        case TaskType::kPickTwoAndPlace: return "pick_two_and_place";
    }
    return "unknown";
}

inline World load_world(const nlohmann::json& doc) {
    using nlohmann::json;
    using namespace detail_world;

    if (!doc.is_object()) throw WorldFileError("world file: top level must be an object");

    auto require = [](const json& node, const char* field, const std::string& where) -> const json& {
        auto it = node.find(field);
        if (it == node.end()) throw WorldFileError(where + ": missing field '" + field + "'");
        return *it;
    };
    auto as_string = [](const json& node, const std::string& where) -> std::string {
        if (!node.is_string()) throw WorldFileError(where + ": expected a string");
        return node.get<std::string>();
    };
    auto as_index = [](const json& node, const std::string& where) -> int {
        if (!node.is_number_integer() || node.get<int>() < 1)
            throw WorldFileError(where + ": expected a positive integer");
        return node.get<int>();
    };
    auto class_word = [&](const json& node, const std::string& where) {
        const std::string text = as_string(node, where);
        if (!relooper::detail::is_lower_alpha_word(text))
            throw WorldFileError(where + ": class must be a single lowercase word, got '" + text + "'");
        return text;
    };

    World world;

    const json& receps = require(doc, "receptacles", "world file");
    if (!receps.is_array() || receps.empty())
        throw WorldFileError("receptacles: expected a non-empty array");
    std::set<ReceptacleId> recep_ids;
    for (std::size_t i = 0; i < receps.size(); ++i) {
        const std::string where = "receptacles[" + std::to_string(i) + "]";
        const json& node = receps[i];
        if (!node.is_object()) throw WorldFileError(where + ": expected an object");
        Receptacle r;
        r.id.class_name = class_word(require(node, "class", where), where + ".class");
        r.id.index = as_index(require(node, "id", where), where + ".id");
        r.openable = node.contains("openable") ? node.at("openable").get<bool>()
                                               : default_openable(r.id.class_name);
        r.is_open = !r.openable;  // openable receptacles start closed
        r.capability = node.contains("capability")
                           ? parse_capability(as_string(node.at("capability"), where + ".capability"),
                                              where + ".capability")
                           : default_capability(r.id.class_name);
        if (!recep_ids.insert(r.id).second)
            throw WorldFileError(where + ": duplicate receptacle '" + r.id.str() + "'");
        world.receptacles.push_back(std::move(r));
    }

    const json& objects = require(doc, "objects", "world file");
    if (!objects.is_array()) throw WorldFileError("objects: expected an array");
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const std::string where = "objects[" + std::to_string(i) + "]";
        const json& node = objects[i];
        if (!node.is_object()) throw WorldFileError(where + ": expected an object");
        ObjectId id;
        id.class_name = class_word(require(node, "class", where), where + ".class");
        id.index = as_index(require(node, "id", where), where + ".id");
        if (world.objects.count(id))
            throw WorldFileError(where + ": duplicate object '" + id.str() + "'");

        const std::string location = as_string(require(node, "location", where), where + ".location");
        const auto recep_id = parse_receptacle_id(location);
        if (!recep_id)
            throw WorldFileError(where + ".location: malformed receptacle id '" + location + "'");
        Receptacle* recep = detail_world::find_receptacle(world, *recep_id);
        if (!recep)
            throw WorldFileError(where + ".location: receptacle '" + location + "' is not declared");

        ObjectState state;
        state.is_clean = node.value("clean", false);
        state.is_hot = node.value("hot", false);
        state.is_cool = node.value("cool", false);
        if (state.is_hot && state.is_cool)
            throw WorldFileError(where + ": object cannot be both hot and cool");

        recep->contents.push_back(id);
        world.objects.emplace(std::move(id), state);
    }

    const json& task = require(doc, "task", "world file");
    if (!task.is_object()) throw WorldFileError("task: expected an object");
    world.task.type = parse_task_type(as_string(require(task, "type", "task"), "task.type"), "task.type");
    world.task.object_class = class_word(require(task, "object_class", "task"), "task.object_class");

    const std::string phrasing = as_string(require(task, "phrasing", "task"), "task.phrasing");
    if (phrasing == "A") world.task.phrasing = Phrasing::kA;
    else if (phrasing == "B") world.task.phrasing = Phrasing::kB;
    else throw WorldFileError("task.phrasing: expected \"A\" or \"B\", got '" + phrasing + "'");

    if (world.task.type == TaskType::kExamineInLight) {
        world.task.lamp_class = class_word(require(task, "lamp_class", "task"), "task.lamp_class");
        bool lamp_found = false;
        for (const auto& r : world.receptacles) lamp_found |= r.id.class_name == world.task.lamp_class;
        if (!lamp_found)
            throw WorldFileError("task.lamp_class: no receptacle of class '" + world.task.lamp_class + "'");
    } else {
        const std::string target = as_string(require(task, "receptacle", "task"), "task.receptacle");
        const auto words = relooper::detail::split_words(target);
        int index = 0;
        if (words.size() == 1 && relooper::detail::is_lower_alpha_word(words[0])) {
            world.task.receptacle_class = words[0];
        } else if (words.size() == 2 && relooper::detail::is_lower_alpha_word(words[0]) &&
                   relooper::detail::parse_positive_int(words[1], index)) {
            world.task.receptacle_class = words[0];
            world.task.receptacle_index = index;
        } else {
            throw WorldFileError("task.receptacle: malformed target '" + target + "'");
        }
        bool target_found = false;
        for (const auto& r : world.receptacles)
            target_found |= detail_world::matches_target(world.task, r);
        if (!target_found)
            throw WorldFileError("task.receptacle: no receptacle matches '" + target + "'");
    }

    bool object_found = false;
    for (const auto& [id, state] : world.objects) object_found |= id.class_name == world.task.object_class;
    if (!object_found)
        throw WorldFileError("task.object_class: no object of class '" + world.task.object_class + "'");

    return world;
}

inline World load_world_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw WorldFileError(std::string("world file: ") + e.what());
    }
    return load_world(doc);
}

inline World load_world_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw WorldFileError("cannot open world file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return load_world_text(buffer.str());
}

}  // namespace relooper::textworld
