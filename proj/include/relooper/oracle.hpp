#pragma once

// Brute-force breadth-first solver over the text game. State expansion goes
// through step() itself, so the plan semantics can never drift from the
// environment. Returns a shortest plan or nullopt within the depth bound.

#include <deque>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "relooper/textworld.hpp"

namespace relooper::textworld {

namespace detail_oracle {

// Canonical byte encoding of the searchable state: agent location, inventory,
// open flags, object placements and flags, and the examine latch.
inline std::string encode(const World& w) {
    std::string key;
    key.reserve(8 + w.receptacles.size() + 5 * w.objects.size());

    auto recep_ordinal = [&](const ReceptacleId& id) -> int {
        for (std::size_t i = 0; i < w.receptacles.size(); ++i)
            if (w.receptacles[i].id == id) return static_cast<int>(i);
        return -1;
    };

    key.push_back(static_cast<char>(w.agent_location ? recep_ordinal(*w.agent_location) : -1));
    for (const auto& r : w.receptacles) key.push_back(r.is_open ? '1' : '0');
    key.push_back('|');

    for (const auto& [id, state] : w.objects) {
        int loc = -1;  // -1 means in hand
        if (!w.inventory || *w.inventory != id) {
            for (std::size_t i = 0; i < w.receptacles.size(); ++i) {
                const auto& contents = w.receptacles[i].contents;
                if (std::find(contents.begin(), contents.end(), id) != contents.end()) {
                    loc = static_cast<int>(i);
                    break;
                }
            }
        }
        key.push_back(static_cast<char>(loc));
        key.push_back(static_cast<char>((state.is_clean ? 1 : 0) | (state.is_hot ? 2 : 0) |
                                        (state.is_cool ? 4 : 0)));
    }
    key.push_back(w.examined_in_light ? 'L' : 'l');
    return key;
}

inline std::vector<Action> candidate_actions(const World& w) {
    std::vector<Action> actions;
    for (const auto& r : w.receptacles) {
        if (!w.agent_location || *w.agent_location != r.id) actions.push_back(GoTo{r.id});
    }
    if (!w.agent_location) return actions;

    const Receptacle* here = detail_world::find_receptacle(w, *w.agent_location);
    if (!here) return actions;

    if (here->openable && !here->is_open) actions.push_back(Open{here->id});
    if (here->openable && here->is_open) actions.push_back(Close{here->id});
    if (here->capability == Capability::kLamp) actions.push_back(Use{here->id});
    if (here->is_open && !w.inventory)
        for (const auto& obj : here->contents) actions.push_back(Take{obj, here->id});
    if (w.inventory) {
        actions.push_back(Put{*w.inventory, here->id});
        if (here->capability == Capability::kCleaner) actions.push_back(Clean{*w.inventory, here->id});
        if (here->capability == Capability::kHeater) actions.push_back(Heat{*w.inventory, here->id});
        if (here->capability == Capability::kCooler) actions.push_back(Cool{*w.inventory, here->id});
    }
    return actions;
}

}  // namespace detail_oracle

// BFS from a fresh world; takes its own copy. An already-satisfied goal yields
// the empty plan. nullopt when no plan exists within max_depth actions.
inline std::optional<std::vector<Action>> solve_oracle(const World& start, int max_depth = 40) {
    if (goal_satisfied(start)) return std::vector<Action>{};

    struct Node {
        World world;
        int parent;
        Action action;
        int depth;
    };

    std::vector<Node> nodes;
    std::deque<int> frontier;
    std::unordered_set<std::string> visited;

    World root = start;
    root.done = false;
    nodes.push_back(Node{root, -1, Action(GoTo{}), 0});
    frontier.push_back(0);
    visited.insert(detail_oracle::encode(root));

    auto unwind = [&](int leaf) {
        std::vector<Action> plan;
        for (int i = leaf; nodes[i].parent >= 0; i = nodes[i].parent) plan.push_back(nodes[i].action);
        std::reverse(plan.begin(), plan.end());
        return plan;
    };

    while (!frontier.empty()) {
        const int index = frontier.front();
        frontier.pop_front();
        if (nodes[index].depth >= max_depth) continue;

        for (const Action& action : detail_oracle::candidate_actions(nodes[index].world)) {
            World next = nodes[index].world;
            const Observation obs = step(next, action);
            nodes.push_back(Node{next, index, action, nodes[index].depth + 1});
            const int child = static_cast<int>(nodes.size()) - 1;
            if (obs.reward == 1) return unwind(child);
            if (!visited.insert(detail_oracle::encode(next)).second) {
                nodes.pop_back();
                continue;
            }
            frontier.push_back(child);
        }
    }
    return std::nullopt;
}

}  // namespace relooper::textworld
