#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "relooper/textworld.hpp"

using namespace relooper::textworld;

namespace {

// Kitchen with one of each capability plus a plain surface; lettuce starts in
// the closed fridge, mug on the countertop.
World kitchen(const std::string& task_json) {
    return load_world_text(R"({
        "receptacles": [
            {"class": "fridge", "id": 1},
            {"class": "microwave", "id": 1},
            {"class": "sinkbasin", "id": 1},
            {"class": "countertop", "id": 1},
            {"class": "garbagecan", "id": 1}
        ],
        "objects": [
            {"class": "lettuce", "id": 1, "location": "fridge 1"},
            {"class": "mug", "id": 1, "location": "countertop 1"}
        ],
        "task": )" + task_json + "}");
}

Observation apply(World& w, const std::string& line) {
    auto action = parse_action(line);
    REQUIRE(action.has_value());
    return step(w, *action);
}

}  // namespace

TEST_CASE("action grammar round-trips through format_action") {
    const char* lines[] = {
        "go to fridge 1",
        "open cabinet 3",
        "close safe 1",
        "take mug 1 from countertop 2",
        "put lettuce 1 in/on garbagecan 1",
        "clean apple 1 with sinkbasin 1",
        "heat egg 1 with microwave 1",
        "cool pan 2 with fridge 1",
        "use desklamp 1",
    };
    for (const std::string line : lines) {
        auto action = parse_action(line);
        REQUIRE(action.has_value());
        CHECK(format_action(*action) == line);
    }
}

TEST_CASE("parse_action rejects near misses") {
    CHECK_FALSE(parse_action("").has_value());
    CHECK_FALSE(parse_action("go fridge 1").has_value());
    CHECK_FALSE(parse_action("go to the fridge 1").has_value());
    CHECK_FALSE(parse_action("go to fridge").has_value());
    CHECK_FALSE(parse_action("open fridge").has_value());
    CHECK_FALSE(parse_action("Open fridge 1").has_value());
    CHECK_FALSE(parse_action("take mug 1 countertop 1").has_value());
    CHECK_FALSE(parse_action("take mug 1 from countertop").has_value());
    CHECK_FALSE(parse_action("put mug 1 in countertop 1").has_value());
    CHECK_FALSE(parse_action("put mug 1 on countertop 1").has_value());
    CHECK_FALSE(parse_action("clean mug 1 at sinkbasin 1").has_value());
    CHECK_FALSE(parse_action("heat mug one with microwave 1").has_value());
    CHECK_FALSE(parse_action("use desklamp 1 now").has_value());
    CHECK_FALSE(parse_action("look at mug 1").has_value());
    CHECK_FALSE(parse_action("go to fridge 0").has_value());
    CHECK_FALSE(parse_action("go to Fridge 1").has_value());
}

TEST_CASE("parse_action collapses whitespace runs") {
    auto action = parse_action("  take   mug 1   from  countertop 1 ");
    REQUIRE(action.has_value());
    CHECK(format_action(*action) == "take mug 1 from countertop 1");
}

TEST_CASE("item_list joins with serial comma") {
    const ObservationCatalog& cat = default_catalog();
    CHECK(item_list({}, cat) == "nothing");
    CHECK(item_list({"mug 1"}, cat) == "a mug 1");
    CHECK(item_list({"mug 1", "pan 2"}, cat) == "a mug 1, and a pan 2");
    CHECK(item_list({"mug 1", "pan 2", "egg 1"}, cat) == "a mug 1, a pan 2, and a egg 1");
}

TEST_CASE("goal instruction covers both phrasings of all six task types") {
    TaskSpec t;
    t.object_class = "mug";
    t.receptacle_class = "shelf";
    t.receptacle_index = 1;
    t.lamp_class = "desklamp";

    const std::pair<TaskType, std::pair<std::string, std::string>> rows[] = {
        {TaskType::kPickAndPlace, {"put a mug in shelf 1", "put some mug on shelf 1"}},
        {TaskType::kExamineInLight,
         {"look at mug under the desklamp", "examine the mug with the desklamp"}},
        {TaskType::kCleanAndPlace,
         {"put a clean mug in shelf 1", "clean some mug and put it in shelf 1"}},
        {TaskType::kHeatAndPlace,
         {"put a hot mug in shelf 1", "heat some mug and put it in shelf 1"}},
        {TaskType::kCoolAndPlace,
         {"put a cool mug in shelf 1", "cool some mug and put it in shelf 1"}},
        {TaskType::kPickTwoAndPlace,
         {"put two mug in shelf 1", "find two mug and put them in shelf 1"}},
    };
    for (const auto& [type, wordings] : rows) {
        t.type = type;
        t.phrasing = Phrasing::kA;
        CHECK(format_goal_instruction(t) == wordings.first);
        t.phrasing = Phrasing::kB;
        CHECK(format_goal_instruction(t) == wordings.second);
    }
}

TEST_CASE("initial observation lists receptacles in file order plus the goal") {
    World w = kitchen(R"({"type": "clean_and_place", "object_class": "lettuce",
                          "receptacle": "countertop 1", "phrasing": "A"})");
    CHECK(initial_observation(w) ==
          "You are in the middle of a room. Looking quickly around you, you see a fridge 1, "
          "a microwave 1, a sinkbasin 1, a countertop 1, and a garbagecan 1.\n"
          "Your task is to: put a clean lettuce in countertop 1.");
}

TEST_CASE("openable receptacles start closed; go-to reports accordingly") {
    World w = kitchen(R"({"type": "pick_and_place", "object_class": "mug",
                          "receptacle": "garbagecan 1", "phrasing": "A"})");
    CHECK(apply(w, "go to fridge 1").text == "The fridge 1 is closed.");
    CHECK(apply(w, "open fridge 1").text ==
          "You open the fridge 1. The fridge 1 is open. In it, you see a lettuce 1.");
    CHECK(apply(w, "go to fridge 1").text == "The fridge 1 is open. In it, you see a lettuce 1.");
    CHECK(apply(w, "go to countertop 1").text == "On the countertop 1, you see a mug 1.");
    CHECK(apply(w, "go to garbagecan 1").text == "On the garbagecan 1, you see nothing.");
}

TEST_CASE("open and close enforce presence, openability, and current state") {
    World w = kitchen(R"({"type": "pick_and_place", "object_class": "mug",
                          "receptacle": "garbagecan 1", "phrasing": "A"})");
    // Not at the fridge yet.
    CHECK(apply(w, "open fridge 1").text == "Nothing happens.");
    apply(w, "go to countertop 1");
    CHECK(apply(w, "open countertop 1").text == "Nothing happens.");  // not openable
    CHECK(apply(w, "close countertop 1").text == "Nothing happens.");
    apply(w, "go to fridge 1");
    CHECK(apply(w, "close fridge 1").text == "Nothing happens.");  // already closed
    apply(w, "open fridge 1");
    CHECK(apply(w, "open fridge 1").text == "Nothing happens.");  // already open
    CHECK(apply(w, "close fridge 1").text == "You close the fridge 1.");
    CHECK(apply(w, "open unknown 9").text == "Nothing happens.");
}

TEST_CASE("take requires presence, an open receptacle, the object, and a free hand") {
    World w = kitchen(R"({"type": "pick_and_place", "object_class": "lettuce",
                          "receptacle": "garbagecan 1", "phrasing": "A"})");
    CHECK(apply(w, "take lettuce 1 from fridge 1").text == "Nothing happens.");  // not there
    apply(w, "go to fridge 1");
    CHECK(apply(w, "take lettuce 1 from fridge 1").text == "Nothing happens.");  // closed
    apply(w, "open fridge 1");
    CHECK(apply(w, "take mug 1 from fridge 1").text == "Nothing happens.");  // wrong place
    CHECK(apply(w, "take lettuce 1 from fridge 1").text ==
          "You pick up the lettuce 1 from the fridge 1.");
    REQUIRE(w.inventory.has_value());
    CHECK(w.inventory->str() == "lettuce 1");
    apply(w, "go to countertop 1");
    CHECK(apply(w, "take mug 1 from countertop 1").text == "Nothing happens.");  // hand full
}

TEST_CASE("put requires presence and the held object but not an open receptacle") {
    World w = kitchen(R"({"type": "pick_and_place", "object_class": "mug",
                          "receptacle": "fridge 1", "phrasing": "A"})");
    apply(w, "go to countertop 1");
    CHECK(apply(w, "put mug 1 in/on countertop 1").text == "Nothing happens.");  // not held
    apply(w, "take mug 1 from countertop 1");
    CHECK(apply(w, "put lettuce 1 in/on countertop 1").text == "Nothing happens.");
    apply(w, "go to fridge 1");
    // The fridge is still closed; dropping something into it is allowed.
    auto obs = apply(w, "put mug 1 in/on fridge 1");
    CHECK(obs.text == "You put the mug 1 in/on the fridge 1.");
    CHECK(obs.reward == 1);
    CHECK_FALSE(w.inventory.has_value());
}

TEST_CASE("clean, heat, and cool require the matching capability and the held object") {
    World w = kitchen(R"({"type": "clean_and_place", "object_class": "lettuce",
                          "receptacle": "countertop 1", "phrasing": "A"})");
    apply(w, "go to fridge 1");
    apply(w, "open fridge 1");
    apply(w, "take lettuce 1 from fridge 1");
    CHECK(apply(w, "clean lettuce 1 with fridge 1").text == "Nothing happens.");  // cooler
    apply(w, "go to sinkbasin 1");
    CHECK(apply(w, "clean mug 1 with sinkbasin 1").text == "Nothing happens.");  // not held
    CHECK(apply(w, "heat lettuce 1 with sinkbasin 1").text == "Nothing happens.");
    CHECK(apply(w, "clean lettuce 1 with sinkbasin 1").text ==
          "You clean the lettuce 1 using the sinkbasin 1.");
    const ObjectId lettuce = *w.inventory;
    CHECK(w.objects.at(lettuce).is_clean);

    apply(w, "go to microwave 1");
    CHECK(apply(w, "heat lettuce 1 with microwave 1").text ==
          "You heat the lettuce 1 using the microwave 1.");
    CHECK(w.objects.at(lettuce).is_hot);
    apply(w, "go to fridge 1");
    CHECK(apply(w, "cool lettuce 1 with fridge 1").text ==
          "You cool the lettuce 1 using the fridge 1.");
    CHECK(w.objects.at(lettuce).is_cool);
    CHECK_FALSE(w.objects.at(lettuce).is_hot);  // cooling clears hot
    apply(w, "go to microwave 1");
    apply(w, "heat lettuce 1 with microwave 1");
    CHECK_FALSE(w.objects.at(lettuce).is_cool);  // and heating clears cool
}

TEST_CASE("heat-and-place rewards only a hot object inside the target") {
    World w = kitchen(R"({"type": "heat_and_place", "object_class": "lettuce",
                          "receptacle": "garbagecan 1", "phrasing": "A"})");
    apply(w, "go to fridge 1");
    apply(w, "open fridge 1");
    apply(w, "take lettuce 1 from fridge 1");
    apply(w, "go to garbagecan 1");
    CHECK(apply(w, "put lettuce 1 in/on garbagecan 1").reward == 0);  // cold lettuce
    apply(w, "take lettuce 1 from garbagecan 1");
    apply(w, "go to microwave 1");
    apply(w, "heat lettuce 1 with microwave 1");
    apply(w, "go to garbagecan 1");
    CHECK(apply(w, "put lettuce 1 in/on garbagecan 1").reward == 1);
}

TEST_CASE("examine-in-light latches only while holding the right object class") {
    World w = load_world_text(R"({
        "receptacles": [
            {"class": "desklamp", "id": 1},
            {"class": "shelf", "id": 1},
            {"class": "bed", "id": 1}
        ],
        "objects": [
            {"class": "book", "id": 1, "location": "shelf 1"},
            {"class": "pillow", "id": 1, "location": "bed 1"}
        ],
        "task": {"type": "examine_in_light", "object_class": "book",
                 "lamp_class": "desklamp", "phrasing": "A"}
    })");
    apply(w, "go to desklamp 1");
    CHECK(apply(w, "use desklamp 1").reward == 0);  // empty-handed
    CHECK_FALSE(w.examined_in_light);
    apply(w, "go to bed 1");
    apply(w, "take pillow 1 from bed 1");
    apply(w, "go to desklamp 1");
    CHECK(apply(w, "use desklamp 1").reward == 0);  // wrong class
    apply(w, "go to bed 1");
    apply(w, "put pillow 1 in/on bed 1");
    apply(w, "go to shelf 1");
    apply(w, "take book 1 from shelf 1");
    apply(w, "go to desklamp 1");
    auto obs = apply(w, "use desklamp 1");
    CHECK(obs.text == "You turn on the desklamp 1.");
    CHECK(obs.reward == 1);
    CHECK(w.examined_in_light);
}

TEST_CASE("use needs a lamp capability") {
    World w = kitchen(R"({"type": "pick_and_place", "object_class": "mug",
                          "receptacle": "garbagecan 1", "phrasing": "A"})");
    apply(w, "go to microwave 1");
    CHECK(apply(w, "use microwave 1").text == "Nothing happens.");
}

TEST_CASE("pick-two counts instances of the class inside the target") {
    World w = load_world_text(R"({
        "receptacles": [
            {"class": "sofa", "id": 1},
            {"class": "armchair", "id": 1}
        ],
        "objects": [
            {"class": "pillow", "id": 1, "location": "sofa 1"},
            {"class": "pillow", "id": 2, "location": "armchair 1"}
        ],
        "task": {"type": "pick_two_and_place", "object_class": "pillow",
                 "receptacle": "sofa 1", "phrasing": "B"}
    })");
    apply(w, "go to armchair 1");
    apply(w, "take pillow 2 from armchair 1");
    apply(w, "go to sofa 1");
    CHECK(apply(w, "put pillow 2 in/on sofa 1").reward == 1);
}

TEST_CASE("reward latches done and further steps throw") {
    World w = kitchen(R"({"type": "pick_and_place", "object_class": "mug",
                          "receptacle": "garbagecan 1", "phrasing": "A"})");
    apply(w, "go to countertop 1");
    apply(w, "take mug 1 from countertop 1");
    apply(w, "go to garbagecan 1");
    CHECK(apply(w, "put mug 1 in/on garbagecan 1").reward == 1);
    CHECK(w.done);
    CHECK_THROWS_AS(step(w, *parse_action("go to fridge 1")), std::logic_error);
}

TEST_CASE("failed preconditions leave the world bit-identical") {
    World w = kitchen(R"({"type": "pick_and_place", "object_class": "mug",
                          "receptacle": "garbagecan 1", "phrasing": "A"})");
    apply(w, "go to fridge 1");
    const World before = w;
    for (const std::string line :
         {"open countertop 1", "close fridge 1", "take lettuce 1 from fridge 1",
          "put mug 1 in/on fridge 1", "clean mug 1 with fridge 1", "heat mug 1 with fridge 1",
          "cool mug 1 with fridge 1", "use fridge 1", "go to nowhere 3"}) {
        auto obs = apply(w, line);
        CHECK(obs.text == "Nothing happens.");
        CHECK(obs.reward == 0);
        CHECK(w == before);
    }
}

TEST_CASE("the shipped observation catalog matches the compiled defaults") {
    CHECK(load_catalog(testutil::repo_path("data/observations.txt")) == default_catalog());
}

TEST_CASE("a custom catalog rewords observations") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "relooper-catalog.tmp").string();
    {
        std::ofstream out(path);
        out << "# terse wording\n";
        out << "room_intro = Room: {list}.\n";
        out << "task_line = Goal: {goal}.\n";
        out << "goto_closed = {recep}: closed.\n";
        out << "goto_open = {recep}: {list}.\n";
        out << "goto_surface = {recep}: {list}.\n";
        out << "open = opened {recep}: {list}.\n";
        out << "close = closed {recep}.\n";
        out << "take = took {obj} from {recep}.\n";
        out << "put = put {obj} into {recep}.\n";
        out << "clean = cleaned {obj}.\n";
        out << "heat = heated {obj}.\n";
        out << "cool = cooled {obj}.\n";
        out << "use = using {recep}.\n";
        out << "nothing = No effect.\n";
        out << "empty_list = nothing\n";
    }
    const ObservationCatalog cat = load_catalog(path);
    std::remove(path.c_str());

    World w = kitchen(R"({"type": "pick_and_place", "object_class": "mug",
                          "receptacle": "garbagecan 1", "phrasing": "A"})");
    CHECK(initial_observation(w, cat) ==
          "Room: a fridge 1, a microwave 1, a sinkbasin 1, a countertop 1, and a garbagecan 1.\n"
          "Goal: put a mug in garbagecan 1.");
    CHECK(step(w, *parse_action("go to fridge 1"), cat).text == "fridge 1: closed.");
    CHECK(step(w, *parse_action("use fridge 1"), cat).text == "No effect.");
}

TEST_CASE("catalog loader rejects unknown, malformed, and missing keys") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "relooper-badcat.tmp").string();
    auto write = [&](const std::string& text) {
        std::ofstream out(path);
        out << text;
    };
    write("room_intro Room\n");
    CHECK_THROWS_AS(load_catalog(path), CatalogError);
    write("sideways = {list}\n");
    CHECK_THROWS_AS(load_catalog(path), CatalogError);
    write("room_intro = {list}\n");  // everything else missing
    CHECK_THROWS_AS(load_catalog(path), CatalogError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_catalog(path), CatalogError);  // no such file
}

TEST_CASE("world loader reports schema violations with field context") {
    auto loads = [](const std::string& text) { return load_world_text(text); };
    CHECK_THROWS_WITH(loads("[]"), Catch::Matchers::ContainsSubstring("top level"));
    CHECK_THROWS_WITH(loads(R"({"receptacles": [], "objects": [], "task": {}})"),
                      Catch::Matchers::ContainsSubstring("receptacles"));
    const std::string base_recep = R"("receptacles": [{"class": "shelf", "id": 1}])";
    CHECK_THROWS_WITH(
        loads("{" + base_recep + R"(, "objects": [{"class": "mug", "id": 1, "location": "shelf 9"}],
              "task": {"type": "pick_and_place", "object_class": "mug", "receptacle": "shelf 1", "phrasing": "A"}})"),
        Catch::Matchers::ContainsSubstring("not declared"));
    CHECK_THROWS_WITH(
        loads("{" + base_recep + R"(, "objects": [{"class": "mug", "id": 1, "location": "shelf 1"}],
              "task": {"type": "sing_and_dance", "object_class": "mug", "receptacle": "shelf 1", "phrasing": "A"}})"),
        Catch::Matchers::ContainsSubstring("task type"));
    CHECK_THROWS_WITH(
        loads("{" + base_recep + R"(, "objects": [{"class": "mug", "id": 1, "location": "shelf 1"}],
              "task": {"type": "pick_and_place", "object_class": "mug", "receptacle": "shelf 1", "phrasing": "C"}})"),
        Catch::Matchers::ContainsSubstring("phrasing"));
    CHECK_THROWS_WITH(
        loads("{" + base_recep + R"(, "objects": [{"class": "mug", "id": 1, "location": "shelf 1"}],
              "task": {"type": "pick_and_place", "object_class": "pan", "receptacle": "shelf 1", "phrasing": "A"}})"),
        Catch::Matchers::ContainsSubstring("object_class"));
    CHECK_THROWS_WITH(
        loads("{" + base_recep + R"(, "objects": [{"class": "mug", "id": 1, "location": "shelf 1"}],
              "task": {"type": "pick_and_place", "object_class": "mug", "receptacle": "drawer 1", "phrasing": "A"}})"),
        Catch::Matchers::ContainsSubstring("no receptacle matches"));
    CHECK_THROWS_WITH(
        loads("{" + base_recep + R"(, "objects": [
                  {"class": "mug", "id": 1, "location": "shelf 1"},
                  {"class": "mug", "id": 1, "location": "shelf 1"}],
              "task": {"type": "pick_and_place", "object_class": "mug", "receptacle": "shelf 1", "phrasing": "A"}})"),
        Catch::Matchers::ContainsSubstring("duplicate object"));
    CHECK_THROWS_WITH(
        loads(R"({"receptacles": [{"class": "shelf", "id": 1}, {"class": "shelf", "id": 1}],
               "objects": [], "task": {}})"),
        Catch::Matchers::ContainsSubstring("duplicate receptacle"));
    CHECK_THROWS_WITH(
        loads("{" + base_recep + R"(, "objects": [
                  {"class": "mug", "id": 1, "location": "shelf 1", "hot": true, "cool": true}],
              "task": {"type": "pick_and_place", "object_class": "mug", "receptacle": "shelf 1", "phrasing": "A"}})"),
        Catch::Matchers::ContainsSubstring("both hot and cool"));
    CHECK_THROWS_AS(load_world_file(testutil::repo_path("data/worlds/no-such-world.json")),
                    WorldFileError);
}

TEST_CASE("world loader applies class defaults and explicit overrides") {
    World w = load_world_text(R"({
        "receptacles": [
            {"class": "cabinet", "id": 1},
            {"class": "box", "id": 1, "openable": true},
            {"class": "stand", "id": 1, "capability": "lamp"},
            {"class": "basin", "id": 1, "capability": "cleaner"},
            {"class": "desklamp", "id": 1}
        ],
        "objects": [{"class": "mug", "id": 1, "location": "cabinet 1", "clean": true}],
        "task": {"type": "pick_and_place", "object_class": "mug", "receptacle": "box 1", "phrasing": "A"}
    })");
    REQUIRE(w.receptacles.size() == 5);
    CHECK(w.receptacles[0].openable);        // cabinets default to openable
    CHECK_FALSE(w.receptacles[0].is_open);   // and therefore start closed
    CHECK(w.receptacles[1].openable);        // explicit override on a novel class
    CHECK_FALSE(w.receptacles[1].is_open);
    CHECK(w.receptacles[2].capability == Capability::kLamp);
    CHECK(w.receptacles[3].capability == Capability::kCleaner);
    CHECK(w.receptacles[4].capability == Capability::kLamp);  // desklamp default
    CHECK_FALSE(w.receptacles[4].openable);
    CHECK(w.objects.at(*parse_object_id("mug 1")).is_clean);
}
