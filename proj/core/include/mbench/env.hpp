#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "mbench/receptacle.hpp"
#include "mbench/scene.hpp"
#include "mbench/taskgen.hpp"

// The discrete episode state machine: action grammar, observation rendering
// and state transitions.

namespace mbench {

inline constexpr int kStepLimitSingle = 20;  // levels 1 and 2
inline constexpr int kStepLimitDouble = 40;  // level 3

struct EnvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnreachableTask : EnvError {
    using EnvError::EnvError;
};

// ---- Action grammar ----

struct GoTo {
    std::string platform_id;
};
struct ChangeView {};
struct Pick {
    int index = 0;
};
struct ShowReceptacle {
    int index = 0;
};
struct PlaceR {};
struct PlaceS {
    std::vector<std::pair<int, int>> pairs;  // (object index, direction index)
    std::vector<int> cells;                  // grid indices, empty platforms
};
struct CallEnd {};

using ActionCommand = std::variant<GoTo, ChangeView, Pick, ShowReceptacle, PlaceR, PlaceS, CallEnd>;

// Returns nothing when the text is unrecognized after normalization. Tolerant
// mode additionally accepts trace-attested deviations (`pick_15_...`, plural
// `show_receptacles`, missing `object_`).
std::optional<ActionCommand> parse_action(const std::string& text, bool strict = false);

// ---- Episode state ----

struct TraceStep {
    int step = 0;
    std::string action_raw;
    std::string action_kind;  // "go_to", "pick", ... or "invalid"
    std::string notice;
    std::string location;  // platform id or "start"
    std::string held;
    bool rejected = false;         // grammar/index misuse (not fit failures)
    bool fallback_place = false;   // PlaceS fell back to anywhere-in-union
    // State deltas for replay: either a pick or a placement.
    std::string picked_object;
    std::string placed_object;
    std::string placed_platform;
    std::optional<Rect> placed_rect;  // final footprint (margin removed)
};

struct EpisodeState {
    TaskSpec task;
    SceneGraph graph;    // mutated as the episode progresses
    SceneGraph initial;  // snapshot for judging
    uint64_t seed = 0;
    bool strict = false;

    std::string location_ground;   // ground object id; empty = start position
    int walk_index = 0;            // index into walkable list of location_ground
    std::string current_platform;  // platform id; empty = start
    std::string held;

    std::map<int, std::string> index_map;  // object index -> object id
    std::map<int, std::vector<Receptacle>> shown;

    int steps_used = 0;
    int step_limit = kStepLimitSingle;
    bool terminated = false;
    std::mt19937_64 rng;
    std::vector<TraceStep> trace;
    std::string pending_notice;
};

struct Observation {
    std::string text;
    std::vector<std::string> actions;  // advertised action strings
};

enum class StepStatus { Running, Ended };

std::pair<EpisodeState, Observation> reset(const TaskSpec& task, const SceneGraph& graph,
                                           uint64_t seed, bool strict = false);

std::pair<Observation, StepStatus> step(EpisodeState& state, const std::string& action_text);

Observation render_observation(const EpisodeState& state);

// Current robot heading (facing of the active walkable space); nothing at start.
std::optional<Heading> current_heading(const EpisodeState& state);

struct PairOption {
    int object_index = 0;
    int dir_index = 0;
    Receptacle receptacle;
};

// Placement inventory at the current platform under the current heading.
std::vector<PairOption> available_pairs(const EpisodeState& state);
std::vector<GridCell> available_cells(const EpisodeState& state);

// Robot stand point (used for nearest-walkable-space selection).
Vec2 robot_position(const EpisodeState& state);

}  // namespace mbench
