#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mbench/receptacle.hpp"
#include "mbench/scene.hpp"

// Atomic-action derivation and task generation: process-based levels 1-3 and
// template/voting based level 4.

namespace mbench {

enum class Strategy {
    ToPlatform,
    ToPlatformDir,
    AroundObject,
    DirOfObject,
    BetweenObjects,
};

std::string strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(const std::string& name);

struct PlacementGoal {
    Strategy strategy = Strategy::ToPlatform;
    std::string platform_id;  // destination platform (always set)
    std::optional<Direction> direction;
    std::vector<std::string> anchors;  // 1 for Around/Dir, 2 for Between
};

struct AtomicAction {
    std::string object_id;
    PlacementGoal goal;
};

struct TaskSpec {
    std::string task_id;
    int level = 1;
    std::string instruction;
    std::vector<AtomicAction> steps;  // empty for level 4
    std::string connector;            // "THEN"/"AND"/"OR" for level 3
    std::string template_id;          // level 4
    std::map<std::string, std::string> bindings;  // level 4
    std::string ambiguity_brief;      // level 2
};

struct TaskGenError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnboundPlaceholder : TaskGenError {
    using TaskGenError::TaskGenError;
};

// How generation may merge receptacles when testing ToPlatform feasibility.
inline constexpr int kGenerationMergeLimit = 4;

// The free-space rects, touch constraints and center constraint that define a
// goal's placement region, under the destination platform's canonical heading.
// `exclude` is removed from the platform occupancy first (it is the object
// being moved, or a placed object at judge time).
struct GoalRegions {
    std::vector<Rect> region_rects;
    std::vector<Rect> must_touch;
    std::optional<Rect> center_in;
};
std::optional<GoalRegions> goal_regions(const SceneGraph& graph, const PlacementGoal& goal,
                                        const std::string& exclude);

// Deterministic fit for the object under the goal's constraints, or nothing.
// For ToPlatform, enforce_merge_limit additionally requires the chosen
// placement to be coverable by at most kGenerationMergeLimit receptacles.
std::optional<Placement> feasible_placement(const SceneGraph& graph, const std::string& object_id,
                                            const PlacementGoal& goal,
                                            bool enforce_merge_limit = false);

// True when the goal is already satisfied by the object's current pose.
bool goal_satisfied(const SceneGraph& graph, const std::string& object_id,
                    const PlacementGoal& goal);

// Objects eligible for relocation: reachable surface objects that carry
// nothing on their own platforms.
std::vector<std::string> movable_objects(const SceneGraph& graph);

std::vector<AtomicAction> derive_atomic_actions(const SceneGraph& graph);

struct TaskSet {
    std::vector<TaskSpec> tasks;
    bool insufficient = false;  // requested count exceeded the feasible set
};

TaskSet sample_process_tasks(const SceneGraph& graph, int count, int max_steps,
                             const std::vector<std::string>& connectors, uint64_t seed);

int classify_level(const TaskSpec& task, const SceneGraph& graph);

std::string render_instruction(const TaskSpec& task, const SceneGraph& graph);

// ---- Level 4: outcome templates and feasibility voting ----

struct OutcomeTemplate {
    std::string id;
    std::string text;
};

std::vector<OutcomeTemplate> load_templates(const std::string& json_text);

TaskSet instantiate_outcome_templates(const std::vector<OutcomeTemplate>& templates,
                                      const SceneGraph& graph, uint64_t seed, int count);

enum class Verdict { Feasible, PartiallyFeasible, NotFeasible };

std::optional<Verdict> parse_verdict(const std::string& reply);

// A judge returns raw reply text, or nothing on timeout.
class Judge {
public:
    virtual ~Judge() = default;
    virtual std::optional<std::string> assess(const std::string& prompt) = 0;
};

// Offline judge: feasible iff the bound platform exists, has a movable object
// and keeps at least 30% of its area free.
class HeuristicJudge : public Judge {
public:
    explicit HeuristicJudge(const SceneGraph& graph) : graph_(graph) {}
    std::optional<std::string> assess(const std::string& prompt) override;

private:
    const SceneGraph& graph_;
};

struct VoteResult {
    bool accepted = false;
    std::vector<Verdict> votes;
};

std::string assessment_prompt(const TaskSpec& candidate, const SceneGraph& graph);

VoteResult vote_feasibility(const TaskSpec& candidate, const SceneGraph& graph,
                            const std::array<Judge*, 3>& judges);

// ---- Serialization ----

std::string task_to_jsonl(const TaskSpec& task);
TaskSpec task_from_jsonl(const std::string& line);

}  // namespace mbench
