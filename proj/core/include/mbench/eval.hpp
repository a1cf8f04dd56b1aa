#pragma once

#include <string>
#include <vector>

#include "mbench/env.hpp"
#include "mbench/taskgen.hpp"

// Episode scoring: success (SR) and intermediate progress (IP) computed by
// replaying the trace deltas against the initial scene graph.

namespace mbench {

// One atomic action contributes four sequential substeps, 25 points each:
// reached the source platform, picked the object, reached the goal platform
// while holding it, and placed it so the goal predicate holds.
struct SubstepFlags {
    bool reached_source = false;
    bool picked = false;
    bool reached_goal = false;
    bool placed = false;

    int achieved() const
    {
        if (!reached_source)
            return 0;
        if (!picked)
            return 1;
        if (!reached_goal)
            return 2;
        return placed ? 4 : 3;
    }
};

struct StepJudgement {
    bool satisfied = false;
    std::string reason;  // empty when satisfied
};

// Judges one atomic action against the current graph state. Direction
// mismatches report the direction actually found (largest footprint overlap).
StepJudgement judge_step(const SceneGraph& graph, const AtomicAction& step);

struct EpisodeScore {
    bool success = false;
    double ip = 0.0;  // 0..100
    int steps = 0;
    std::string reason;  // "ok" on success, first failure otherwise
    std::vector<SubstepFlags> per_step;
};

EpisodeScore evaluate_episode(const TaskSpec& task, const SceneGraph& initial,
                              const std::vector<TraceStep>& trace);

// Convenience overload for a finished episode.
EpisodeScore evaluate_episode(const EpisodeState& state);

// ---- Aggregation ----

struct EpisodeRecord {
    std::string task_id;
    int level = 1;
    bool success = false;
    double ip = 0.0;
    int steps = 0;
    std::string reason;
};

struct LevelSummary {
    int level = 1;
    int episodes = 0;
    double mean_ip = 0.0;
    double sr_percent = 0.0;
};

std::vector<LevelSummary> aggregate(const std::vector<EpisodeRecord>& records);

// CSV renderers; headers "level,episodes,mean_ip,sr_percent" and
// "task_id,level,success,ip,steps,reason".
std::string summary_csv(const std::vector<LevelSummary>& summaries);
std::string episodes_csv(const std::vector<EpisodeRecord>& records);

}  // namespace mbench
