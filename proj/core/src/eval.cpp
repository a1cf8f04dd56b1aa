#include "mbench/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbench {

namespace {

// Grid cell holding a direction: front row 1-3, middle 4-6, rear 7-9.
int cell_index_for(Direction d)
{
    switch (d) {
    case Direction::FrontLeft: return 1;
    case Direction::Front: return 2;
    case Direction::FrontRight: return 3;
    case Direction::Left: return 4;
    case Direction::Right: return 6;
    case Direction::RearLeft: return 7;
    case Direction::Rear: return 8;
    case Direction::RearRight: return 9;
    }
    return 5;
}

std::string cell_label(int index)
{
    for (int i = 1; i <= 8; ++i) {
        Direction d = static_cast<Direction>(i);
        if (cell_index_for(d) == index)
            return direction_label(d);
    }
    return "center";
}

std::string wrong_direction(const std::string& expected, const std::string& found)
{
    return "Target object placed in wrong direction, expected: " + expected
           + ", found: " + found;
}

}  // namespace

StepJudgement judge_step(const SceneGraph& graph, const AtomicAction& step)
{
    const PlacementGoal& goal = step.goal;
    if (graph.platform_of(step.object_id) != goal.platform_id)
        return {false, "Target object was not moved to the goal platform."};
    if (goal_satisfied(graph, step.object_id, goal))
        return {true, ""};

    const SceneObject* obj = graph.find_object(step.object_id);
    auto heading = canonical_heading(graph, goal.platform_id);
    switch (goal.strategy) {
    case Strategy::ToPlatform:
        return {false, "Target object was not moved to the goal platform."};
    case Strategy::ToPlatformDir: {
        std::string found = "none";
        if (heading) {
            const Platform* p = graph.find_platform(goal.platform_id);
            Vec2 c = obj->footprint().center();
            for (int i = 1; i <= 9; ++i) {
                if (grid_cell_rect(p->rect, *heading, i).contains_point(c)) {
                    found = cell_label(i);
                    break;
                }
            }
        }
        return {false, wrong_direction(direction_label(*goal.direction), found)};
    }
    case Strategy::AroundObject:
        return {false, "Target object not placed around the anchor object."};
    case Strategy::DirOfObject: {
        std::string found = "none";
        PlatformView view = make_platform_view(graph, goal.platform_id, {step.object_id});
        if (!view.footprint_of(goal.anchors[0]))
            return {false, "Anchor object is no longer on the goal platform."};
        if (heading) {
            double best = 0.0;
            for (const Receptacle& r :
                 compute_initial_receptacles(view, goal.anchors[0], *heading)) {
                double a = overlap_area(r.rect, obj->footprint());
                if (a > best) {
                    best = a;
                    found = direction_label(r.direction);
                }
            }
        }
        return {false, wrong_direction(direction_label(*goal.direction), found)};
    }
    case Strategy::BetweenObjects:
        return {false, "Target object not placed between the anchor objects."};
    }
    return {false, "Goal not satisfied."};
}

EpisodeScore evaluate_episode(const TaskSpec& task, const SceneGraph& initial,
                              const std::vector<TraceStep>& trace)
{
    EpisodeScore score;
    score.steps = static_cast<int>(trace.size());
    size_t n = task.steps.size();
    score.per_step.assign(n, SubstepFlags{});
    if (n == 0)
        return score;

    std::vector<std::string> sources(n);
    for (size_t i = 0; i < n; ++i)
        sources[i] = initial.platform_of(task.steps[i].object_id);

    // Replay the trace deltas; the second atomic action only starts earning
    // substeps once the first object has been placed, and the first action's
    // placement must hold both when the second object is first picked and at
    // the end of the episode.
    SceneGraph graph = initial;
    std::vector<int> stage(n, 0);
    bool first_placed = false;
    std::optional<SceneGraph> checkpoint;  // state at the second action's first pick
    for (const TraceStep& t : trace) {
        if (!t.picked_object.empty())
            graph.detach(t.picked_object);
        if (!t.placed_object.empty())
            graph.relocate(t.placed_object, t.placed_platform, *t.placed_rect);
        if (t.placed_object == task.steps[0].object_id)
            first_placed = true;
        for (size_t i = 0; i < n; ++i) {
            if (i > 0 && !first_placed)
                continue;
            const AtomicAction& a = task.steps[i];
            if (stage[i] == 0 && t.location == sources[i])
                stage[i] = 1;
            if (stage[i] == 1 && t.picked_object == a.object_id)
                stage[i] = 2;
            if (stage[i] == 2 && t.location == a.goal.platform_id && t.held == a.object_id)
                stage[i] = 3;
        }
        if (n > 1 && !checkpoint && !trace.empty()
            && stage[1] >= 2 /* second object picked just now or earlier */)
            if (!checkpoint)
                checkpoint = graph;
    }

    std::vector<StepJudgement> judged(n);
    for (size_t i = 0; i < n; ++i) {
        SubstepFlags& f = score.per_step[i];
        f.reached_source = stage[i] >= 1;
        f.picked = stage[i] >= 2;
        f.reached_goal = stage[i] >= 3;
        judged[i] = judge_step(graph, task.steps[i]);
        bool placed = stage[i] >= 3 && judged[i].satisfied;
        if (i == 0 && n > 1 && checkpoint)
            placed = placed && judge_step(*checkpoint, task.steps[0]).satisfied;
        f.placed = placed;
    }

    double total = 0.0;
    for (const SubstepFlags& f : score.per_step)
        total += f.achieved() * 25.0;
    score.ip = total / static_cast<double>(n);
    score.success = score.ip >= 100.0 - kGeomEps;
    if (score.success) {
        score.reason = "ok";
    } else {
        for (size_t i = 0; i < n; ++i) {
            const SubstepFlags& f = score.per_step[i];
            if (!f.reached_source) {
                score.reason = "Never reached the object's platform.";
            } else if (!f.picked) {
                score.reason = "Never picked the target object.";
            } else if (!f.reached_goal) {
                score.reason = "Never reached the goal platform with the object.";
            } else if (!f.placed) {
                score.reason = judged[i].satisfied
                                   ? "Placement did not hold through the episode."
                                   : judged[i].reason;
            } else {
                continue;
            }
            break;
        }
    }
    return score;
}

EpisodeScore evaluate_episode(const EpisodeState& state)
{
    return evaluate_episode(state.task, state.initial, state.trace);
}

std::vector<LevelSummary> aggregate(const std::vector<EpisodeRecord>& records)
{
    std::map<int, LevelSummary> by_level;
    for (const EpisodeRecord& r : records) {
        LevelSummary& s = by_level[r.level];
        s.level = r.level;
        s.episodes += 1;
        s.mean_ip += r.ip;
        s.sr_percent += r.success ? 1.0 : 0.0;
    }
    std::vector<LevelSummary> out;
    for (auto& [level, s] : by_level) {
        s.mean_ip /= s.episodes;
        s.sr_percent = 100.0 * s.sr_percent / s.episodes;
        out.push_back(s);
    }
    return out;
}

namespace {

std::string fmt2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string summary_csv(const std::vector<LevelSummary>& summaries)
{
    std::ostringstream out;
    out << "level,episodes,mean_ip,sr_percent\n";
    for (const LevelSummary& s : summaries)
        out << s.level << "," << s.episodes << "," << fmt2(s.mean_ip) << ","
            << fmt2(s.sr_percent) << "\n";
    return out.str();
}

std::string episodes_csv(const std::vector<EpisodeRecord>& records)
{
    std::ostringstream out;
    out << "task_id,level,success,ip,steps,reason\n";
    for (const EpisodeRecord& r : records)
        out << r.task_id << "," << r.level << "," << (r.success ? "true" : "false") << ","
            << fmt2(r.ip) << "," << r.steps << ",\"" << r.reason << "\"\n";
    return out.str();
}

}  // namespace mbench
