#include "mbench/reflection.hpp"

#include <algorithm>

#include "json.hpp"

namespace mbench {

using nlohmann::json;

void LongTermMemory::add(ReflectionEntry entry)
{
    entry.order = next_order_++;
    entries_.push_back(std::move(entry));
    while (capacity_ > 0 && static_cast<int>(entries_.size()) > capacity_)
        entries_.pop_front();
}

std::string LongTermMemory::render() const
{
    if (entries_.empty())
        return "";
    std::string out = "Reflection memory (most recent first):\n";
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        const ReflectionEntry& e = *it;
        out += "[" + std::to_string(e.order + 1) + "] Task: " + e.goal + "\n";
        out += "Outcome: " + std::string(e.success ? "success" : "failure") + "\n";
        out += "Achieved substeps: " + std::to_string(e.achieved_substeps) + "/"
               + std::to_string(e.total_substeps) + "\n";
        if (!e.actions.empty()) {
            out += "Actions:";
            for (const auto& a : e.actions)
                out += " " + a + ";";
            out += "\n";
        }
        if (!e.suggestions.empty()) {
            out += "Suggested next actions:";
            for (const auto& s : e.suggestions)
                out += " " + s + ";";
            out += "\n";
        }
    }
    return out;
}

std::string LongTermMemory::to_json() const
{
    json j;
    j["capacity"] = capacity_;
    j["next_order"] = next_order_;
    json entries = json::array();
    for (const ReflectionEntry& e : entries_) {
        entries.push_back({{"task_id", e.task_id},
                           {"goal", e.goal},
                           {"actions", e.actions},
                           {"success", e.success},
                           {"achieved_substeps", e.achieved_substeps},
                           {"total_substeps", e.total_substeps},
                           {"completed_through", e.completed_through},
                           {"suggestions", e.suggestions},
                           {"order", e.order}});
    }
    j["entries"] = entries;
    return j.dump();
}

LongTermMemory LongTermMemory::from_json(const std::string& text)
{
    json j = json::parse(text);
    LongTermMemory memory(j.value("capacity", kMemoryCapacity));
    for (const auto& je : j.at("entries")) {
        ReflectionEntry e;
        e.task_id = je.at("task_id").get<std::string>();
        e.goal = je.at("goal").get<std::string>();
        e.actions = je.at("actions").get<std::vector<std::string>>();
        e.success = je.at("success").get<bool>();
        e.achieved_substeps = je.at("achieved_substeps").get<int>();
        e.total_substeps = je.at("total_substeps").get<int>();
        e.completed_through = je.at("completed_through").get<int>();
        e.suggestions = je.at("suggestions").get<std::vector<std::string>>();
        e.order = je.at("order").get<int>();
        memory.entries_.push_back(std::move(e));
    }
    memory.next_order_ = j.value("next_order", static_cast<int>(memory.entries_.size()));
    return memory;
}

int best_achieved(const LongTermMemory& memory)
{
    int best = -1;
    for (const ReflectionEntry& e : memory.entries())
        best = std::max(best, e.achieved_substeps);
    return best;
}

ReflectionEntry summarize_episode(const TaskSpec& task, const SceneGraph& graph,
                                  const EpisodeScore& score, const std::vector<TraceStep>& trace,
                                  uint64_t seed)
{
    ReflectionEntry entry;
    entry.task_id = task.task_id;
    entry.goal = task.instruction;
    for (const TraceStep& t : trace)
        entry.actions.push_back(t.action_raw);
    entry.success = score.success;
    size_t n = task.steps.size();
    entry.total_substeps = 4 * static_cast<int>(std::max<size_t>(n, 1));
    for (const SubstepFlags& f : score.per_step)
        entry.achieved_substeps += f.achieved();

    // Trace index through which the achieved substeps were completed: rerun
    // the same stage machine the scorer uses and remember the last advance.
    std::vector<std::string> sources(n);
    for (size_t i = 0; i < n; ++i)
        sources[i] = graph.platform_of(task.steps[i].object_id);
    std::vector<int> stage(n, 0);
    bool first_placed = false;
    int last_advance = 0;
    for (const TraceStep& t : trace) {
        if (n > 0 && t.placed_object == task.steps[0].object_id)
            first_placed = true;
        for (size_t i = 0; i < n; ++i) {
            if (i > 0 && !first_placed)
                continue;
            const AtomicAction& a = task.steps[i];
            int before = stage[i];
            if (stage[i] == 0 && t.location == sources[i])
                stage[i] = 1;
            if (stage[i] == 1 && t.picked_object == a.object_id)
                stage[i] = 2;
            if (stage[i] == 2 && t.location == a.goal.platform_id && t.held == a.object_id)
                stage[i] = 3;
            if (stage[i] == 3 && i < score.per_step.size() && score.per_step[i].placed
                && t.placed_object == a.object_id)
                stage[i] = 4;
            if (stage[i] != before)
                last_advance = t.step;
        }
    }
    entry.completed_through = last_advance;

    if (!entry.success && n > 0) {
        int first_unachieved = -1;
        for (size_t i = 0; i < score.per_step.size(); ++i) {
            if (score.per_step[i].achieved() < 4) {
                first_unachieved = 4 * static_cast<int>(i) + score.per_step[i].achieved();
                break;
            }
        }
        if (first_unachieved >= 0) {
            try {
                OraclePlan plan = oracle_plan(task, graph, seed);
                int final_substep = 4 * static_cast<int>(n);
                for (size_t j = 0; j < plan.actions.size(); ++j)
                    if (plan.substeps[j] >= first_unachieved && plan.substeps[j] < final_substep)
                        entry.suggestions.push_back(plan.actions[j]);
            } catch (const EnvError&) {
                // Unsolvable at summary time (task not from this generator);
                // fall back to the first navigation move.
                if (!sources[0].empty())
                    entry.suggestions.push_back("go_to_" + sources[0]);
            }
        }
        if (entry.suggestions.empty() && !sources[0].empty())
            entry.suggestions.push_back("go_to_" + sources[0]);
    }
    return entry;
}

namespace {

BenchmarkSnapshot snapshot_tests(const std::vector<TaskSpec>& tasks, const SceneGraph& graph,
                                 const AgentFactory& factory, const LongTermMemory& memory,
                                 uint64_t seed)
{
    BenchmarkSnapshot snap;
    snap.episodes = static_cast<int>(tasks.size());
    if (tasks.empty())
        return snap;
    double ip = 0.0;
    int successes = 0;
    for (size_t i = 0; i < tasks.size(); ++i) {
        auto agent = factory(memory, graph);
        EpisodeResult r = run_episode(tasks[i], graph, *agent, seed ^ static_cast<uint64_t>(i));
        ip += r.score.ip;
        successes += r.score.success ? 1 : 0;
    }
    snap.mean_ip = ip / tasks.size();
    snap.sr_percent = 100.0 * successes / tasks.size();
    return snap;
}

}  // namespace

ReflectionOutcome run_reflection_loop(const std::vector<TaskSpec>& train_tasks,
                                      const SceneGraph& train_graph,
                                      const std::vector<TaskSpec>& test_tasks,
                                      const SceneGraph& test_graph, const AgentFactory& factory,
                                      int trials, uint64_t seed, LongTermMemory memory)
{
    if (trials > 0 && train_tasks.empty())
        throw EnvError("reflection: trials requested but no train tasks given");

    ReflectionOutcome outcome;
    outcome.before = snapshot_tests(test_tasks, test_graph, factory, memory, seed);
    for (int t = 0; t < trials; ++t) {
        const TaskSpec& task = train_tasks[t % train_tasks.size()];
        auto agent = factory(memory, train_graph);
        EpisodeResult r = run_episode(task, train_graph, *agent,
                                      seed ^ (0x9e3779b97f4a7c15ull + static_cast<uint64_t>(t)));
        memory.add(summarize_episode(task, train_graph, r.score, r.trace, seed));
    }
    outcome.after = snapshot_tests(test_tasks, test_graph, factory, memory, seed);
    outcome.memory = std::move(memory);
    return outcome;
}

}  // namespace mbench
