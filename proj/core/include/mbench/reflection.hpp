#pragma once

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "mbench/runner.hpp"

// Rule-based self-reflection: episode summaries, the long-term memory they
// accumulate in, and the trial/test improvement loop.

namespace mbench {

inline constexpr int kMemoryCapacity = 10;

struct ReflectionEntry {
    std::string task_id;
    std::string goal;                  // instruction text
    std::vector<std::string> actions;  // compact action history
    bool success = false;
    int achieved_substeps = 0;
    int total_substeps = 4;
    int completed_through = 0;  // 1-based trace index of the last substep advance
    std::vector<std::string> suggestions;  // oracle remainder; empty iff success
    int order = 0;                         // creation order, assigned by the memory
};

class LongTermMemory {
public:
    explicit LongTermMemory(int capacity = kMemoryCapacity) : capacity_(capacity) {}

    void add(ReflectionEntry entry);
    const std::deque<ReflectionEntry>& entries() const { return entries_; }
    int capacity() const { return capacity_; }

    // Context rendering, most recent entry first.
    std::string render() const;

    std::string to_json() const;
    static LongTermMemory from_json(const std::string& text);

private:
    int capacity_;
    std::deque<ReflectionEntry> entries_;
    int next_order_ = 0;
};

// Highest achieved-substep count across all entries; -1 on empty memory.
int best_achieved(const LongTermMemory& memory);

ReflectionEntry summarize_episode(const TaskSpec& task, const SceneGraph& graph,
                                  const EpisodeScore& score, const std::vector<TraceStep>& trace,
                                  uint64_t seed = 0);

struct BenchmarkSnapshot {
    int episodes = 0;
    double mean_ip = 0.0;
    double sr_percent = 0.0;
};

// Builds a fresh agent for each episode from the current memory and the graph
// that episode plays on (train and test may be different scenes).
using AgentFactory =
    std::function<std::unique_ptr<Agent>(const LongTermMemory&, const SceneGraph&)>;

struct ReflectionOutcome {
    BenchmarkSnapshot before;
    BenchmarkSnapshot after;
    LongTermMemory memory;
};

// Evaluates the test tasks, runs `trials` sequential train episodes (cycling
// over train_tasks) appending a summary after each, then evaluates the test
// tasks again with the grown memory.
ReflectionOutcome run_reflection_loop(const std::vector<TaskSpec>& train_tasks,
                                      const SceneGraph& train_graph,
                                      const std::vector<TaskSpec>& test_tasks,
                                      const SceneGraph& test_graph, const AgentFactory& factory,
                                      int trials, uint64_t seed,
                                      LongTermMemory memory = LongTermMemory{});

}  // namespace mbench
