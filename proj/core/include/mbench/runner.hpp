#pragma once

#include <string>
#include <vector>

#include "mbench/agents.hpp"
#include "mbench/eval.hpp"

// Episode driver and batch runner: plays tasks against an agent, scores them
// and renders the JSONL episode logs with provenance.

namespace mbench {

inline constexpr const char* kToolVersion = "0.3.0";

struct EpisodeResult {
    TaskSpec task;
    EpisodeScore score;
    std::vector<TraceStep> trace;
};

EpisodeResult run_episode(const TaskSpec& task, const SceneGraph& graph, Agent& agent,
                          uint64_t seed, bool strict = false);

struct BatchOptions {
    bool strict = false;
    int parallel = 1;
    std::string system_prompt;
};

// Runs every task with a fresh agent built from `config`; the per-episode seed
// is config.seed XOR the task index, so results do not depend on scheduling.
// Results come back in task order.
std::vector<EpisodeResult> run_batch(const std::vector<TaskSpec>& tasks, const SceneGraph& graph,
                                     const AgentConfig& config, const BatchOptions& options);

// FNV-1a 64-bit hex digest; used to stamp outputs with the source scene.
std::string fnv1a_hex(const std::string& data);

struct RunMeta {
    std::string version = kToolVersion;
    uint64_t seed = 0;
    std::string scene_digest;
};

// First line of every output artifact: {"meta": {...}}.
std::string meta_line(const RunMeta& meta);

// Per-step records plus a terminal result record, one JSON object per line.
std::string episode_log_jsonl(const EpisodeResult& result);
std::string batch_log_jsonl(const std::vector<EpisodeResult>& results, const RunMeta& meta);

std::vector<EpisodeRecord> to_records(const std::vector<EpisodeResult>& results);

// Absolute path of a file shipped in the source tree's data/ directory.
std::string bundled_data_path(const std::string& name);

}  // namespace mbench
