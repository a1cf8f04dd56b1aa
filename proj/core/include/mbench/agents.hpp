#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mbench/env.hpp"

// Episode-playing agents: seeded random baseline, the plan-ahead oracle, a
// scripted partial-oracle used by the reflection loop, and a chat-completions
// client for external models.

namespace mbench {

class Agent {
public:
    virtual ~Agent() = default;
    virtual void begin_episode(const TaskSpec& task) { (void)task; }
    virtual std::string act(const Observation& obs) = 0;
};

// ---- Oracle planning ----

// A full action script for a task, built by simulating a shadow episode.
// substeps[i] is the 0-based substep the action contributes to (4 per atomic
// action: reach source, pick, reach goal, place; the final CALL_END carries
// the last substep index + 1).
struct OraclePlan {
    std::vector<std::string> actions;
    std::vector<int> substeps;
};

// Throws EnvError when no in-environment solution is found (a generated task
// always has one).
OraclePlan oracle_plan(const TaskSpec& task, const SceneGraph& graph, uint64_t seed = 0);

// ---- Agents ----

class RandomAgent : public Agent {
public:
    explicit RandomAgent(uint64_t seed) : rng_(seed) {}
    std::string act(const Observation& obs) override;

private:
    std::mt19937_64 rng_;
};

class OracleAgent : public Agent {
public:
    OracleAgent(const SceneGraph& graph, uint64_t seed) : graph_(graph), seed_(seed) {}
    void begin_episode(const TaskSpec& task) override;
    std::string act(const Observation& obs) override;

private:
    const SceneGraph& graph_;
    uint64_t seed_;
    std::vector<std::string> plan_;
    size_t next_ = 0;
};

// Replays the oracle plan but stops after `known_substeps` substeps and calls
// end. Models an agent that only knows as much of the solution as its memory
// has accumulated; the reflection loop raises known_substeps between trials.
class ScriptedMemoryAgent : public Agent {
public:
    ScriptedMemoryAgent(const SceneGraph& graph, int known_substeps, uint64_t seed = 0)
        : graph_(graph), known_(known_substeps), seed_(seed)
    {
    }
    void begin_episode(const TaskSpec& task) override;
    std::string act(const Observation& obs) override;

private:
    const SceneGraph& graph_;
    int known_;
    uint64_t seed_;
    std::vector<std::string> plan_;
    size_t next_ = 0;
};

// ---- External model client ----

struct EndpointConfig {
    std::string base_url;
    std::string model;
    double timeout_s = 30.0;
    std::string api_key_env;  // environment variable holding the key
};

class ExternalAgent : public Agent {
public:
    ExternalAgent(EndpointConfig endpoint, std::string system_prompt);
    void begin_episode(const TaskSpec& task) override;
    std::string act(const Observation& obs) override;

    const std::string& last_error() const { return last_error_; }

private:
    std::string request(const std::string& user_text);

    EndpointConfig endpoint_;
    std::string system_prompt_;
    std::vector<std::pair<std::string, std::string>> history_;  // (role, content)
    std::string last_error_;
};

// ---- Config ----

struct AgentConfig {
    std::string agent;  // "random" | "oracle" | "external"
    std::optional<EndpointConfig> endpoint;
    uint64_t seed = 0;
};

AgentConfig parse_agent_config(const std::string& json_text);

std::unique_ptr<Agent> make_agent(const AgentConfig& config, const SceneGraph& graph,
                                  const std::string& system_prompt = "");

}  // namespace mbench
