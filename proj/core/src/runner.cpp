#include "mbench/runner.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace mbench {

using nlohmann::json;

EpisodeResult run_episode(const TaskSpec& task, const SceneGraph& graph, Agent& agent,
                          uint64_t seed, bool strict)
{
    agent.begin_episode(task);
    auto [state, obs] = reset(task, graph, seed, strict);
    while (!state.terminated) {
        std::string action = agent.act(obs);
        auto [next_obs, status] = step(state, action);
        obs = std::move(next_obs);
        (void)status;
    }
    EpisodeResult result;
    result.task = task;
    result.score = evaluate_episode(state);
    result.trace = std::move(state.trace);
    return result;
}

std::vector<EpisodeResult> run_batch(const std::vector<TaskSpec>& tasks, const SceneGraph& graph,
                                     const AgentConfig& config, const BatchOptions& options)
{
    std::vector<EpisodeResult> results(tasks.size());
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size())
                return;
            try {
                AgentConfig per = config;
                per.seed = config.seed ^ static_cast<uint64_t>(i);
                auto agent = make_agent(per, graph, options.system_prompt);
                results[i] = run_episode(tasks[i], graph, *agent, per.seed, options.strict);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                return;
            }
        }
    };

    int threads = std::max(1, options.parallel);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return results;
}

std::string fnv1a_hex(const std::string& data)
{
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string meta_line(const RunMeta& meta)
{
    json j;
    j["meta"] = {{"version", meta.version}, {"seed", meta.seed},
                 {"scene_digest", meta.scene_digest}};
    return j.dump();
}

std::string episode_log_jsonl(const EpisodeResult& result)
{
    std::string out;
    for (const TraceStep& t : result.trace) {
        json j;
        j["task_id"] = result.task.task_id;
        j["step"] = t.step;
        j["action_raw"] = t.action_raw;
        j["action"] = {{"kind", t.action_kind}};
        if (!t.notice.empty())
            j["notice"] = t.notice;
        j["location"] = t.location;
        if (!t.held.empty())
            j["held"] = t.held;
        json delta = json::object();
        if (t.rejected)
            delta["rejected"] = true;
        if (!t.picked_object.empty())
            delta["picked"] = t.picked_object;
        if (!t.placed_object.empty()) {
            delta["placed"] = {{"object", t.placed_object},
                               {"platform", t.placed_platform},
                               {"rect", {t.placed_rect->xmin, t.placed_rect->ymin,
                                         t.placed_rect->xmax, t.placed_rect->ymax}}};
            if (t.fallback_place)
                delta["fallback"] = true;
        }
        j["state_delta"] = delta;
        out += j.dump();
        out += "\n";
    }
    json terminal;
    terminal["task_id"] = result.task.task_id;
    terminal["task"] = json::parse(task_to_jsonl(result.task));
    json flags = json::array();
    for (const SubstepFlags& f : result.score.per_step)
        flags.push_back({{"reached_source", f.reached_source},
                         {"picked", f.picked},
                         {"reached_goal", f.reached_goal},
                         {"placed", f.placed}});
    terminal["result"] = {{"success", result.score.success},
                          {"ip", result.score.ip},
                          {"steps", result.score.steps},
                          {"reason", result.score.reason},
                          {"flags", flags}};
    out += terminal.dump();
    out += "\n";
    return out;
}

std::string batch_log_jsonl(const std::vector<EpisodeResult>& results, const RunMeta& meta)
{
    std::string out = meta_line(meta) + "\n";
    for (const EpisodeResult& r : results)
        out += episode_log_jsonl(r);
    return out;
}

#ifndef MBENCH_BUNDLED_DATA_DIR
#define MBENCH_BUNDLED_DATA_DIR ""
#endif

std::string bundled_data_path(const std::string& name)
{
    return std::string(MBENCH_BUNDLED_DATA_DIR) + "/" + name;
}

std::vector<EpisodeRecord> to_records(const std::vector<EpisodeResult>& results)
{
    std::vector<EpisodeRecord> out;
    for (const EpisodeResult& r : results)
        out.push_back(EpisodeRecord{r.task.task_id, r.task.level, r.score.success, r.score.ip,
                                    r.score.steps, r.score.reason});
    return out;
}

}  // namespace mbench
