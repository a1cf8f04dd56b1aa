#include "mbench/agents.hpp"

#include <algorithm>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

#include "mbench/eval.hpp"

namespace mbench {

using nlohmann::json;

namespace {

int index_of_object(const EpisodeState& st, const std::string& object_id)
{
    for (const auto& [idx, id] : st.index_map)
        if (id == object_id)
            return idx;
    return 0;
}

std::string pair_selection(const std::vector<std::pair<int, int>>& pairs)
{
    std::string out = "place_s_[";
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (i)
            out += ",";
        out += "(" + std::to_string(pairs[i].first) + "," + std::to_string(pairs[i].second) + ")";
    }
    return out + "]";
}

// Candidate place_s actions from the current stand point, most specific first.
// Labels are heading-relative but the underlying rects are not, so trying the
// inventory under whatever heading we arrived with is exhaustive.
std::vector<std::string> place_candidates(const EpisodeState& st, const AtomicAction& step)
{
    std::vector<std::string> out;
    auto pairs = available_pairs(st);
    auto cells = available_cells(st);

    if (step.goal.strategy == Strategy::BetweenObjects && step.goal.anchors.size() == 2) {
        int ia = index_of_object(st, step.goal.anchors[0]);
        int ib = index_of_object(st, step.goal.anchors[1]);
        for (int d = 1; d <= 8; ++d) {
            int od = direction_index(opposite(*direction_from_index(d)));
            bool has_a = false, has_b = false;
            for (const PairOption& p : pairs) {
                has_a = has_a || (p.object_index == ia && p.dir_index == d);
                has_b = has_b || (p.object_index == ib && p.dir_index == od);
            }
            if (has_a && has_b)
                out.push_back(pair_selection({{ia, d}, {ib, od}}));
        }
    }
    for (const PairOption& p : pairs)
        out.push_back(pair_selection({{p.object_index, p.dir_index}}));
    for (const GridCell& c : cells)
        out.push_back("place_s_[" + std::to_string(c.index) + "]");

    {
        // A wide object may need a merged selection spanning several
        // receptacles; recover it from the generator's own feasibility fit.
        auto fit = feasible_placement(st.graph, step.object_id, step.goal, true);
        if (fit) {
            std::vector<std::pair<int, int>> sel;
            for (const PairOption& p : pairs)
                if (overlaps(p.receptacle.rect, fit->rect))
                    sel.emplace_back(p.object_index, p.dir_index);
            if (sel.size() > 1)
                out.push_back(pair_selection(sel));
            std::vector<int> cell_sel;
            for (const GridCell& c : cells)
                if (overlaps(c.rect, fit->rect))
                    cell_sel.push_back(c.index);
            if (cell_sel.size() > 1) {
                std::string a = "place_s_[";
                for (size_t i = 0; i < cell_sel.size(); ++i)
                    a += (i ? "," : "") + std::to_string(cell_sel[i]);
                out.push_back(a + "]");
            }
        }
    }
    return out;
}

// Applies the action on a scratch copy; commits only if it results in a
// placement that satisfies the step's goal without making any of the
// remaining steps infeasible (a placement may legally block a later goal).
bool try_place(EpisodeState& st, const std::string& action, const AtomicAction& goal_step,
               const std::vector<AtomicAction>& done,
               const std::vector<AtomicAction>& remaining)
{
    EpisodeState clone = st;
    step(clone, action);
    const TraceStep& t = clone.trace.back();
    if (t.rejected || t.placed_object.empty())
        return false;
    if (!judge_step(clone.graph, goal_step).satisfied)
        return false;
    for (const AtomicAction& earlier : done)
        if (!judge_step(clone.graph, earlier).satisfied)
            return false;
    for (const AtomicAction& later : remaining) {
        // The later step must not only stay feasible: its reference placement
        // must leave every goal achieved so far intact, otherwise committing
        // here paints the episode into a corner.
        auto fit = feasible_placement(clone.graph, later.object_id, later.goal, true);
        if (!fit)
            return false;
        SceneGraph after = clone.graph;
        Rect fp{fit->rect.xmin + kFitMargin, fit->rect.ymin + kFitMargin,
                fit->rect.xmax - kFitMargin, fit->rect.ymax - kFitMargin};
        after.relocate(later.object_id, later.goal.platform_id, fp);
        if (!judge_step(after, goal_step).satisfied)
            return false;
        for (const AtomicAction& earlier : done)
            if (!judge_step(after, earlier).satisfied)
                return false;
    }
    st = std::move(clone);
    return true;
}

}  // namespace

OraclePlan oracle_plan(const TaskSpec& task, const SceneGraph& graph, uint64_t seed)
{
    OraclePlan plan;
    auto [st, obs0] = reset(task, graph, seed);
    (void)obs0;
    auto emit = [&](const std::string& action, int substep) {
        step(st, action);
        if (st.trace.back().rejected)
            throw EnvError("oracle: action rejected: " + action);
        plan.actions.push_back(action);
        plan.substeps.push_back(substep);
    };

    int base = 0;
    for (size_t si = 0; si < task.steps.size(); ++si) {
        const AtomicAction& a = task.steps[si];
        std::vector<AtomicAction> done(task.steps.begin(), task.steps.begin() + si);
        std::vector<AtomicAction> remaining(task.steps.begin() + si + 1, task.steps.end());
        std::string source = st.graph.platform_of(a.object_id);
        if (source.empty())
            throw EnvError("oracle: object '" + a.object_id + "' has no platform");
        emit("go_to_" + source, base + 0);
        int idx = index_of_object(st, a.object_id);
        if (idx == 0)
            throw EnvError("oracle: object '" + a.object_id + "' not visible at " + source);
        emit("pick_object_" + std::to_string(idx) + "_of_current_platform", base + 1);
        emit("go_to_" + a.goal.platform_id, base + 2);
        for (const std::string& anchor : a.goal.anchors) {
            int ai = index_of_object(st, anchor);
            if (ai)
                emit("show_receptacle_of_object_" + std::to_string(ai) + "_of_current_platform",
                     base + 3);
        }

        bool placed = false;
        for (const std::string& cand : place_candidates(st, a)) {
            if (try_place(st, cand, a, done, remaining)) {
                plan.actions.push_back(cand);
                plan.substeps.push_back(base + 3);
                placed = true;
                break;
            }
        }
        if (!placed)
            throw EnvError("oracle: no satisfying placement for task '" + task.task_id + "'");
        base += 4;
    }
    plan.actions.push_back("CALL_END");
    plan.substeps.push_back(base);
    return plan;
}

std::string RandomAgent::act(const Observation& obs)
{
    if (obs.actions.empty())
        return "CALL_END";
    return obs.actions[rng_() % obs.actions.size()];
}

void OracleAgent::begin_episode(const TaskSpec& task)
{
    plan_ = oracle_plan(task, graph_, seed_).actions;
    next_ = 0;
}

std::string OracleAgent::act(const Observation&)
{
    if (next_ >= plan_.size())
        return "CALL_END";
    return plan_[next_++];
}

void ScriptedMemoryAgent::begin_episode(const TaskSpec& task)
{
    plan_.clear();
    next_ = 0;
    OraclePlan full = oracle_plan(task, graph_, seed_);
    for (size_t i = 0; i < full.actions.size(); ++i)
        if (full.substeps[i] < known_)
            plan_.push_back(full.actions[i]);
}

std::string ScriptedMemoryAgent::act(const Observation&)
{
    if (next_ >= plan_.size())
        return "CALL_END";
    return plan_[next_++];
}

// ---- External model client ----

ExternalAgent::ExternalAgent(EndpointConfig endpoint, std::string system_prompt)
    : endpoint_(std::move(endpoint)), system_prompt_(std::move(system_prompt))
{
}

void ExternalAgent::begin_episode(const TaskSpec&)
{
    history_.clear();
    last_error_.clear();
}

std::string ExternalAgent::request(const std::string& user_text)
{
    std::string host = endpoint_.base_url;
    std::string path_prefix;
    size_t scheme = host.find("://");
    size_t slash = host.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (slash != std::string::npos) {
        path_prefix = host.substr(slash);
        host = host.substr(0, slash);
    }
    httplib::Client client(host);
    int seconds = std::max(1, static_cast<int>(endpoint_.timeout_s));
    client.set_connection_timeout(seconds, 0);
    client.set_read_timeout(seconds, 0);

    httplib::Headers headers;
    if (!endpoint_.api_key_env.empty()) {
        const char* key = std::getenv(endpoint_.api_key_env.c_str());
        if (key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json body;
    body["model"] = endpoint_.model;
    json messages = json::array();
    if (!system_prompt_.empty())
        messages.push_back({{"role", "system"}, {"content", system_prompt_}});
    for (const auto& [role, content] : history_)
        messages.push_back({{"role", role}, {"content", content}});
    messages.push_back({{"role", "user"}, {"content", user_text}});
    body["messages"] = messages;
    std::string payload = body.dump();

    std::string path = path_prefix + "/chat/completions";
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error_ = "endpoint unreachable or timed out";
            continue;  // one retry
        }
        if (res->status >= 500) {
            last_error_ = "endpoint returned status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            last_error_ = "endpoint returned status " + std::to_string(res->status);
            return "";
        }
        try {
            json reply = json::parse(res->body);
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const std::exception&) {
            last_error_ = "malformed endpoint reply";
            return "";
        }
    }
    return "";
}

std::string ExternalAgent::act(const Observation& obs)
{
    std::string reply = request(obs.text);
    if (reply.empty())
        return "CALL_END";
    history_.emplace_back("user", obs.text);
    history_.emplace_back("assistant", reply);
    return reply;
}

// ---- Config ----

AgentConfig parse_agent_config(const std::string& json_text)
{
    json j = json::parse(json_text);
    AgentConfig config;
    config.agent = j.at("agent").get<std::string>();
    if (config.agent != "random" && config.agent != "oracle" && config.agent != "external"
        && config.agent != "scripted")
        throw EnvError("agent config: unknown agent '" + config.agent + "'");
    if (j.contains("seed"))
        config.seed = j["seed"].get<uint64_t>();
    if (j.contains("endpoint")) {
        const json& e = j["endpoint"];
        EndpointConfig ec;
        ec.base_url = e.at("base_url").get<std::string>();
        ec.model = e.at("model").get<std::string>();
        if (e.contains("timeout_s"))
            ec.timeout_s = e["timeout_s"].get<double>();
        if (e.contains("api_key_env"))
            ec.api_key_env = e["api_key_env"].get<std::string>();
        config.endpoint = ec;
    }
    if (config.agent == "external" && !config.endpoint)
        throw EnvError("agent config: external agent needs an endpoint");
    return config;
}

std::unique_ptr<Agent> make_agent(const AgentConfig& config, const SceneGraph& graph,
                                  const std::string& system_prompt)
{
    if (config.agent == "random")
        return std::make_unique<RandomAgent>(config.seed);
    if (config.agent == "oracle")
        return std::make_unique<OracleAgent>(graph, config.seed);
    if (config.agent == "external")
        return std::make_unique<ExternalAgent>(*config.endpoint, system_prompt);
    throw EnvError("agent config: no factory for '" + config.agent + "'");
}

}  // namespace mbench
