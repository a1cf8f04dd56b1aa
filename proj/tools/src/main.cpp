// Command line front end: graph / gen / bench / judge / reflect / play.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mbench/reflection.hpp"
#include "mbench/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mbench;

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content)
{
    fs::path p(path);
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

struct LoadedGraph {
    SceneGraph graph;
    std::string digest;
};

LoadedGraph load_graph(const std::string& scene_path)
{
    std::string text = read_file(scene_path);
    LoadedGraph out;
    out.graph = build_scene_graph(load_scene(text));
    out.digest = fnv1a_hex(text);
    return out;
}

std::vector<TaskSpec> read_tasks(const std::string& path)
{
    std::istringstream in(read_file(path));
    std::vector<TaskSpec> tasks;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        json j = json::parse(line);
        if (j.contains("meta"))
            continue;
        tasks.push_back(task_from_jsonl(line));
    }
    return tasks;
}

AgentConfig resolve_agent(const std::string& spec, uint64_t seed)
{
    AgentConfig config;
    if (spec == "random" || spec == "oracle") {
        config.agent = spec;
    } else {
        config = parse_agent_config(read_file(spec));
    }
    config.seed = seed;
    return config;
}

std::string default_system_prompt()
{
    std::string path = bundled_data_path("system_prompt.txt");
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return "";
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---- subcommands ----

int cmd_graph(const std::string& scene_path, const std::string& out_path)
{
    LoadedGraph loaded = load_graph(scene_path);
    const SceneGraph& g = loaded.graph;
    json j;
    j["meta"] = {{"version", kToolVersion}, {"seed", 0}, {"scene_digest", loaded.digest}};
    j["scene"] = g.scene_name;
    j["bounds"] = {g.bounds.xmin, g.bounds.ymin, g.bounds.xmax, g.bounds.ymax};
    json objects = json::array();
    for (const auto& obj : g.objects) {
        json jo;
        jo["id"] = obj.id;
        jo["name"] = obj.name;
        jo["ground"] = g.is_ground(obj.id);
        std::string on = g.platform_of(obj.id);
        if (!on.empty())
            jo["on"] = on;
        objects.push_back(jo);
    }
    j["objects"] = objects;
    json platforms = json::array();
    for (const auto& p : g.platforms) {
        json jp;
        jp["id"] = p.id;
        jp["owner"] = p.owner;
        jp["rect"] = {p.rect.xmin, p.rect.ymin, p.rect.xmax, p.rect.ymax};
        jp["height"] = p.height;
        jp["clearance"] = p.clearance;
        jp["reachable"] = g.platform_reachable(p.id);
        json kids = json::array();
        for (const auto* o : g.objects_on(p.id))
            kids.push_back(o->id);
        jp["children"] = kids;
        auto heading = canonical_heading(g, p.id);
        int receptacles = 0;
        if (heading) {
            PlatformView view = make_platform_view(g, p.id);
            if (view.footprints.empty())
                receptacles = 9;  // grid cells
            else
                receptacles = static_cast<int>(refine_receptacles(view, *heading).size());
        }
        jp["receptacles"] = receptacles;
        platforms.push_back(jp);
    }
    j["platforms"] = platforms;
    json walkable = json::object();
    for (const auto& [ground, spaces] : g.walkable)
        walkable[ground] = spaces.size();
    j["walkable_spaces"] = walkable;

    std::string text = j.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
    return 0;
}

int cmd_gen(const std::string& scene_path, std::vector<int> levels, int count, uint64_t seed,
            const std::string& templates_path, const std::vector<std::string>& connectors,
            const std::string& out_path, const std::string& coverage_path)
{
    LoadedGraph loaded = load_graph(scene_path);
    const SceneGraph& g = loaded.graph;
    if (levels.empty())
        levels = {1, 2, 3};
    auto wants = [&](int l) {
        return std::find(levels.begin(), levels.end(), l) != levels.end();
    };

    std::vector<TaskSpec> tasks;
    bool insufficient = false;
    if (wants(1) || wants(2)) {
        TaskSet set = sample_process_tasks(g, count, 1, connectors, seed);
        insufficient |= set.insufficient;
        for (auto& t : set.tasks)
            if (wants(t.level))
                tasks.push_back(std::move(t));
    }
    if (wants(3)) {
        TaskSet set = sample_process_tasks(g, count, 2, connectors, seed + 1);
        insufficient |= set.insufficient;
        for (auto& t : set.tasks)
            tasks.push_back(std::move(t));
    }
    if (wants(4)) {
        if (templates_path.empty())
            throw std::runtime_error("gen: level 4 needs --templates");
        auto templates = load_templates(read_file(templates_path));
        TaskSet set = instantiate_outcome_templates(templates, g, seed + 2, count);
        insufficient |= set.insufficient;
        HeuristicJudge judge(g);
        std::array<Judge*, 3> judges{&judge, &judge, &judge};
        for (auto& t : set.tasks)
            if (vote_feasibility(t, g, judges).accepted)
                tasks.push_back(std::move(t));
    }
    // Re-number so ids stay unique after merging the per-level batches.
    int n_process = 0, n_outcome = 0;
    for (auto& t : tasks)
        t.task_id = t.level == 4 ? "ot" + std::to_string(++n_outcome)
                                 : "t" + std::to_string(++n_process);

    RunMeta meta{kToolVersion, seed, loaded.digest};
    std::string out = meta_line(meta) + "\n";
    for (const auto& t : tasks)
        out += task_to_jsonl(t) + "\n";
    if (out_path.empty())
        std::cout << out;
    else
        write_file(out_path, out);

    if (!coverage_path.empty()) {
        std::map<std::string, int> objects, platforms;
        for (const auto& t : tasks) {
            for (const auto& s : t.steps) {
                ++objects[s.object_id];
                ++platforms[s.goal.platform_id];
                for (const auto& a : s.goal.anchors)
                    ++objects[a];
            }
        }
        json cov;
        cov["meta"] = {{"version", kToolVersion}, {"seed", seed},
                       {"scene_digest", loaded.digest}};
        cov["tasks"] = tasks.size();
        cov["objects"] = objects;
        cov["platforms"] = platforms;
        write_file(coverage_path, cov.dump(2) + "\n");
    }
    if (insufficient)
        std::cerr << "gen: note: feasible set smaller than requested count\n";
    return 0;
}

int cmd_bench(const std::string& scene_path, const std::string& tasks_path,
              const std::string& agent_spec, int parallel, uint64_t seed, bool strict,
              const std::string& out_dir)
{
    LoadedGraph loaded = load_graph(scene_path);
    std::vector<TaskSpec> tasks;
    for (auto& t : read_tasks(tasks_path)) {
        if (t.level == 4) {
            std::cerr << "bench: skipping level-4 task " << t.task_id
                      << " (no episode scoring)\n";
            continue;
        }
        tasks.push_back(std::move(t));
    }
    AgentConfig config = resolve_agent(agent_spec, seed);
    BatchOptions options;
    options.strict = strict;
    options.parallel = parallel;
    options.system_prompt = default_system_prompt();

    auto results = run_batch(tasks, loaded.graph, config, options);
    RunMeta meta{kToolVersion, seed, loaded.digest};
    auto records = to_records(results);
    std::string report = "# " + meta_line(meta) + "\n" + summary_csv(aggregate(records));

    if (out_dir.empty()) {
        std::cout << report;
    } else {
        write_file(out_dir + "/episodes.jsonl", batch_log_jsonl(results, meta));
        write_file(out_dir + "/report.csv", report);
        write_file(out_dir + "/episodes.csv",
                   "# " + meta_line(meta) + "\n" + episodes_csv(records));
        std::cout << report;
    }
    return 0;
}

int cmd_judge(const std::string& scene_path, const std::string& log_path,
              const std::string& out_path)
{
    LoadedGraph loaded = load_graph(scene_path);
    std::istringstream in(read_file(log_path));
    std::string line;
    std::map<std::string, std::vector<TraceStep>> traces;
    std::vector<std::pair<TaskSpec, std::string>> finished;  // task + logged reason
    std::vector<std::string> order;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        json j = json::parse(line);
        if (j.contains("meta"))
            continue;
        std::string task_id = j.at("task_id").get<std::string>();
        if (j.contains("result")) {
            finished.emplace_back(task_from_jsonl(j.at("task").dump()),
                                  j["result"].value("reason", ""));
            order.push_back(task_id);
            continue;
        }
        TraceStep t;
        t.step = j.at("step").get<int>();
        t.action_raw = j.at("action_raw").get<std::string>();
        t.action_kind = j.at("action").value("kind", "");
        t.notice = j.value("notice", "");
        t.location = j.at("location").get<std::string>();
        t.held = j.value("held", "");
        const json& delta = j.at("state_delta");
        t.rejected = delta.value("rejected", false);
        if (delta.contains("picked"))
            t.picked_object = delta["picked"].get<std::string>();
        if (delta.contains("placed")) {
            const json& p = delta["placed"];
            t.placed_object = p.at("object").get<std::string>();
            t.placed_platform = p.at("platform").get<std::string>();
            auto r = p.at("rect");
            t.placed_rect = Rect{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                                 r[3].get<double>()};
            t.fallback_place = delta.value("fallback", false);
        }
        traces[task_id].push_back(std::move(t));
    }

    std::vector<EpisodeRecord> records;
    for (const auto& [task, logged_reason] : finished) {
        EpisodeScore score = evaluate_episode(task, loaded.graph, traces[task.task_id]);
        (void)logged_reason;
        records.push_back(EpisodeRecord{task.task_id, task.level, score.success, score.ip,
                                        score.steps, score.reason});
    }
    RunMeta meta{kToolVersion, 0, loaded.digest};
    std::string report = "# " + meta_line(meta) + "\n" + summary_csv(aggregate(records));
    if (out_path.empty())
        std::cout << report;
    else
        write_file(out_path, report);
    return 0;
}

int cmd_reflect(const std::string& train_scene, const std::string& test_scene, int trials,
                uint64_t seed, int train_count, int test_count, const std::string& memory_in,
                const std::string& memory_out)
{
    LoadedGraph train = load_graph(train_scene);
    LoadedGraph test = load_graph(test_scene);
    auto train_tasks = sample_process_tasks(train.graph, train_count, 1, {}, seed).tasks;
    auto test_tasks = sample_process_tasks(test.graph, test_count, 1, {}, seed + 1).tasks;

    LongTermMemory memory;
    if (!memory_in.empty())
        memory = LongTermMemory::from_json(read_file(memory_in));

    // The scripted agent executes as much of the oracle plan as the memory's
    // best trial has unlocked so far, replanning against the episode's scene.
    AgentFactory factory = [&](const LongTermMemory& m,
                               const SceneGraph& g) -> std::unique_ptr<Agent> {
        return std::make_unique<ScriptedMemoryAgent>(g, 1 + best_achieved(m), seed);
    };
    ReflectionOutcome outcome = run_reflection_loop(train_tasks, train.graph, test_tasks,
                                                    test.graph, factory, trials, seed, memory);

    if (!memory_out.empty())
        write_file(memory_out, outcome.memory.to_json() + "\n");

    json j;
    j["meta"] = {{"version", kToolVersion}, {"seed", seed},
                 {"scene_digest", train.digest + ":" + test.digest}};
    j["trials"] = trials;
    j["before"] = {{"episodes", outcome.before.episodes},
                   {"mean_ip", outcome.before.mean_ip},
                   {"sr_percent", outcome.before.sr_percent}};
    j["after"] = {{"episodes", outcome.after.episodes},
                  {"mean_ip", outcome.after.mean_ip},
                  {"sr_percent", outcome.after.sr_percent}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_play(const std::string& scene_path, const std::string& tasks_path,
             const std::string& task_id, uint64_t seed, bool strict)
{
    LoadedGraph loaded = load_graph(scene_path);
    auto tasks = read_tasks(tasks_path);
    for (const auto& task : tasks) {
        if (!task_id.empty() && task.task_id != task_id)
            continue;
        if (task.level == 4)
            continue;
        auto [state, obs] = reset(task, loaded.graph, seed, strict);
        std::cout << "=== " << task.task_id << " ===\n" << obs.text << std::flush;
        std::string line;
        while (!state.terminated && std::getline(std::cin, line)) {
            auto [next_obs, status] = step(state, line);
            std::cout << next_obs.text << std::flush;
            (void)status;
        }
        EpisodeScore score = evaluate_episode(state);
        std::cout << "Result: " << (score.success ? "success" : "failure") << ", IP "
                  << score.ip << ", reason: " << score.reason << "\n";
        if (!std::cin)
            break;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Symbolic mobile-manipulation task benchmark"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string scene, tasks_path, out_path, out_dir, templates_path, coverage_path;
    std::string agent_spec = "random", task_id, train_scene, test_scene;
    std::string memory_in, memory_out;
    std::vector<int> levels;
    std::vector<std::string> connectors;
    int count = 50, parallel = 1, trials = 10, train_count = 5, test_count = 5;
    uint64_t seed = 0;
    bool strict = false;

    auto* graph_cmd = app.add_subcommand("graph", "Build and dump the scene graph");
    graph_cmd->add_option("scene", scene)->required();
    graph_cmd->add_option("--out", out_path);

    auto* gen_cmd = app.add_subcommand("gen", "Generate tasks");
    gen_cmd->add_option("scene", scene)->required();
    gen_cmd->add_option("--levels", levels);
    gen_cmd->add_option("--count", count);
    gen_cmd->add_option("--seed", seed);
    gen_cmd->add_option("--templates", templates_path);
    gen_cmd->add_option("--connectors", connectors);
    gen_cmd->add_option("--out", out_path);
    gen_cmd->add_option("--coverage", coverage_path);

    auto* bench_cmd = app.add_subcommand("bench", "Run benchmark episodes");
    bench_cmd->add_option("scene", scene)->required();
    bench_cmd->add_option("tasks", tasks_path)->required();
    bench_cmd->add_option("--agent", agent_spec);
    bench_cmd->add_option("--parallel", parallel);
    bench_cmd->add_option("--seed", seed);
    bench_cmd->add_flag("--strict-grammar", strict);
    bench_cmd->add_option("--out-dir", out_dir);

    auto* judge_cmd = app.add_subcommand("judge", "Re-score an episode log");
    judge_cmd->add_option("scene", scene)->required();
    judge_cmd->add_option("log", tasks_path)->required();
    judge_cmd->add_option("--out", out_path);

    auto* reflect_cmd = app.add_subcommand("reflect", "Run the self-reflection loop");
    reflect_cmd->add_option("train_scene", train_scene)->required();
    reflect_cmd->add_option("test_scene", test_scene)->required();
    reflect_cmd->add_option("--trials", trials);
    reflect_cmd->add_option("--seed", seed);
    reflect_cmd->add_option("--train-count", train_count);
    reflect_cmd->add_option("--test-count", test_count);
    reflect_cmd->add_option("--memory-in", memory_in);
    reflect_cmd->add_option("--memory-out", memory_out);

    auto* play_cmd = app.add_subcommand("play", "Interactive episodes");
    play_cmd->add_option("scene", scene)->required();
    play_cmd->add_option("tasks", tasks_path)->required();
    play_cmd->add_option("--task", task_id);
    play_cmd->add_option("--seed", seed);
    play_cmd->add_flag("--strict-grammar", strict);

    CLI11_PARSE(app, argc, argv);

    try {
        if (graph_cmd->parsed())
            return cmd_graph(scene, out_path);
        if (gen_cmd->parsed())
            return cmd_gen(scene, levels, count, seed, templates_path, connectors, out_path,
                           coverage_path);
        if (bench_cmd->parsed())
            return cmd_bench(scene, tasks_path, agent_spec, parallel, seed, strict, out_dir);
        if (judge_cmd->parsed())
            return cmd_judge(scene, tasks_path, out_path);
        if (reflect_cmd->parsed())
            return cmd_reflect(train_scene, test_scene, trials, seed, train_count, test_count,
                               memory_in, memory_out);
        if (play_cmd->parsed())
            return cmd_play(scene, tasks_path, task_id, seed, strict);
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
