#include "doctest.h"
#include "mbench/reflection.hpp"

using namespace mbench;

namespace {

SceneGraph studio_graph()
{
    return build_scene_graph(load_scene_file(bundled_data_path("scenes/studio.json")));
}

ReflectionEntry entry_with(const std::string& id, int achieved)
{
    ReflectionEntry e;
    e.task_id = id;
    e.goal = "Move something somewhere";
    e.actions = {"go_to_x"};
    e.achieved_substeps = achieved;
    e.total_substeps = 4;
    e.suggestions = {"pick_object_1_of_current_platform"};
    return e;
}

}  // namespace

TEST_CASE("memory is FIFO-bounded at its capacity")
{
    LongTermMemory memory;
    CHECK(memory.capacity() == kMemoryCapacity);
    for (int i = 0; i < kMemoryCapacity + 5; ++i)
        memory.add(entry_with("t" + std::to_string(i), i % 4));
    CHECK(static_cast<int>(memory.entries().size()) == kMemoryCapacity);
    // Oldest entries were evicted.
    CHECK(memory.entries().front().task_id == "t5");
    CHECK(memory.entries().back().task_id == "t14");
    CHECK(best_achieved(memory) == 3);
    CHECK(best_achieved(LongTermMemory{}) == -1);
}

TEST_CASE("render lists the most recent entry first")
{
    LongTermMemory memory;
    memory.add(entry_with("t_old", 1));
    memory.add(entry_with("t_new", 2));
    std::string text = memory.render();
    CHECK(text.find("Achieved substeps: 2/4") < text.find("Achieved substeps: 1/4"));
    CHECK(text.find("Move something somewhere") != std::string::npos);
    CHECK(text.find("Suggested next actions") != std::string::npos);
}

TEST_CASE("memory round-trips through JSON")
{
    LongTermMemory memory;
    memory.add(entry_with("t1", 2));
    memory.add(entry_with("t2", 3));
    LongTermMemory back = LongTermMemory::from_json(memory.to_json());
    CHECK(back.to_json() == memory.to_json());
    REQUIRE(back.entries().size() == 2);
    CHECK(back.entries()[0].task_id == "t1");
    CHECK(back.entries()[1].achieved_substeps == 3);
    // Order continues after a round trip.
    back.add(entry_with("t3", 1));
    CHECK(back.entries().back().order > back.entries()[1].order);
}

TEST_CASE("summaries carry the oracle remainder as suggestions")
{
    SceneGraph g = studio_graph();
    TaskSet set = sample_process_tasks(g, 3, 1, {}, 41);
    REQUIRE(!set.tasks.empty());
    const TaskSpec& task = set.tasks[0];

    // Zero progress: the suggestion starts with going to the source platform.
    auto [idle, obs] = reset(task, g, 1);
    step(idle, "CALL_END");
    EpisodeScore idle_score = evaluate_episode(idle);
    ReflectionEntry e = summarize_episode(task, g, idle_score, idle.trace);
    CHECK_FALSE(e.success);
    CHECK(e.achieved_substeps == 0);
    CHECK(e.total_substeps == 4);
    REQUIRE(!e.suggestions.empty());
    CHECK(e.suggestions.front()
          == "go_to_" + g.platform_of(task.steps[0].object_id));

    // Partial progress: suggestions resume after the achieved prefix.
    auto [part, pobs] = reset(task, g, 1);
    step(part, "go_to_" + g.platform_of(task.steps[0].object_id));
    step(part, "CALL_END");
    EpisodeScore part_score = evaluate_episode(part);
    ReflectionEntry pe = summarize_episode(task, g, part_score, part.trace);
    CHECK(pe.achieved_substeps == 1);
    REQUIRE(!pe.suggestions.empty());
    CHECK(pe.suggestions.front().rfind("pick_", 0) == 0);

    // Success: nothing left to suggest.
    OraclePlan plan = oracle_plan(task, g);
    auto [done, dobs] = reset(task, g, 0);
    for (const std::string& a : plan.actions)
        step(done, a);
    EpisodeScore done_score = evaluate_episode(done);
    REQUIRE(done_score.success);
    ReflectionEntry de = summarize_episode(task, g, done_score, done.trace);
    CHECK(de.success);
    CHECK(de.suggestions.empty());
    CHECK(de.achieved_substeps == de.total_substeps);
}

TEST_CASE("the reflection loop improves the scripted agent")
{
    SceneGraph g = studio_graph();
    TaskSet train = sample_process_tasks(g, 6, 1, {}, 51);
    TaskSet test = sample_process_tasks(g, 6, 1, {}, 52);
    REQUIRE(!train.tasks.empty());
    REQUIRE(!test.tasks.empty());

    AgentFactory factory = [](const LongTermMemory& memory, const SceneGraph& graph) {
        return std::make_unique<ScriptedMemoryAgent>(graph, 1 + best_achieved(memory));
    };

    double last_sr = -1.0;
    for (int trials : {0, 2, 5, 10}) {
        ReflectionOutcome outcome = run_reflection_loop(train.tasks, g, test.tasks, g,
                                                        factory, trials, 9);
        CHECK(outcome.before.episodes == static_cast<int>(test.tasks.size()));
        CHECK(outcome.after.sr_percent >= outcome.before.sr_percent);
        // Non-decreasing in the trial count.
        CHECK(outcome.after.sr_percent >= last_sr);
        last_sr = outcome.after.sr_percent;
        if (trials == 10)
            CHECK(outcome.after.sr_percent > outcome.before.sr_percent);
    }
}
