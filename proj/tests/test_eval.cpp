#include "doctest.h"
#include "mbench/agents.hpp"
#include "mbench/eval.hpp"
#include "mbench/runner.hpp"

using namespace mbench;

namespace {

SceneGraph studio_graph()
{
    return build_scene_graph(load_scene_file(bundled_data_path("scenes/studio.json")));
}

// A long table reachable from one side only (heading is forced), with a bowl
// anchor in the middle, plus a side table carrying the remote to move.
SceneGraph direction_fixture()
{
    std::string json = R"({"name":"direction_scene","bounds":[0,0,6,6],"objects":[
      {"id":"table_main","name":"table_main","position":[3,0.8,0.45],
       "half_extents":[2.8,0.6,0.45]},
      {"id":"bowl_blue","name":"bowl_blue","position":[3,0.8,0.925],
       "half_extents":[0.08,0.08,0.025]},
      {"id":"table_side","name":"table_side","position":[3,4.5,0.45],
       "half_extents":[0.8,0.5,0.45]},
      {"id":"remote_tv","name":"remote_tv","position":[3,4.5,0.91],
       "half_extents":[0.08,0.03,0.01]}]})";
    return build_scene_graph(load_scene(json));
}

TaskSpec direction_task(const SceneGraph& g, Direction d)
{
    TaskSpec task;
    task.task_id = "t_dir";
    task.level = 1;
    task.steps.push_back(AtomicAction{
        "remote_tv",
        PlacementGoal{Strategy::DirOfObject, "object_table_main_platform_0", d,
                      {"bowl_blue"}}});
    task.instruction = render_instruction(task, g);
    return task;
}

EpisodeState run_direction_episode(const SceneGraph& g, const TaskSpec& task,
                                   int place_dir)
{
    auto [state, obs] = reset(task, g, 4);
    step(state, "go_to_object_table_side_platform_0");
    step(state, "pick_object_1_of_current_platform");
    step(state, "go_to_object_table_main_platform_0");
    step(state, "show_receptacle_of_object_1_of_current_platform");
    step(state, "place_s_[(1," + std::to_string(place_dir) + ")]");
    step(state, "CALL_END");
    return state;
}

}  // namespace

TEST_CASE("substep flags are sequential and worth 25 points each")
{
    SubstepFlags none;
    CHECK(none.achieved() == 0);
    SubstepFlags three{true, true, true, false};
    CHECK(three.achieved() == 3);  // 75 points
    SubstepFlags all{true, true, true, true};
    CHECK(all.achieved() == 4);
    // Sequential: later flags without the earlier ones do not count.
    SubstepFlags gap{false, true, true, true};
    CHECK(gap.achieved() == 0);
    SubstepFlags skip{true, false, true, true};
    CHECK(skip.achieved() == 1);
}

TEST_CASE("an empty trace scores zero")
{
    SceneGraph g = studio_graph();
    TaskSet set = sample_process_tasks(g, 1, 1, {}, 3);
    REQUIRE(!set.tasks.empty());
    EpisodeScore score = evaluate_episode(set.tasks[0], g, {});
    CHECK_FALSE(score.success);
    CHECK(score.ip == doctest::Approx(0.0));
    CHECK(score.steps == 0);
}

TEST_CASE("a completed oracle episode scores 100 with reason ok")
{
    SceneGraph g = studio_graph();
    TaskSet set = sample_process_tasks(g, 3, 1, {}, 17);
    REQUIRE(!set.tasks.empty());
    const TaskSpec& task = set.tasks[0];
    OraclePlan plan = oracle_plan(task, g);
    auto [state, obs] = reset(task, g, 0);
    for (const std::string& a : plan.actions)
        step(state, a);
    EpisodeScore score = evaluate_episode(state);
    CHECK(score.success);
    CHECK(score.ip == doctest::Approx(100.0));
    CHECK(score.reason == "ok");
}

TEST_CASE("wrong-direction placement reports the exact failure line")
{
    SceneGraph g = direction_fixture();
    TaskSpec task = direction_task(g, Direction::RearLeft);
    EpisodeState state =
        run_direction_episode(g, task, direction_index(Direction::RearRight));
    REQUIRE(state.held.empty());
    EpisodeScore score = evaluate_episode(state);
    CHECK_FALSE(score.success);
    CHECK(score.reason
          == "Target object placed in wrong direction, expected: rear-left, found: "
             "rear-right");
    CHECK(score.ip == doctest::Approx(75.0));
}

TEST_CASE("matching-direction placement succeeds")
{
    SceneGraph g = direction_fixture();
    TaskSpec task = direction_task(g, Direction::RearLeft);
    EpisodeState state =
        run_direction_episode(g, task, direction_index(Direction::RearLeft));
    EpisodeScore score = evaluate_episode(state);
    CHECK(score.success);
    CHECK(score.ip == doctest::Approx(100.0));
}

TEST_CASE("progress reasons name the first missing substep")
{
    SceneGraph g = studio_graph();
    TaskSet set = sample_process_tasks(g, 3, 1, {}, 23);
    REQUIRE(!set.tasks.empty());
    const TaskSpec& task = set.tasks[0];

    // Never moved: no substep achieved.
    auto [s0, o0] = reset(task, g, 1);
    step(s0, "CALL_END");
    EpisodeScore never = evaluate_episode(s0);
    CHECK(never.ip == doctest::Approx(0.0));
    CHECK(never.reason == "Never reached the object's platform.");

    // Reached the source platform only.
    auto [s1, o1] = reset(task, g, 1);
    step(s1, "go_to_" + g.platform_of(task.steps[0].object_id));
    step(s1, "CALL_END");
    EpisodeScore reached = evaluate_episode(s1);
    CHECK(reached.ip == doctest::Approx(25.0));
    CHECK(reached.reason == "Never picked the target object.");
}

TEST_CASE("level-3 score is the mean of the two sub-scores")
{
    SceneGraph g = studio_graph();
    TaskSet set = sample_process_tasks(g, 10, 2, {"THEN"}, 31);
    const TaskSpec* two_step = nullptr;
    for (const TaskSpec& t : set.tasks)
        if (t.steps.size() == 2)
            two_step = &t;
    REQUIRE(two_step);

    OraclePlan plan = oracle_plan(*two_step, g);
    auto [state, obs] = reset(*two_step, g, 0);
    // Finish sub-task 1, then stop sub-task 2 right after its pick
    // (substeps 4 and 5 of the global plan).
    for (size_t i = 0; i < plan.actions.size(); ++i) {
        if (plan.substeps[i] > 5)
            break;
        step(state, plan.actions[i]);
    }
    step(state, "CALL_END");
    EpisodeScore score = evaluate_episode(state);
    REQUIRE(score.per_step.size() == 2);
    CHECK(score.per_step[0].achieved() == 4);   // 100
    CHECK(score.per_step[1].achieved() == 2);   // 50
    CHECK(score.ip == doctest::Approx(75.0));
    CHECK_FALSE(score.success);
}

TEST_CASE("aggregation and CSV formats")
{
    std::vector<EpisodeRecord> records{
        {"t1", 1, true, 100.0, 5, "ok"},
        {"t2", 1, false, 25.0, 20, "Never picked the target object."},
        {"t3", 3, true, 100.0, 9, "ok"},
    };
    auto summaries = aggregate(records);
    REQUIRE(summaries.size() == 2);
    CHECK(summaries[0].level == 1);
    CHECK(summaries[0].episodes == 2);
    CHECK(summaries[0].mean_ip == doctest::Approx(62.5));
    CHECK(summaries[0].sr_percent == doctest::Approx(50.0));
    CHECK(summaries[1].level == 3);
    CHECK(summaries[1].sr_percent == doctest::Approx(100.0));

    std::string summary = summary_csv(summaries);
    CHECK(summary.rfind("level,episodes,mean_ip,sr_percent\n", 0) == 0);
    CHECK(summary.find("1,2,62.50,50.00") != std::string::npos);

    std::string episodes = episodes_csv(records);
    CHECK(episodes.rfind("task_id,level,success,ip,steps,reason\n", 0) == 0);
    CHECK(episodes.find("t1,1,true,100.00,5,\"ok\"") != std::string::npos);
    CHECK(episodes.find("t2,1,false,25.00,20,\"Never picked the target object.\"")
          != std::string::npos);
}
