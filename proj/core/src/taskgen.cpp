#include "mbench/taskgen.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <sstream>

#include "json.hpp"

#include "mbench/eval.hpp"

namespace mbench {

using nlohmann::json;

std::string strategy_name(Strategy s)
{
    switch (s) {
    case Strategy::ToPlatform: return "to_platform";
    case Strategy::ToPlatformDir: return "to_platform_dir";
    case Strategy::AroundObject: return "around_object";
    case Strategy::DirOfObject: return "dir_of_object";
    case Strategy::BetweenObjects: return "between_objects";
    }
    return "";
}

std::optional<Strategy> strategy_from_name(const std::string& name)
{
    for (Strategy s : {Strategy::ToPlatform, Strategy::ToPlatformDir, Strategy::AroundObject,
                       Strategy::DirOfObject, Strategy::BetweenObjects})
        if (strategy_name(s) == name)
            return s;
    return std::nullopt;
}

namespace {

// Grid cell holding the named direction (cell 5, the center, has no name).
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

Footprint footprint_of(const SceneObject& obj)
{
    Rect fp = obj.footprint();
    return Footprint{fp.width(), fp.depth()};
}

std::optional<Rect> refined_rect(const std::vector<Receptacle>& recs, Direction d)
{
    for (const auto& r : recs)
        if (r.direction == d)
            return r.rect;
    return std::nullopt;
}

// All candidate region sets for a goal; one entry except BetweenObjects where
// each complementary direction pair is its own candidate.
std::vector<GoalRegions> goal_region_candidates(const SceneGraph& graph,
                                                const PlacementGoal& goal,
                                                const std::string& exclude)
{
    std::vector<GoalRegions> out;
    auto heading = canonical_heading(graph, goal.platform_id);
    if (!heading)
        return out;
    std::set<std::string> excl;
    if (!exclude.empty())
        excl.insert(exclude);
    PlatformView view = make_platform_view(graph, goal.platform_id, excl);

    switch (goal.strategy) {
    case Strategy::ToPlatform: {
        GoalRegions g;
        if (view.footprints.empty()) {
            g.region_rects = {view.rect};
        } else {
            for (const auto& r : refine_receptacles(view, *heading))
                g.region_rects.push_back(r.rect);
        }
        if (!g.region_rects.empty())
            out.push_back(std::move(g));
        break;
    }
    case Strategy::ToPlatformDir: {
        // Only meaningful on platforms that are empty once the moved object is
        // lifted: the grid exists only there, and a single-cell region keeps
        // the placement center inside the named cell.
        if (!view.footprints.empty() || !goal.direction)
            break;
        Rect cell = grid_cell_rect(view.rect, *heading, cell_index_for(*goal.direction));
        GoalRegions g;
        g.region_rects = {cell};
        g.center_in = cell;
        out.push_back(std::move(g));
        break;
    }
    case Strategy::AroundObject: {
        if (goal.anchors.size() != 1 || !view.footprint_of(goal.anchors[0]))
            break;
        GoalRegions g;
        for (const auto& r : refine_receptacles_for(view, goal.anchors[0], *heading))
            g.region_rects.push_back(r.rect);
        if (!g.region_rects.empty())
            out.push_back(std::move(g));
        break;
    }
    case Strategy::DirOfObject: {
        if (goal.anchors.size() != 1 || !goal.direction || !view.footprint_of(goal.anchors[0]))
            break;
        auto recs = refine_receptacles_for(view, goal.anchors[0], *heading);
        auto rect = refined_rect(recs, *goal.direction);
        if (!rect)
            break;
        GoalRegions g;
        g.region_rects = {*rect};
        g.must_touch = {*rect};
        out.push_back(std::move(g));
        break;
    }
    case Strategy::BetweenObjects: {
        if (goal.anchors.size() != 2)
            break;
        if (!view.footprint_of(goal.anchors[0]) || !view.footprint_of(goal.anchors[1]))
            break;
        auto recs_a = refine_receptacles_for(view, goal.anchors[0], *heading);
        auto recs_b = refine_receptacles_for(view, goal.anchors[1], *heading);
        for (int i = 1; i <= 8; ++i) {
            Direction d = static_cast<Direction>(i);
            auto ra = refined_rect(recs_a, d);
            auto rb = refined_rect(recs_b, opposite(d));
            if (!ra || !rb || !rects_connected(*ra, *rb))
                continue;
            GoalRegions g;
            g.region_rects = {*ra, *rb};
            g.must_touch = {*ra, *rb};
            out.push_back(std::move(g));
        }
        break;
    }
    }
    return out;
}

}  // namespace

std::optional<GoalRegions> goal_regions(const SceneGraph& graph, const PlacementGoal& goal,
                                        const std::string& exclude)
{
    auto cands = goal_region_candidates(graph, goal, exclude);
    if (cands.empty())
        return std::nullopt;
    return cands.front();
}

std::optional<Placement> feasible_placement(const SceneGraph& graph, const std::string& object_id,
                                            const PlacementGoal& goal, bool enforce_merge_limit)
{
    const SceneObject* obj = graph.find_object(object_id);
    const Platform* plat = graph.find_platform(goal.platform_id);
    if (!obj || !plat)
        return std::nullopt;
    if (2.0 * obj->half_extents.z > plat->clearance + kGeomEps)
        return std::nullopt;
    Footprint f = footprint_of(*obj);
    for (const GoalRegions& g : goal_region_candidates(graph, goal, object_id)) {
        FitOptions opts;
        opts.must_touch = g.must_touch;
        opts.center_in = g.center_in;
        Region region{g.region_rects};
        auto fit = max_inscribed_fit(f, region, kFitMargin, opts);
        if (!fit)
            continue;
        if (enforce_merge_limit && goal.strategy == Strategy::ToPlatform) {
            int covering = 0;
            for (const Rect& r : g.region_rects)
                if (overlaps(fit->rect, r))
                    ++covering;
            if (covering > kGenerationMergeLimit) {
                // Fall back to a fit inside a single receptacle.
                std::optional<Placement> single;
                for (const Rect& r : g.region_rects) {
                    single = max_inscribed_fit(f, Region{{r}}, kFitMargin);
                    if (single)
                        break;
                }
                if (!single)
                    continue;
                fit = single;
            }
        }
        return fit;
    }
    return std::nullopt;
}

bool goal_satisfied(const SceneGraph& graph, const std::string& object_id,
                    const PlacementGoal& goal)
{
    const SceneObject* obj = graph.find_object(object_id);
    if (!obj)
        return false;
    if (graph.platform_of(object_id) != goal.platform_id)
        return false;
    if (goal.strategy == Strategy::ToPlatform)
        return true;
    auto heading = canonical_heading(graph, goal.platform_id);
    if (!heading)
        return false;
    Rect fp = obj->footprint();
    const Platform* plat = graph.find_platform(goal.platform_id);
    PlatformView view = make_platform_view(graph, goal.platform_id, {object_id});

    switch (goal.strategy) {
    case Strategy::ToPlatformDir: {
        if (!goal.direction)
            return false;
        Rect cell = grid_cell_rect(plat->rect, *heading, cell_index_for(*goal.direction));
        return cell.contains_point(fp.center());
    }
    case Strategy::AroundObject: {
        if (goal.anchors.size() != 1 || !view.footprint_of(goal.anchors[0]))
            return false;
        for (const auto& r : refine_receptacles_for(view, goal.anchors[0], *heading))
            if (overlaps(r.rect, fp))
                return true;
        return false;
    }
    case Strategy::DirOfObject: {
        if (goal.anchors.size() != 1 || !goal.direction || !view.footprint_of(goal.anchors[0]))
            return false;
        auto recs = refine_receptacles_for(view, goal.anchors[0], *heading);
        auto rect = refined_rect(recs, *goal.direction);
        return rect && overlaps(*rect, fp);
    }
    case Strategy::BetweenObjects: {
        if (goal.anchors.size() != 2)
            return false;
        if (!view.footprint_of(goal.anchors[0]) || !view.footprint_of(goal.anchors[1]))
            return false;
        auto recs_a = refine_receptacles_for(view, goal.anchors[0], *heading);
        auto recs_b = refine_receptacles_for(view, goal.anchors[1], *heading);
        for (int i = 1; i <= 8; ++i) {
            Direction d = static_cast<Direction>(i);
            auto ra = refined_rect(recs_a, d);
            auto rb = refined_rect(recs_b, opposite(d));
            if (ra && rb && overlaps(*ra, fp) && overlaps(*rb, fp))
                return true;
        }
        return false;
    }
    default:
        return false;
    }
}

std::vector<std::string> movable_objects(const SceneGraph& graph)
{
    std::vector<std::string> out;
    for (const auto& obj : graph.objects) {
        std::string parent = graph.platform_of(obj.id);
        if (parent.empty() || !graph.platform_reachable(parent))
            continue;
        bool carries = false;
        for (const auto& p : graph.platforms) {
            if (p.owner != obj.id)
                continue;
            auto it = graph.children.find(p.id);
            if (it != graph.children.end() && !it->second.empty()) {
                carries = true;
                break;
            }
        }
        if (!carries)
            out.push_back(obj.id);
    }
    return out;
}

namespace {

std::vector<AtomicAction> derive_for_object(const SceneGraph& graph, const std::string& obj_id)
{
    std::vector<AtomicAction> out;
    auto try_emit = [&](PlacementGoal goal) {
        if (goal_satisfied(graph, obj_id, goal))
            return;  // no-op relocation
        if (feasible_placement(graph, obj_id, goal, /*enforce_merge_limit=*/true))
            out.push_back(AtomicAction{obj_id, std::move(goal)});
    };

    for (const auto& plat : graph.platforms) {
        if (plat.owner == obj_id || !graph.platform_reachable(plat.id))
            continue;

        try_emit(PlacementGoal{Strategy::ToPlatform, plat.id, std::nullopt, {}});

        std::vector<std::string> anchors;
        auto it = graph.children.find(plat.id);
        if (it != graph.children.end())
            for (const auto& child : it->second)
                if (child != obj_id)
                    anchors.push_back(child);

        if (anchors.empty()) {
            for (int i = 1; i <= 8; ++i)
                try_emit(PlacementGoal{Strategy::ToPlatformDir, plat.id,
                                       static_cast<Direction>(i), {}});
            continue;
        }
        for (const auto& anchor : anchors) {
            try_emit(PlacementGoal{Strategy::AroundObject, plat.id, std::nullopt, {anchor}});
            for (int i = 1; i <= 8; ++i)
                try_emit(PlacementGoal{Strategy::DirOfObject, plat.id, static_cast<Direction>(i),
                                       {anchor}});
        }
        for (size_t i = 0; i < anchors.size(); ++i)
            for (size_t j = i + 1; j < anchors.size(); ++j)
                try_emit(PlacementGoal{Strategy::BetweenObjects, plat.id, std::nullopt,
                                       {anchors[i], anchors[j]}});
    }
    return out;
}

std::string action_key(const AtomicAction& a)
{
    std::string key = a.object_id + "|" + strategy_name(a.goal.strategy) + "|"
        + a.goal.platform_id + "|";
    if (a.goal.direction)
        key += direction_label(*a.goal.direction);
    for (const auto& anchor : a.goal.anchors)
        key += "|" + anchor;
    return key;
}

std::string object_name(const SceneGraph& graph, const std::string& id)
{
    const SceneObject* obj = graph.find_object(id);
    return obj ? obj->name : id;
}

std::string render_step(const AtomicAction& a, const SceneGraph& graph)
{
    const std::string obj = object_name(graph, a.object_id);
    switch (a.goal.strategy) {
    case Strategy::ToPlatform:
        return "Move " + obj + " to " + a.goal.platform_id;
    case Strategy::ToPlatformDir:
        return "Move " + obj + " to the " + direction_label(*a.goal.direction) + " of "
            + a.goal.platform_id;
    case Strategy::AroundObject:
        return "Move " + obj + " around " + object_name(graph, a.goal.anchors[0]);
    case Strategy::DirOfObject:
        return "Move " + obj + " to " + object_name(graph, a.goal.anchors[0]) + "'s "
            + direction_label(*a.goal.direction) + " receptacles";
    case Strategy::BetweenObjects:
        return "Move " + obj + " between " + object_name(graph, a.goal.anchors[0]) + " and "
            + object_name(graph, a.goal.anchors[1]);
    }
    return "";
}

}  // namespace

std::vector<AtomicAction> derive_atomic_actions(const SceneGraph& graph)
{
    std::vector<AtomicAction> out;
    for (const auto& obj_id : movable_objects(graph)) {
        auto actions = derive_for_object(graph, obj_id);
        out.insert(out.end(), actions.begin(), actions.end());
    }
    return out;
}

int classify_level(const TaskSpec& task, const SceneGraph& graph)
{
    if (task.steps.size() == 2)
        return 3;
    if (task.steps.empty())
        return 4;
    const AtomicAction& step = task.steps[0];
    const SceneObject* obj = graph.find_object(step.object_id);
    if (!obj)
        return 1;
    std::string source = graph.platform_of(step.object_id);
    int same_category = 0;
    for (const SceneObject* sibling : graph.objects_on(source))
        if (sibling->category() == obj->category())
            ++same_category;
    return same_category >= 2 ? 2 : 1;
}

std::string render_instruction(const TaskSpec& task, const SceneGraph& graph)
{
    std::string text;
    for (size_t i = 0; i < task.steps.size(); ++i) {
        if (i > 0)
            text += " " + (task.connector.empty() ? std::string("THEN") : task.connector) + " ";
        text += render_step(task.steps[i], graph);
    }
    return text;
}

TaskSet sample_process_tasks(const SceneGraph& graph, int count, int max_steps,
                             const std::vector<std::string>& connectors, uint64_t seed)
{
    if (max_steps < 1 || max_steps > 2)
        throw TaskGenError("taskgen: max_steps must be 1 or 2");
    std::mt19937_64 rng(seed);
    std::vector<std::string> conns = connectors.empty()
        ? std::vector<std::string>{"THEN"} : connectors;

    TaskSet result;
    auto finalize = [&](TaskSpec task) {
        task.level = classify_level(task, graph);
        task.instruction = render_instruction(task, graph);
        if (task.level == 2) {
            const AtomicAction& step = task.steps[0];
            task.ambiguity_brief = "The task involves identical objects. The object to move is "
                + object_name(graph, step.object_id) + ", located on "
                + graph.platform_of(step.object_id) + ".";
        }
        task.task_id = "t" + std::to_string(result.tasks.size() + 1);
        result.tasks.push_back(std::move(task));
    };

    if (max_steps == 1) {
        std::vector<AtomicAction> all = derive_atomic_actions(graph);
        // Explicit Fisher-Yates so the order is pinned by the seed alone.
        for (size_t i = all.size(); i > 1; --i)
            std::swap(all[i - 1], all[rng() % i]);
        if (static_cast<int>(all.size()) < count)
            result.insufficient = true;
        size_t take = std::min<size_t>(count, all.size());
        for (size_t i = 0; i < take; ++i)
            finalize(TaskSpec{"", 1, "", {all[i]}, "", "", {}, ""});
        return result;
    }

    // Two-step tasks: sample step 1, simulate it, re-derive step 2 from the
    // updated state so the chain is feasible sequentially.
    std::vector<AtomicAction> all = derive_atomic_actions(graph);
    if (all.empty()) {
        result.insufficient = count > 0;
        return result;
    }
    std::set<std::string> seen;
    int attempts = 0;
    const int max_attempts = count * 20 + 20;
    while (static_cast<int>(result.tasks.size()) < count && attempts++ < max_attempts) {
        const AtomicAction& first = all[rng() % all.size()];
        auto place1 = feasible_placement(graph, first.object_id, first.goal, true);
        if (!place1)
            continue;
        SceneGraph scratch = graph;
        Rect fp1{place1->rect.xmin + kFitMargin, place1->rect.ymin + kFitMargin,
                 place1->rect.xmax - kFitMargin, place1->rect.ymax - kFitMargin};
        scratch.relocate(first.object_id, first.goal.platform_id, fp1);

        std::vector<std::string> pool = movable_objects(scratch);
        pool.erase(std::remove(pool.begin(), pool.end(), first.object_id), pool.end());
        if (pool.empty())
            continue;
        std::optional<AtomicAction> second;
        for (int t = 0; t < 5 && !second; ++t) {
            const std::string& obj2 = pool[rng() % pool.size()];
            auto acts = derive_for_object(scratch, obj2);
            if (acts.empty())
                continue;
            // The second relocation must leave the first goal intact at the
            // end of the episode, so keep only candidates whose simulated
            // placement still judges the first step as satisfied.
            const AtomicAction& cand = acts[rng() % acts.size()];
            auto place2 = feasible_placement(scratch, cand.object_id, cand.goal, true);
            if (!place2)
                continue;
            SceneGraph after = scratch;
            Rect fp2{place2->rect.xmin + kFitMargin, place2->rect.ymin + kFitMargin,
                     place2->rect.xmax - kFitMargin, place2->rect.ymax - kFitMargin};
            after.relocate(cand.object_id, cand.goal.platform_id, fp2);
            if (!judge_step(after, first).satisfied)
                continue;
            second = cand;
        }
        if (!second)
            continue;
        TaskSpec task{"", 3, "", {first, *second},
                      conns[conns.size() == 1 ? 0 : rng() % conns.size()], "", {}, ""};
        std::string key = action_key(first) + "||" + action_key(*second) + "||" + task.connector;
        if (!seen.insert(key).second)
            continue;
        finalize(std::move(task));
    }
    if (static_cast<int>(result.tasks.size()) < count)
        result.insufficient = true;
    return result;
}

// ---- Level 4 ----

std::vector<OutcomeTemplate> load_templates(const std::string& json_text)
{
    json doc = json::parse(json_text);
    if (!doc.is_array())
        throw TaskGenError("templates: top level must be an array");
    std::vector<OutcomeTemplate> out;
    for (const auto& jt : doc) {
        if (!jt.contains("id") || !jt.contains("text"))
            throw TaskGenError("templates: entries need 'id' and 'text'");
        out.push_back(OutcomeTemplate{jt["id"].get<std::string>(), jt["text"].get<std::string>()});
    }
    return out;
}

namespace {

struct Placeholder {
    std::string full;  // e.g. "[SUB-PLATFORM-OBJECTS00]"
    std::string kind;  // PLATFORM | SUB-PLATFORM-OBJECTS | SUB-PLATFORM-CATEGORY-OBJECTS
    int k = 0;
    int j = 0;
};

std::vector<Placeholder> parse_placeholders(const std::string& text)
{
    static const std::regex pat(
        R"(\[(PLATFORM|SUB-PLATFORM-OBJECTS|SUB-PLATFORM-CATEGORY-OBJECTS|SUB-OBJECTS)(\d)(\d)?\])");
    std::vector<Placeholder> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), pat);
         it != std::sregex_iterator(); ++it) {
        Placeholder p;
        p.full = (*it)[0];
        p.kind = (*it)[1];
        if (p.kind == "SUB-OBJECTS")  // undocumented shorthand, same meaning
            p.kind = "SUB-PLATFORM-OBJECTS";
        p.k = (*it)[2].str()[0] - '0';
        p.j = (*it)[3].matched ? (*it)[3].str()[0] - '0' : 0;
        out.push_back(std::move(p));
    }
    return out;
}

std::string replace_all_copy(std::string text, const std::string& from, const std::string& to)
{
    size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

}  // namespace

TaskSet instantiate_outcome_templates(const std::vector<OutcomeTemplate>& templates,
                                      const SceneGraph& graph, uint64_t seed, int count)
{
    if (templates.empty())
        throw TaskGenError("templates: empty template set");
    std::mt19937_64 rng(seed);
    TaskSet result;
    std::set<std::string> seen;
    bool any_bindable = false;
    int attempts = 0;
    const int max_attempts = count * 20 + 20;
    while (static_cast<int>(result.tasks.size()) < count && attempts < max_attempts) {
        const OutcomeTemplate& tmpl = templates[attempts % templates.size()];
        ++attempts;
        auto placeholders = parse_placeholders(tmpl.text);

        // Which k-slots need an occupied platform / a duplicated category?
        std::map<int, bool> needs_children, needs_category;
        for (const auto& p : placeholders) {
            if (p.kind == "SUB-PLATFORM-OBJECTS")
                needs_children[p.k] = true;
            if (p.kind == "SUB-PLATFORM-CATEGORY-OBJECTS")
                needs_category[p.k] = true;
        }
        std::set<int> slots;
        for (const auto& p : placeholders)
            slots.insert(p.k);

        std::map<int, std::string> platform_for;
        std::set<std::string> used;
        bool ok = true;
        for (int k : slots) {
            std::vector<std::string> cands;
            for (const auto& pid : graph.reachable_platform_ids()) {
                if (used.count(pid))
                    continue;
                auto kids = graph.objects_on(pid);
                if ((needs_children.count(k) || needs_category.count(k)) && kids.empty())
                    continue;
                if (needs_category.count(k)) {
                    std::map<std::string, int> cats;
                    bool has_dup = false;
                    for (const auto* o : kids)
                        if (++cats[o->category()] >= 2)
                            has_dup = true;
                    if (!has_dup)
                        continue;
                }
                cands.push_back(pid);
            }
            if (cands.empty()) {
                ok = false;
                break;
            }
            std::string pick = cands[rng() % cands.size()];
            platform_for[k] = pick;
            used.insert(pick);
        }
        if (!ok)
            continue;
        any_bindable = true;

        TaskSpec task;
        task.level = 4;
        task.template_id = tmpl.id;
        std::string text = tmpl.text;
        for (const auto& p : placeholders) {
            std::string key = p.kind + std::to_string(p.k)
                + (p.kind == "PLATFORM" ? "" : std::to_string(p.j));
            std::string value;
            const std::string& pid = platform_for[p.k];
            if (p.kind == "PLATFORM") {
                value = pid;
            } else if (p.kind == "SUB-PLATFORM-OBJECTS") {
                std::string joined;
                for (const auto* o : graph.objects_on(pid)) {
                    if (!joined.empty())
                        joined += ", ";
                    joined += o->name;
                }
                value = joined;
            } else {  // SUB-PLATFORM-CATEGORY-OBJECTS
                std::map<std::string, int> cats;
                for (const auto* o : graph.objects_on(pid))
                    ++cats[o->category()];
                std::vector<std::string> dups;
                for (const auto& [cat, n] : cats)
                    if (n >= 2)
                        dups.push_back(cat);
                value = dups[rng() % dups.size()];
            }
            task.bindings[key] = value;
            text = replace_all_copy(text, p.full, value);
        }
        task.instruction = text;
        std::string dedup = tmpl.id;
        for (const auto& [k, v] : task.bindings)
            dedup += "|" + k + "=" + v;
        if (!seen.insert(dedup).second)
            continue;
        task.task_id = "ot" + std::to_string(result.tasks.size() + 1);
        result.tasks.push_back(std::move(task));
    }
    if (!any_bindable && count > 0)
        throw UnboundPlaceholder("templates: no template can be bound in this scene");
    if (static_cast<int>(result.tasks.size()) < count)
        result.insufficient = true;
    return result;
}

std::optional<Verdict> parse_verdict(const std::string& reply)
{
    std::istringstream in(reply);
    std::string line;
    while (std::getline(in, line)) {
        size_t a = line.find_first_not_of(" \t\r\"'");
        size_t b = line.find_last_not_of(" \t\r\"'.");
        if (a == std::string::npos)
            continue;
        std::string t = line.substr(a, b - a + 1);
        std::transform(t.begin(), t.end(), t.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (t == "feasible")
            return Verdict::Feasible;
        if (t == "partially feasible")
            return Verdict::PartiallyFeasible;
        if (t == "not feasible")
            return Verdict::NotFeasible;
    }
    return std::nullopt;
}

std::string assessment_prompt(const TaskSpec& candidate, const SceneGraph& graph)
{
    std::ostringstream out;
    out << "You are assessing whether a household rearrangement task can be carried out"
           " in the scene described below.\n";
    out << "Task: " << candidate.instruction << "\n";
    auto it = candidate.bindings.find("PLATFORM0");
    std::string pid = it != candidate.bindings.end() ? it->second : "";
    out << "Platform under assessment: " << pid << "\n";
    out << "Platform inventory:\n";
    for (const auto& [key, value] : candidate.bindings) {
        if (key.rfind("PLATFORM", 0) != 0)
            continue;
        const Platform* p = graph.find_platform(value);
        if (!p)
            continue;
        out << "- " << value << ": " << p->rect.width() << "x" << p->rect.depth()
            << " m, objects:";
        auto kids = graph.objects_on(value);
        if (kids.empty()) {
            out << " (empty)";
        } else {
            for (const auto* o : kids)
                out << " " << o->name;
        }
        out << "\n";
    }
    out << "Only output a single line: 'Feasible', 'Partially feasible', or 'Not feasible'.\n";
    return out.str();
}

std::optional<std::string> HeuristicJudge::assess(const std::string& prompt)
{
    // Unbound placeholders surviving into the task text mean the candidate is
    // not grounded in this scene.
    if (prompt.find("[PLATFORM") != std::string::npos
        || prompt.find("[SUB-") != std::string::npos)
        return "Not feasible";
    std::string pid;
    std::istringstream in(prompt);
    std::string line;
    const std::string tag = "Platform under assessment: ";
    while (std::getline(in, line)) {
        if (line.rfind(tag, 0) == 0) {
            pid = line.substr(tag.size());
            break;
        }
    }
    const Platform* p = graph_.find_platform(pid);
    if (!p)
        return "Not feasible";
    auto movable = movable_objects(graph_);
    bool has_movable = false;
    double used = 0.0;
    for (const auto* o : graph_.objects_on(pid)) {
        used += o->footprint().area();
        if (std::find(movable.begin(), movable.end(), o->id) != movable.end())
            has_movable = true;
    }
    if (!has_movable)
        return "Not feasible";
    if (p->rect.area() - used < 0.3 * p->rect.area())
        return "Not feasible";
    return "Feasible";
}

VoteResult vote_feasibility(const TaskSpec& candidate, const SceneGraph& graph,
                            const std::array<Judge*, 3>& judges)
{
    std::string prompt = assessment_prompt(candidate, graph);
    VoteResult result;
    for (Judge* judge : judges) {
        Verdict v = Verdict::NotFeasible;
        auto reply = judge->assess(prompt);
        if (reply) {
            auto parsed = parse_verdict(*reply);
            if (!parsed) {
                // One retry on an unparseable reply, then count as NotFeasible.
                reply = judge->assess(prompt);
                if (reply)
                    parsed = parse_verdict(*reply);
            }
            if (parsed)
                v = *parsed;
        }
        result.votes.push_back(v);
    }
    int feasible = 0;
    for (Verdict v : result.votes)
        if (v == Verdict::Feasible)
            ++feasible;
    result.accepted = feasible >= 2;
    return result;
}

// ---- Serialization ----

std::string task_to_jsonl(const TaskSpec& task)
{
    json j;
    j["task_id"] = task.task_id;
    j["level"] = task.level;
    j["instruction"] = task.instruction;
    if (!task.connector.empty())
        j["connector"] = task.connector;
    json steps = json::array();
    for (const auto& step : task.steps) {
        json js;
        js["object"] = step.object_id;
        js["strategy"] = strategy_name(step.goal.strategy);
        js["platform"] = step.goal.platform_id;
        if (step.goal.direction)
            js["direction"] = direction_label(*step.goal.direction);
        if (!step.goal.anchors.empty())
            js["anchors"] = step.goal.anchors;
        steps.push_back(js);
    }
    j["steps"] = steps;
    if (!task.template_id.empty())
        j["template_id"] = task.template_id;
    if (!task.bindings.empty())
        j["bindings"] = task.bindings;
    return j.dump();
}

TaskSpec task_from_jsonl(const std::string& line)
{
    json j = json::parse(line);
    TaskSpec task;
    task.task_id = j.at("task_id").get<std::string>();
    task.level = j.at("level").get<int>();
    task.instruction = j.at("instruction").get<std::string>();
    if (j.contains("connector"))
        task.connector = j["connector"].get<std::string>();
    if (j.contains("steps")) {
        for (const auto& js : j["steps"]) {
            AtomicAction step;
            step.object_id = js.at("object").get<std::string>();
            auto strat = strategy_from_name(js.at("strategy").get<std::string>());
            if (!strat)
                throw TaskGenError("task: unknown strategy in '" + line + "'");
            step.goal.strategy = *strat;
            step.goal.platform_id = js.at("platform").get<std::string>();
            if (js.contains("direction")) {
                auto d = direction_from_label(js["direction"].get<std::string>());
                if (!d)
                    throw TaskGenError("task: unknown direction in '" + line + "'");
                step.goal.direction = d;
            }
            if (js.contains("anchors"))
                step.goal.anchors = js["anchors"].get<std::vector<std::string>>();
            task.steps.push_back(std::move(step));
        }
    }
    if (j.contains("template_id"))
        task.template_id = j["template_id"].get<std::string>();
    if (j.contains("bindings"))
        task.bindings = j["bindings"].get<std::map<std::string, std::string>>();
    return task;
}

}  // namespace mbench
