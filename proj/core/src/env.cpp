#include "mbench/env.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

namespace mbench {

namespace {

std::string first_line_trimmed(const std::string& text)
{
    std::string line = text.substr(0, text.find('\n'));
    const char* junk = " \t\r\"'`";
    size_t a = line.find_first_not_of(junk);
    if (a == std::string::npos)
        return "";
    size_t b = line.find_last_not_of(junk);
    return line.substr(a, b - a + 1);
}

std::string to_lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::optional<PlaceS> parse_place_s(const std::string& body)
{
    // body is the text between the brackets of place_s_[...].
    static const std::regex pair_pat(R"(\(\s*(\d+)\s*,\s*(\d+)\s*\))");
    static const std::regex int_pat(R"(\d+)");
    PlaceS cmd;
    std::string rest = body;
    if (body.find('(') != std::string::npos) {
        auto begin = std::sregex_iterator(body.begin(), body.end(), pair_pat);
        std::string matched;
        for (auto it = begin; it != std::sregex_iterator(); ++it) {
            cmd.pairs.emplace_back(std::stoi((*it)[1]), std::stoi((*it)[2]));
            matched += (*it)[0];
        }
        if (cmd.pairs.empty())
            return std::nullopt;
        // Reject leftovers other than separators (catches malformed mixes).
        std::string stripped;
        for (char c : body)
            if (!isspace(static_cast<unsigned char>(c)) && c != ',')
                stripped += c;
        std::string matched_stripped;
        for (char c : matched)
            if (!isspace(static_cast<unsigned char>(c)) && c != ',')
                matched_stripped += c;
        if (stripped != matched_stripped)
            return std::nullopt;
        return cmd;
    }
    for (auto it = std::sregex_iterator(body.begin(), body.end(), int_pat);
         it != std::sregex_iterator(); ++it)
        cmd.cells.push_back(std::stoi((*it)[0]));
    if (cmd.cells.empty())
        return std::nullopt;
    return cmd;
}

}  // namespace

std::optional<ActionCommand> parse_action(const std::string& text, bool strict)
{
    std::string line = first_line_trimmed(text);
    if (line.empty())
        return std::nullopt;
    if (to_lower(line) == "call_end")
        return CallEnd{};
    if (line == "change_view" || line == "rotate_observation_view_of_current_platform")
        return ChangeView{};
    if (line == "place_r")
        return PlaceR{};
    if (line.rfind("go_to_", 0) == 0) {
        std::string pid = line.substr(6);
        if (pid.empty())
            return std::nullopt;
        return GoTo{pid};
    }
    {
        static const std::regex pick_strict(R"(pick_object_(\d+)_of_current_platform)");
        static const std::regex pick_loose(R"(pick_(\d+)_of_current_platform)");
        std::smatch m;
        if (std::regex_match(line, m, pick_strict))
            return Pick{std::stoi(m[1])};
        if (!strict && std::regex_match(line, m, pick_loose))
            return Pick{std::stoi(m[1])};
    }
    {
        static const std::regex show_strict(R"(show_receptacle_of_object_(\d+)_of_current_platform)");
        static const std::regex show_loose(R"(show_receptacles?_of_(?:object_)?(\d+)_of_current_platform)");
        std::smatch m;
        if (std::regex_match(line, m, show_strict))
            return ShowReceptacle{std::stoi(m[1])};
        if (!strict && std::regex_match(line, m, show_loose))
            return ShowReceptacle{std::stoi(m[1])};
    }
    if (line.rfind("place_s_[", 0) == 0 && line.back() == ']') {
        auto cmd = parse_place_s(line.substr(9, line.size() - 10));
        if (!cmd)
            return std::nullopt;
        return *cmd;
    }
    return std::nullopt;
}

std::optional<Heading> current_heading(const EpisodeState& state)
{
    if (state.location_ground.empty())
        return std::nullopt;
    auto it = state.graph.walkable.find(state.location_ground);
    if (it == state.graph.walkable.end() || it->second.empty())
        return std::nullopt;
    const auto& spaces = it->second;
    int idx = state.walk_index % static_cast<int>(spaces.size());
    const SceneObject* g = state.graph.find_object(state.location_ground);
    return heading_for(*g, spaces[idx]);
}

Vec2 robot_position(const EpisodeState& state)
{
    if (state.location_ground.empty())
        return state.graph.bounds.center();
    const auto& spaces = state.graph.walkable.at(state.location_ground);
    int idx = state.walk_index % static_cast<int>(spaces.size());
    return spaces[idx].strip.center();
}

namespace {

void rebuild_index_map(EpisodeState& state)
{
    state.index_map.clear();
    state.shown.clear();
    if (state.current_platform.empty())
        return;
    auto heading = current_heading(state);
    if (!heading)
        return;
    Vec2 right = heading->right();
    struct Entry {
        double u;
        std::string name;
        std::string id;
    };
    std::vector<Entry> entries;
    for (const SceneObject* obj : state.graph.objects_on(state.current_platform)) {
        Vec2 c = obj->footprint().center();
        entries.push_back(Entry{c.x * right.x + c.y * right.y, obj->name, obj->id});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (std::abs(a.u - b.u) > kGeomEps)
            return a.u < b.u;
        if (a.name != b.name)
            return a.name < b.name;
        return a.id < b.id;
    });
    int i = 1;
    for (const auto& e : entries)
        state.index_map[i++] = e.id;
}

std::string display_name(const EpisodeState& state, const std::string& object_id)
{
    const SceneObject* obj = state.graph.find_object(object_id);
    if (!obj)
        return object_id;
    int same = 0;
    for (const SceneObject* other : state.graph.objects_on(state.current_platform))
        if (other->category() == obj->category())
            ++same;
    return same >= 2 ? obj->category() : obj->name;
}

std::pair<double, double> heading_extents(const Rect& r, const Heading& h)
{
    // Width along the robot's left-right axis, depth along front-rear.
    if (std::abs(h.front.x) > 0.5)
        return {r.depth(), r.width()};
    return {r.width(), r.depth()};
}

std::string fmt2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::vector<PairOption> available_pairs(const EpisodeState& state)
{
    std::vector<PairOption> out;
    if (state.current_platform.empty())
        return out;
    auto heading = current_heading(state);
    if (!heading)
        return out;
    PlatformView view = make_platform_view(state.graph, state.current_platform);
    for (const auto& [idx, object_id] : state.index_map) {
        for (const Receptacle& r : refine_receptacles_for(view, object_id, *heading))
            out.push_back(PairOption{idx, direction_index(r.direction), r});
    }
    return out;
}

std::vector<GridCell> available_cells(const EpisodeState& state)
{
    std::vector<GridCell> out;
    if (state.current_platform.empty() || !state.index_map.empty())
        return out;
    auto heading = current_heading(state);
    if (!heading)
        return out;
    PlatformView view = make_platform_view(state.graph, state.current_platform);
    return segment_empty_platform(view, *heading);
}

Observation render_observation(const EpisodeState& state)
{
    Observation obs;
    std::ostringstream out;
    if (!state.pending_notice.empty())
        out << state.pending_notice << "\n";
    out << "Task: " << state.task.instruction << "\n";
    if (state.steps_used == 0 && state.current_platform.empty()) {
        for (const auto& step : state.task.steps) {
            std::string platform = state.initial.platform_of(step.object_id);
            const SceneObject* obj = state.initial.find_object(step.object_id);
            if (obj && !platform.empty())
                out << "Initially, " << obj->name << " is on " << platform << ".\n";
        }
        if (!state.task.ambiguity_brief.empty())
            out << state.task.ambiguity_brief << "\n";
    }
    if (state.current_platform.empty())
        out << "You are at the starting position.\n";
    else
        out << "You are currently at " << state.current_platform << ".\n";
    if (state.held.empty()) {
        out << "You are not holding anything.\n";
    } else {
        const SceneObject* obj = state.graph.find_object(state.held);
        out << "You are holding " << (obj ? obj->name : state.held) << ".\n";
    }
    if (!state.current_platform.empty()) {
        out << "Objects on the current platform:\n";
        if (state.index_map.empty())
            out << "(none)\n";
        for (const auto& [idx, id] : state.index_map)
            out << "object_" << idx << ": " << display_name(state, id) << "\n";
        auto heading = current_heading(state);
        for (const auto& [idx, recs] : state.shown) {
            out << "Receptacles of object_" << idx << ":\n";
            for (const Receptacle& r : recs) {
                auto [w, d] = heading_extents(r.rect, *heading);
                out << "(" << idx << "," << direction_index(r.direction) << ") "
                    << direction_label(r.direction) << " " << fmt2(w) << "x" << fmt2(d)
                    << " m\n";
            }
        }
    }

    // Advertised action space; these strings are exactly what parse_action and
    // the state machine accept here.
    for (const auto& pid : state.graph.reachable_platform_ids())
        obs.actions.push_back("go_to_" + pid);
    if (!state.current_platform.empty()) {
        obs.actions.push_back("change_view");
        if (state.held.empty()) {
            for (const auto& [idx, id] : state.index_map) {
                obs.actions.push_back("pick_object_" + std::to_string(idx)
                                      + "_of_current_platform");
            }
        }
        for (const auto& [idx, id] : state.index_map)
            obs.actions.push_back("show_receptacle_of_object_" + std::to_string(idx)
                                  + "_of_current_platform");
        if (!state.held.empty()) {
            obs.actions.push_back("place_r");
            for (const PairOption& p : available_pairs(state))
                obs.actions.push_back("place_s_[(" + std::to_string(p.object_index) + ","
                                      + std::to_string(p.dir_index) + ")]");
            for (const GridCell& c : available_cells(state))
                obs.actions.push_back("place_s_[" + std::to_string(c.index) + "]");
        }
    }
    obs.actions.push_back("CALL_END");

    out << "Your available action space:\n";
    for (const auto& a : obs.actions)
        out << a << "\n";
    out << "Steps used: " << state.steps_used << "/" << state.step_limit
        << ". You can only take at most " << state.step_limit
        << " steps, so hurry if you've almost used all of them!\n";
    obs.text = out.str();
    return obs;
}

std::pair<EpisodeState, Observation> reset(const TaskSpec& task, const SceneGraph& graph,
                                           uint64_t seed, bool strict)
{
    EpisodeState state;
    state.task = task;
    state.graph = graph;
    state.initial = graph;
    state.seed = seed;
    state.strict = strict;
    state.step_limit = task.level == 3 ? kStepLimitDouble : kStepLimitSingle;
    state.rng.seed(seed);

    for (const auto& step : task.steps) {
        std::string source = graph.platform_of(step.object_id);
        if (source.empty() || !graph.platform_reachable(source)
            || !graph.platform_reachable(step.goal.platform_id))
            throw UnreachableTask("env: task '" + task.task_id
                                  + "' references an unreachable platform");
    }
    if (task.level == 2 && state.task.ambiguity_brief.empty() && !task.steps.empty()) {
        const SceneObject* obj = graph.find_object(task.steps[0].object_id);
        state.task.ambiguity_brief =
            "The task involves identical objects. The object to move is "
            + (obj ? obj->name : task.steps[0].object_id) + ", located on "
            + graph.platform_of(task.steps[0].object_id) + ".";
    }
    return {std::move(state), render_observation(state)};
}

namespace {

void arrive(EpisodeState& state, const std::string& platform_id)
{
    const SceneObject* ground = state.graph.ground_owner(platform_id);
    const auto& spaces = state.graph.walkable.at(ground->id);
    Vec2 from = robot_position(state);
    int best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (size_t i = 0; i < spaces.size(); ++i) {
        Vec2 c = spaces[i].strip.center();
        double d = std::hypot(c.x - from.x, c.y - from.y);
        if (d < best_d - kGeomEps) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    state.location_ground = ground->id;
    state.walk_index = best;
    state.current_platform = platform_id;
    rebuild_index_map(state);
}

void place_object(EpisodeState& state, const Placement& placement, TraceStep& rec,
                  bool fallback)
{
    Rect fp{placement.rect.xmin + kFitMargin, placement.rect.ymin + kFitMargin,
            placement.rect.xmax - kFitMargin, placement.rect.ymax - kFitMargin};
    state.graph.relocate(state.held, state.current_platform, fp);
    rec.placed_object = state.held;
    rec.placed_platform = state.current_platform;
    rec.placed_rect = fp;
    rec.fallback_place = fallback;
    state.held.clear();
    rebuild_index_map(state);
    if (fallback)
        state.pending_notice =
            "The object has been placed successfully. Note: it could not overlap every "
            "selected receptacle, so it was placed within the merged space you chose.";
    else
        state.pending_notice = "The object has been placed successfully.";
}

}  // namespace

std::pair<Observation, StepStatus> step(EpisodeState& state, const std::string& action_text)
{
    if (state.terminated)
        throw EnvError("env: step on a terminated episode");

    TraceStep rec;
    rec.step = state.steps_used + 1;
    rec.action_raw = first_line_trimmed(action_text);
    state.pending_notice.clear();

    auto reject = [&](const std::string& why) {
        rec.rejected = true;
        state.pending_notice = "Invalid action: " + why
            + " Please choose one of the actions from the available action space.";
    };

    auto parsed = parse_action(action_text, state.strict);
    if (!parsed) {
        rec.action_kind = "invalid";
        reject("the input could not be recognized as an action.");
    } else if (std::holds_alternative<CallEnd>(*parsed)) {
        rec.action_kind = "call_end";
        state.terminated = true;
    } else if (auto* go = std::get_if<GoTo>(&*parsed)) {
        rec.action_kind = "go_to";
        const Platform* p = state.graph.find_platform(go->platform_id);
        if (!p || !state.graph.platform_reachable(go->platform_id))
            reject("unknown or unreachable platform.");
        else
            arrive(state, go->platform_id);
    } else if (std::holds_alternative<ChangeView>(*parsed)) {
        rec.action_kind = "change_view";
        if (state.current_platform.empty()) {
            reject("you are not at a platform.");
        } else {
            const auto& spaces = state.graph.walkable.at(state.location_ground);
            if (spaces.size() <= 1) {
                state.pending_notice = "Unable to rotate to another view. The platform you at "
                                       "only have 1 walkable place for you.";
            } else {
                state.walk_index = (state.walk_index + 1) % static_cast<int>(spaces.size());
                rebuild_index_map(state);
            }
        }
    } else if (auto* pick = std::get_if<Pick>(&*parsed)) {
        rec.action_kind = "pick";
        if (state.current_platform.empty())
            reject("you are not at a platform.");
        else if (!state.held.empty())
            reject("you are already holding an object.");
        else if (!state.index_map.count(pick->index))
            reject("there is no such object on the current platform.");
        else {
            std::string id = state.index_map.at(pick->index);
            state.held = id;
            state.graph.detach(id);
            rec.picked_object = id;
            rebuild_index_map(state);
            const SceneObject* obj = state.graph.find_object(id);
            state.pending_notice = "You are now holding " + (obj ? obj->name : id) + ".";
        }
    } else if (auto* show = std::get_if<ShowReceptacle>(&*parsed)) {
        rec.action_kind = "show_receptacle";
        if (state.current_platform.empty())
            reject("you are not at a platform.");
        else if (!state.index_map.count(show->index))
            reject("there is no such object on the current platform.");
        else {
            auto heading = current_heading(state);
            PlatformView view = make_platform_view(state.graph, state.current_platform);
            state.shown[show->index] =
                refine_receptacles_for(view, state.index_map.at(show->index), *heading);
        }
    } else if (std::holds_alternative<PlaceR>(*parsed)) {
        rec.action_kind = "place_r";
        if (state.current_platform.empty())
            reject("you are not at a platform.");
        else if (state.held.empty())
            reject("you are not holding anything.");
        else {
            const SceneObject* obj = state.graph.find_object(state.held);
            Footprint f{obj->footprint().width(), obj->footprint().depth()};
            std::vector<Placement> fits;
            if (state.index_map.empty()) {
                for (const GridCell& c : available_cells(state))
                    if (auto fit = max_inscribed_fit(f, Region{{c.rect}}, kFitMargin))
                        fits.push_back(*fit);
            } else {
                for (const PairOption& p : available_pairs(state))
                    if (auto fit = max_inscribed_fit(f, Region{{p.receptacle.rect}}, kFitMargin))
                        fits.push_back(*fit);
            }
            if (fits.empty())
                state.pending_notice =
                    "The object does not fit in any single receptacle here; nothing was placed.";
            else
                place_object(state, fits[state.rng() % fits.size()], rec, false);
        }
    } else if (auto* ps = std::get_if<PlaceS>(&*parsed)) {
        rec.action_kind = "place_s";
        if (state.current_platform.empty())
            reject("you are not at a platform.");
        else if (state.held.empty())
            reject("you are not holding anything.");
        else {
            bool occupied = !state.index_map.empty();
            std::vector<Rect> selection;
            bool ok = true;
            if (occupied) {
                if (ps->pairs.empty()) {
                    reject("this platform requires (object, receptacle) pairs.");
                    ok = false;
                }
                auto pairs = available_pairs(state);
                for (const auto& [oi, di] : ps->pairs) {
                    if (!ok)
                        break;
                    bool found = false;
                    for (const PairOption& p : pairs) {
                        if (p.object_index == oi && p.dir_index == di) {
                            selection.push_back(p.receptacle.rect);
                            found = true;
                            break;
                        }
                    }
                    if (!found) {
                        reject("receptacle (" + std::to_string(oi) + "," + std::to_string(di)
                               + ") does not exist.");
                        ok = false;
                    }
                }
            } else {
                if (ps->cells.empty()) {
                    reject("this platform is empty; use grid indices 1..9.");
                    ok = false;
                }
                auto cells = available_cells(state);
                for (int c : ps->cells) {
                    if (!ok)
                        break;
                    if (c < 1 || c > 9) {
                        reject("grid index " + std::to_string(c) + " is out of range.");
                        ok = false;
                        break;
                    }
                    selection.push_back(cells[c - 1].rect);
                }
            }
            if (ok) {
                try {
                    Region region = merge_receptacles(selection);
                    const SceneObject* obj = state.graph.find_object(state.held);
                    Footprint f{obj->footprint().width(), obj->footprint().depth()};
                    FitOptions opts;
                    opts.must_touch = selection;
                    if (auto fit = max_inscribed_fit(f, region, kFitMargin, opts)) {
                        place_object(state, *fit, rec, false);
                    } else if (auto loose = max_inscribed_fit(f, region, kFitMargin)) {
                        place_object(state, *loose, rec, true);
                    } else {
                        state.pending_notice =
                            "The object cannot fit in the selected receptacles; "
                            "nothing was placed.";
                    }
                } catch (const Disconnected&) {
                    reject("the selected receptacles are not connected.");
                }
            }
        }
    }

    ++state.steps_used;
    if (state.steps_used >= state.step_limit)
        state.terminated = true;

    rec.notice = state.pending_notice;
    rec.location = state.current_platform.empty() ? "start" : state.current_platform;
    rec.held = state.held;
    state.trace.push_back(rec);

    Observation obs = render_observation(state);
    return {obs, state.terminated ? StepStatus::Ended : StepStatus::Running};
}

}  // namespace mbench
