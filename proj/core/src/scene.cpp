#include "mbench/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mbench {

using nlohmann::json;

namespace {

const std::regex kNamePattern("[A-Za-z]+(_[A-Za-z0-9]+)+");

double require_number(const json& j, const char* field)
{
    if (!j.contains(field) || !j[field].is_number())
        throw SchemaError(std::string("scene: missing or non-numeric field '") + field + "'");
    return j[field].get<double>();
}

std::string require_string(const json& j, const char* field)
{
    if (!j.contains(field) || !j[field].is_string())
        throw SchemaError(std::string("scene: missing or non-string field '") + field + "'");
    return j[field].get<std::string>();
}

std::vector<double> require_array(const json& j, const char* field, size_t n)
{
    if (!j.contains(field) || !j[field].is_array() || j[field].size() != n)
        throw SchemaError(std::string("scene: field '") + field + "' must be an array of "
                          + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (const auto& v : j[field]) {
        if (!v.is_number())
            throw SchemaError(std::string("scene: field '") + field + "' must be numeric");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

LoadedScene load_scene(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("scene: invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw SchemaError("scene: top level must be an object");

    LoadedScene scene;
    scene.name = require_string(doc, "name");
    auto b = require_array(doc, "bounds", 4);
    scene.bounds = Rect::make(b[0], b[1], b[2], b[3]);

    if (!doc.contains("objects") || !doc["objects"].is_array())
        throw SchemaError("scene: missing 'objects' array");

    std::set<std::string> ids;
    for (const auto& jo : doc["objects"]) {
        SceneObject obj;
        obj.id = require_string(jo, "id");
        obj.name = require_string(jo, "name");
        if (!ids.insert(obj.id).second)
            throw DuplicateId("scene: duplicate object id '" + obj.id + "'");
        if (!std::regex_match(obj.name, kNamePattern))
            throw MalformedName("scene: object name '" + obj.name
                                + "' is not '{category}_{specific}'");
        auto pos = require_array(jo, "position", 3);
        obj.position = {pos[0], pos[1], pos[2]};
        auto he = require_array(jo, "half_extents", 3);
        if (he[0] <= 0 || he[1] <= 0 || he[2] <= 0)
            throw SchemaError("scene: half_extents must be positive for '" + obj.id + "'");
        obj.half_extents = {he[0], he[1], he[2]};
        obj.yaw_degrees = jo.contains("yaw_degrees") ? require_number(jo, "yaw_degrees") : 0.0;

        double yaw = obj.yaw_degrees;
        bool quarter = std::abs(std::abs(yaw) - 90.0) < 1e-9;
        bool half = std::abs(yaw) < 1e-9 || std::abs(std::abs(yaw) - 180.0) < 1e-9;
        if (!quarter && !half)
            throw UnsupportedPose("scene: object '" + obj.id + "' has yaw "
                                  + std::to_string(yaw) + ", only 0/+-90/180 supported");
        if (quarter)
            std::swap(obj.half_extents.x, obj.half_extents.y);

        if (jo.contains("platforms")) {
            if (!jo["platforms"].is_array())
                throw SchemaError("scene: 'platforms' must be an array for '" + obj.id + "'");
            for (const auto& jp : jo["platforms"]) {
                PlatformDecl decl;
                auto pr = require_array(jp, "rect", 4);
                decl.rect = Rect::make(pr[0], pr[1], pr[2], pr[3]);
                decl.height = require_number(jp, "height");
                decl.clearance = require_number(jp, "clearance");
                decl.internal = jp.contains("internal") && jp["internal"].is_boolean()
                    && jp["internal"].get<bool>();
                if (decl.clearance <= 0)
                    throw SchemaError("scene: platform clearance must be positive on '"
                                      + obj.id + "'");
                obj.declared_platforms.push_back(decl);
            }
        }
        scene.objects.push_back(std::move(obj));
    }
    std::sort(scene.objects.begin(), scene.objects.end(),
              [](const SceneObject& a, const SceneObject& b) { return a.id < b.id; });
    return scene;
}

LoadedScene load_scene_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw SchemaError("scene: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scene(ss.str());
}

const SceneObject* SceneGraph::find_object(const std::string& id) const
{
    for (const auto& o : objects)
        if (o.id == id)
            return &o;
    return nullptr;
}

SceneObject* SceneGraph::find_object(const std::string& id)
{
    for (auto& o : objects)
        if (o.id == id)
            return &o;
    return nullptr;
}

const Platform* SceneGraph::find_platform(const std::string& id) const
{
    for (const auto& p : platforms)
        if (p.id == id)
            return &p;
    return nullptr;
}

std::string SceneGraph::platform_of(const std::string& object_id) const
{
    auto it = parent.find(object_id);
    return it == parent.end() ? std::string() : it->second;
}

const SceneObject* SceneGraph::ground_owner(const std::string& platform_id) const
{
    const Platform* p = find_platform(platform_id);
    if (!p)
        return nullptr;
    const SceneObject* owner = find_object(p->owner);
    while (owner && !is_ground(owner->id)) {
        const Platform* up = find_platform(platform_of(owner->id));
        owner = up ? find_object(up->owner) : nullptr;
    }
    return owner;
}

bool SceneGraph::platform_reachable(const std::string& platform_id) const
{
    const SceneObject* g = ground_owner(platform_id);
    if (!g)
        return false;
    auto it = walkable.find(g->id);
    return it != walkable.end() && !it->second.empty();
}

std::vector<const SceneObject*> SceneGraph::objects_on(const std::string& platform_id) const
{
    std::vector<const SceneObject*> out;
    auto it = children.find(platform_id);
    if (it == children.end())
        return out;
    for (const auto& id : it->second)
        out.push_back(find_object(id));
    return out;
}

std::vector<std::string> SceneGraph::reachable_platform_ids() const
{
    std::vector<std::string> out;
    for (const auto& p : platforms)
        if (platform_reachable(p.id))
            out.push_back(p.id);
    return out;
}

void SceneGraph::relocate(const std::string& object_id, const std::string& platform_id,
                          const Rect& footprint)
{
    SceneObject* obj = find_object(object_id);
    const Platform* plat = find_platform(platform_id);
    if (!obj || !plat)
        throw SceneError("relocate: unknown object or platform");
    detach(object_id);
    obj->position.x = (footprint.xmin + footprint.xmax) * 0.5;
    obj->position.y = (footprint.ymin + footprint.ymax) * 0.5;
    obj->position.z = plat->height + obj->half_extents.z;
    parent[object_id] = platform_id;
    auto& kids = children[platform_id];
    kids.insert(std::lower_bound(kids.begin(), kids.end(), object_id), object_id);
}

void SceneGraph::detach(const std::string& object_id)
{
    auto it = parent.find(object_id);
    if (it == parent.end())
        return;
    auto& kids = children[it->second];
    kids.erase(std::remove(kids.begin(), kids.end(), object_id), kids.end());
    parent.erase(it);
}

SceneGraph build_scene_graph(const LoadedScene& scene)
{
    SceneGraph g;
    g.scene_name = scene.name;
    g.bounds = scene.bounds;
    g.objects = scene.objects;

    for (const auto& obj : g.objects) {
        std::vector<PlatformDecl> decls = obj.declared_platforms;
        if (decls.empty()) {
            // Default: the top face, clearance = gap to the nearest thing above.
            PlatformDecl top;
            top.rect = obj.footprint();
            top.height = obj.top_z();
            top.internal = false;
            double clearance = kClearanceCap;
            for (const auto& other : g.objects) {
                if (other.id == obj.id)
                    continue;
                if (!overlaps(other.footprint(), top.rect))
                    continue;
                double gap = other.base_z() - top.height;
                if (gap > kSupportHeightTol)
                    clearance = std::min(clearance, gap);
            }
            top.clearance = clearance;
            decls.push_back(top);
        }
        std::sort(decls.begin(), decls.end(),
                  [](const PlatformDecl& a, const PlatformDecl& b) { return a.height < b.height; });
        int k = 0;
        for (const auto& decl : decls) {
            Platform p;
            p.id = "object_" + obj.id + "_platform_" + std::to_string(k++);
            p.owner = obj.id;
            p.rect = decl.rect;
            p.height = decl.height;
            p.clearance = decl.clearance;
            p.internal = decl.internal;
            Rect fp = obj.footprint();
            Rect grown{fp.xmin - kSupportSlack, fp.ymin - kSupportSlack,
                       fp.xmax + kSupportSlack, fp.ymax + kSupportSlack};
            if (!grown.contains_rect(p.rect))
                throw SchemaError("scene: platform of '" + obj.id
                                  + "' extends beyond the object footprint");
            g.platforms.push_back(std::move(p));
        }
    }

    // Support resolution, bottom-up so parents exist before their children.
    std::vector<const SceneObject*> order;
    for (const auto& o : g.objects)
        order.push_back(&o);
    std::sort(order.begin(), order.end(), [](const SceneObject* a, const SceneObject* b) {
        if (a->base_z() != b->base_z())
            return a->base_z() < b->base_z();
        return a->id < b->id;
    });
    for (const SceneObject* obj : order) {
        Rect fp = obj->footprint();
        Rect slack{fp.xmin + kSupportSlack, fp.ymin + kSupportSlack,
                   fp.xmax - kSupportSlack, fp.ymax - kSupportSlack};
        const Platform* best = nullptr;
        double best_gap = 0.0;
        for (const auto& p : g.platforms) {
            if (p.owner == obj->id)
                continue;
            double gap = std::abs(obj->base_z() - p.height);
            if (gap > kSupportHeightTol)
                continue;
            if (!p.rect.contains_rect(slack))
                continue;
            if (!best || gap < best_gap - 1e-9) {
                best = &p;
                best_gap = gap;
            } else if (std::abs(p.height - best->height) <= 1e-6) {
                throw AmbiguousSupport("scene: object '" + obj->id
                                       + "' rests on two platforms at the same height");
            }
        }
        if (best) {
            g.parent[obj->id] = best->id;
            auto& kids = g.children[best->id];
            kids.insert(std::lower_bound(kids.begin(), kids.end(), obj->id), obj->id);
        }
    }

    // Reject heavily overlapped siblings, same rule the dataset cleanup uses.
    for (const auto& [pid, kids] : g.children) {
        for (size_t i = 0; i < kids.size(); ++i) {
            for (size_t j = i + 1; j < kids.size(); ++j) {
                const SceneObject* a = g.find_object(kids[i]);
                const SceneObject* b = g.find_object(kids[j]);
                if (rect_iou(a->footprint(), b->footprint()) > kOverlapIoUMax)
                    throw OverlapError("scene: objects '" + a->id + "' and '" + b->id
                                       + "' overlap on platform '" + pid + "'");
            }
        }
    }

    compute_walkable_spaces(g);
    return g;
}

void compute_walkable_spaces(SceneGraph& graph, double clearance)
{
    graph.walkable.clear();
    for (const auto& obj : graph.objects) {
        if (!graph.is_ground(obj.id))
            continue;
        Rect fp = obj.footprint();
        std::vector<WalkableSpace> spaces;
        const Side sides[4] = {Side::PosY, Side::PosX, Side::NegY, Side::NegX};
        for (Side side : sides) {
            Rect strip{};
            Vec2 facing{};
            switch (side) {
            case Side::PosY:
                strip = Rect{fp.xmin, fp.ymax, fp.xmax, fp.ymax + clearance};
                facing = {0, -1};
                break;
            case Side::PosX:
                strip = Rect{fp.xmax, fp.ymin, fp.xmax + clearance, fp.ymax};
                facing = {-1, 0};
                break;
            case Side::NegY:
                strip = Rect{fp.xmin, fp.ymin - clearance, fp.xmax, fp.ymin};
                facing = {0, 1};
                break;
            case Side::NegX:
                strip = Rect{fp.xmin - clearance, fp.ymin, fp.xmin, fp.ymax};
                facing = {1, 0};
                break;
            }
            if (!graph.bounds.contains_rect(strip))
                continue;
            bool blocked = false;
            for (const auto& other : graph.objects) {
                if (other.id == obj.id || !graph.is_ground(other.id))
                    continue;
                if (overlaps(strip, other.footprint())) {
                    blocked = true;
                    break;
                }
            }
            if (blocked)
                continue;
            spaces.push_back(WalkableSpace{obj.id, side, strip, facing});
        }
        graph.walkable[obj.id] = std::move(spaces);
    }
}

Heading heading_for(const SceneObject& ground_object, const WalkableSpace& space)
{
    return Heading{ground_object.id, space.facing};
}

std::optional<Heading> canonical_heading(const SceneGraph& graph, const std::string& platform_id)
{
    const SceneObject* g = graph.ground_owner(platform_id);
    if (!g)
        return std::nullopt;
    auto it = graph.walkable.find(g->id);
    if (it == graph.walkable.end() || it->second.empty())
        return std::nullopt;
    return heading_for(*g, it->second.front());
}

}  // namespace mbench
