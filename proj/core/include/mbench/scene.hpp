#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbench/geometry.hpp"

// Scene ingest and the structural containment tree: objects, platforms,
// ground/surface classification, walkable spaces and headings.

namespace mbench {

// Containment tolerances: base-to-platform height gap and footprint slack.
inline constexpr double kSupportHeightTol = 0.02;
inline constexpr double kSupportSlack = 0.01;
inline constexpr double kWalkableDepth = 0.5;
inline constexpr double kOverlapIoUMax = 0.25;
inline constexpr double kClearanceCap = 2.0;

struct SceneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : SceneError {
    using SceneError::SceneError;
};
struct UnsupportedPose : SceneError {
    using SceneError::SceneError;
};
struct DuplicateId : SceneError {
    using SceneError::SceneError;
};
struct MalformedName : SceneError {
    using SceneError::SceneError;
};
struct AmbiguousSupport : SceneError {
    using SceneError::SceneError;
};
struct OverlapError : SceneError {
    using SceneError::SceneError;
};

struct PlatformDecl {
    Rect rect;
    double height = 0.0;
    double clearance = 0.0;
    bool internal = false;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

struct SceneObject {
    std::string id;
    std::string name;      // "{category}_{specific}", underscores only
    Vec3 position;         // bbox center, z up
    double yaw_degrees = 0.0;
    Vec3 half_extents;     // already axis-aligned (yaw folded in at load)
    std::vector<PlatformDecl> declared_platforms;

    std::string category() const { return name.substr(0, name.find('_')); }
    Rect footprint() const
    {
        return Rect{position.x - half_extents.x, position.y - half_extents.y,
                    position.x + half_extents.x, position.y + half_extents.y};
    }
    double base_z() const { return position.z - half_extents.z; }
    double top_z() const { return position.z + half_extents.z; }
};

struct Platform {
    std::string id;        // object_{owner id}_platform_{k}, k bottom-to-top
    std::string owner;     // object id
    Rect rect;             // world frame, at the platform height
    double height = 0.0;
    double clearance = 0.0;
    bool internal = false;
};

// Side indices follow the fixed order +y, +x, -y, -x used for tie-breaking.
enum class Side { PosY = 0, PosX = 1, NegY = 2, NegX = 3 };

struct WalkableSpace {
    std::string ground_id;
    Side side = Side::PosY;
    Rect strip;    // 0.5 m standing strip beyond the bbox on that side
    Vec2 facing;   // unit vector toward the object
};

struct Heading {
    std::string ground_id;
    Vec2 front;  // robot facing

    Vec2 left() const { return {-front.y, front.x}; }    // 90 deg CCW from front
    Vec2 right() const { return {front.y, -front.x}; }
    Vec2 rear() const { return {-front.x, -front.y}; }
};

struct SceneGraph {
    std::string scene_name;
    Rect bounds{0, 0, 1, 1};
    std::vector<SceneObject> objects;            // sorted by id
    std::vector<Platform> platforms;             // sorted by (owner, height)
    std::map<std::string, std::string> parent;   // object id -> platform id; ground objects absent
    std::map<std::string, std::vector<std::string>> children;  // platform id -> object ids (sorted)
    std::map<std::string, std::vector<WalkableSpace>> walkable; // ground id -> spaces, side order

    const SceneObject* find_object(const std::string& id) const;
    SceneObject* find_object(const std::string& id);
    const Platform* find_platform(const std::string& id) const;

    bool is_ground(const std::string& object_id) const { return !parent.count(object_id); }
    // Platform id an object currently rests on; empty when ground or held.
    std::string platform_of(const std::string& object_id) const;
    // Walks owner chain up to the ground object that carries the platform.
    const SceneObject* ground_owner(const std::string& platform_id) const;
    bool platform_reachable(const std::string& platform_id) const;
    std::vector<const SceneObject*> objects_on(const std::string& platform_id) const;
    // Ids of platforms whose ground owner has at least one walkable space.
    std::vector<std::string> reachable_platform_ids() const;

    // Moves a surface object onto a platform at the given footprint rect.
    // The caller is responsible for the rect being a valid placement.
    void relocate(const std::string& object_id, const std::string& platform_id, const Rect& footprint);
    // Detach an object from its platform (picked up by the robot).
    void detach(const std::string& object_id);
};

// Parses and validates the scene JSON text. Rejects yaw outside {0, +-90, 180},
// duplicate ids and malformed names; folds yaw into the half extents.
struct LoadedScene {
    std::string name;
    Rect bounds{0, 0, 1, 1};
    std::vector<SceneObject> objects;
};
LoadedScene load_scene(const std::string& json_text);
LoadedScene load_scene_file(const std::string& path);

SceneGraph build_scene_graph(const LoadedScene& scene);

// Recomputes walkable spaces for every ground object (called by build).
void compute_walkable_spaces(SceneGraph& graph, double clearance = kWalkableDepth);

Heading heading_for(const SceneObject& ground_object, const WalkableSpace& space);

// The generation-time canonical heading of a platform: first walkable space of
// its ground owner in side order. Nothing when the owner is unreachable.
std::optional<Heading> canonical_heading(const SceneGraph& graph, const std::string& platform_id);

}  // namespace mbench
