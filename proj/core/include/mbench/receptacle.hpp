#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mbench/geometry.hpp"
#include "mbench/scene.hpp"

// Free-space receptacles on platforms: 3x3 grid segmentation of empty
// platforms, eight-direction initial/refined receptacles around anchors, and
// receptacle merging. All returned rects are world-frame; direction labels are
// relative to the heading passed in.

namespace mbench {

// Extents below this are unusable (under the fit margin) and treated as empty.
inline constexpr double kMinReceptacleExtent = 0.02;

struct ReceptacleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotEmpty : ReceptacleError {
    using ReceptacleError::ReceptacleError;
};
struct SamePlatformRequired : ReceptacleError {
    using ReceptacleError::ReceptacleError;
};
struct Disconnected : ReceptacleError {
    using ReceptacleError::ReceptacleError;
};
struct MixedPlatforms : ReceptacleError {
    using ReceptacleError::ReceptacleError;
};

// Indexed 1..8 counterclockwise starting at front.
enum class Direction {
    Front = 1,
    FrontLeft = 2,
    Left = 3,
    RearLeft = 4,
    Rear = 5,
    RearRight = 6,
    Right = 7,
    FrontRight = 8,
};

inline int direction_index(Direction d) { return static_cast<int>(d); }
std::optional<Direction> direction_from_index(int index);
Direction opposite(Direction d);
// Hyphenated label: "front", "front-left", "rear-right", ...
std::string direction_label(Direction d);
std::optional<Direction> direction_from_label(const std::string& label);

struct GridCell {
    std::string platform_id;
    int index = 0;  // 1..9 row-major: front-left, front, front-right, left, ...
    Rect rect;      // world frame
};

enum class ReceptacleKind { Initial, Refined };

struct Receptacle {
    std::string platform_id;
    std::string anchor_id;
    Direction direction = Direction::Front;
    Rect rect;  // world frame
    ReceptacleKind kind = ReceptacleKind::Refined;
};

// World-frame snapshot of one platform surface: its rect plus the footprints
// of the objects currently on it.
struct PlatformView {
    std::string platform_id;
    Rect rect{0, 0, 1, 1};
    std::vector<std::pair<std::string, Rect>> footprints;  // (object id, footprint)

    const Rect* footprint_of(const std::string& object_id) const;
};

PlatformView make_platform_view(const SceneGraph& graph, const std::string& platform_id,
                                const std::set<std::string>& exclude = {});

// 9 equal cells tiling the platform; cell 1 = front-left, 5 = center,
// 9 = rear-right. Throws NotEmpty when the platform has objects on it.
std::vector<GridCell> segment_empty_platform(const PlatformView& view, const Heading& heading);

// The cell rect for one index regardless of occupancy (used by success checks).
Rect grid_cell_rect(const Rect& platform_rect, const Heading& heading, int index);

// Edge/vertex extension to the platform boundary; zero-area directions omitted.
std::vector<Receptacle> compute_initial_receptacles(const PlatformView& view,
                                                    const std::string& anchor_id,
                                                    const Heading& heading);

// All directions whose initial receptacle overlaps the other object's footprint.
std::set<Direction> relative_directions(const PlatformView& view, const std::string& anchor_id,
                                        const std::string& other_id, const Heading& heading);

// Refined receptacles for one anchor: cardinal projections clipped at the
// first blocking footprint, diagonal projections clipped at extension lines.
std::vector<Receptacle> refine_receptacles_for(const PlatformView& view,
                                               const std::string& anchor_id,
                                               const Heading& heading);

// Refined receptacles for every anchor on the platform.
std::vector<Receptacle> refine_receptacles(const PlatformView& view, const Heading& heading);

// Region of the selected rects; throws Disconnected when their adjacency graph
// does not form a single component.
Region merge_receptacles(const std::vector<Rect>& selection);

}  // namespace mbench
