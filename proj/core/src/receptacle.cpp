#include "mbench/receptacle.hpp"

#include <algorithm>
#include <cmath>

namespace mbench {

namespace {

// Local frame: +v = heading front, +u = robot's right. Both axes of the
// heading are world axes, so rects map to rects exactly.
struct LocalFrame {
    Vec2 front;
    Vec2 right;

    explicit LocalFrame(const Heading& h) : front(h.front), right(h.right()) {}

    Vec2 to_local(const Vec2& p) const
    {
        return {p.x * right.x + p.y * right.y, p.x * front.x + p.y * front.y};
    }
    Vec2 to_world(const Vec2& p) const
    {
        return {p.x * right.x + p.y * front.x, p.x * right.y + p.y * front.y};
    }
    Rect to_local(const Rect& r) const
    {
        Vec2 a = to_local(Vec2{r.xmin, r.ymin});
        Vec2 b = to_local(Vec2{r.xmax, r.ymax});
        return Rect{std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x),
                    std::max(a.y, b.y)};
    }
    Rect to_world(const Rect& r) const
    {
        Vec2 a = to_world(Vec2{r.xmin, r.ymin});
        Vec2 b = to_world(Vec2{r.xmax, r.ymax});
        return Rect{std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x),
                    std::max(a.y, b.y)};
    }
};

bool usable(const Rect& r)
{
    return r.width() >= kMinReceptacleExtent - kGeomEps
        && r.depth() >= kMinReceptacleExtent - kGeomEps;
}

// Initial receptacle rect in local frame for one direction, before the
// zero-area filter. P is the platform, A the anchor, both local.
Rect initial_rect(const Rect& P, const Rect& A, Direction d)
{
    switch (d) {
    case Direction::Front:
        return Rect{A.xmin, A.ymax, A.xmax, P.ymax};
    case Direction::FrontLeft:
        return Rect{P.xmin, A.ymax, A.xmin, P.ymax};
    case Direction::Left:
        return Rect{P.xmin, A.ymin, A.xmin, A.ymax};
    case Direction::RearLeft:
        return Rect{P.xmin, P.ymin, A.xmin, A.ymin};
    case Direction::Rear:
        return Rect{A.xmin, P.ymin, A.xmax, A.ymin};
    case Direction::RearRight:
        return Rect{A.xmax, P.ymin, P.xmax, A.ymin};
    case Direction::Right:
        return Rect{A.xmax, A.ymin, P.xmax, A.ymax};
    case Direction::FrontRight:
        return Rect{A.xmax, A.ymax, P.xmax, P.ymax};
    }
    return Rect{};
}

Rect clip_to(const Rect& r, const Rect& bounds)
{
    return Rect{std::max(r.xmin, bounds.xmin), std::max(r.ymin, bounds.ymin),
                std::min(r.xmax, bounds.xmax), std::min(r.ymax, bounds.ymax)};
}

}  // namespace

std::optional<Direction> direction_from_index(int index)
{
    if (index < 1 || index > 8)
        return std::nullopt;
    return static_cast<Direction>(index);
}

Direction opposite(Direction d)
{
    int i = direction_index(d);
    return static_cast<Direction>((i + 3) % 8 + 1);
}

std::string direction_label(Direction d)
{
    switch (d) {
    case Direction::Front: return "front";
    case Direction::FrontLeft: return "front-left";
    case Direction::Left: return "left";
    case Direction::RearLeft: return "rear-left";
    case Direction::Rear: return "rear";
    case Direction::RearRight: return "rear-right";
    case Direction::Right: return "right";
    case Direction::FrontRight: return "front-right";
    }
    return "";
}

std::optional<Direction> direction_from_label(const std::string& label)
{
    std::string norm = label;
    std::replace(norm.begin(), norm.end(), '_', '-');
    for (int i = 1; i <= 8; ++i) {
        Direction d = static_cast<Direction>(i);
        if (direction_label(d) == norm)
            return d;
    }
    return std::nullopt;
}

const Rect* PlatformView::footprint_of(const std::string& object_id) const
{
    for (const auto& [id, rect] : footprints)
        if (id == object_id)
            return &rect;
    return nullptr;
}

PlatformView make_platform_view(const SceneGraph& graph, const std::string& platform_id,
                                const std::set<std::string>& exclude)
{
    const Platform* p = graph.find_platform(platform_id);
    if (!p)
        throw ReceptacleError("receptacle: unknown platform '" + platform_id + "'");
    PlatformView view;
    view.platform_id = platform_id;
    view.rect = p->rect;
    for (const SceneObject* obj : graph.objects_on(platform_id)) {
        if (exclude.count(obj->id))
            continue;
        view.footprints.emplace_back(obj->id, obj->footprint());
    }
    return view;
}

Rect grid_cell_rect(const Rect& platform_rect, const Heading& heading, int index)
{
    if (index < 1 || index > 9)
        throw ReceptacleError("receptacle: grid index out of range");
    LocalFrame frame{heading};
    Rect P = frame.to_local(platform_rect);
    int row = (index - 1) / 3;  // 0 = front row (largest v)
    int col = (index - 1) % 3;  // 0 = left column (smallest u)
    double w = P.width() / 3.0;
    double h = P.depth() / 3.0;
    Rect cell{P.xmin + col * w, P.ymax - (row + 1) * h, P.xmin + (col + 1) * w,
              P.ymax - row * h};
    return frame.to_world(cell);
}

std::vector<GridCell> segment_empty_platform(const PlatformView& view, const Heading& heading)
{
    if (!view.footprints.empty())
        throw NotEmpty("receptacle: platform '" + view.platform_id + "' is occupied");
    std::vector<GridCell> cells;
    for (int i = 1; i <= 9; ++i)
        cells.push_back(GridCell{view.platform_id, i, grid_cell_rect(view.rect, heading, i)});
    return cells;
}

std::vector<Receptacle> compute_initial_receptacles(const PlatformView& view,
                                                    const std::string& anchor_id,
                                                    const Heading& heading)
{
    const Rect* anchor = view.footprint_of(anchor_id);
    if (!anchor)
        throw ReceptacleError("receptacle: anchor '" + anchor_id + "' is not on platform '"
                              + view.platform_id + "'");
    LocalFrame frame{heading};
    Rect P = frame.to_local(view.rect);
    Rect A = clip_to(frame.to_local(*anchor), P);

    std::vector<Receptacle> out;
    for (int i = 1; i <= 8; ++i) {
        Direction d = static_cast<Direction>(i);
        Rect r = initial_rect(P, A, d);
        if (!usable(r))
            continue;
        out.push_back(Receptacle{view.platform_id, anchor_id, d, frame.to_world(r),
                                 ReceptacleKind::Initial});
    }
    return out;
}

std::set<Direction> relative_directions(const PlatformView& view, const std::string& anchor_id,
                                        const std::string& other_id, const Heading& heading)
{
    const Rect* other = view.footprint_of(other_id);
    if (!other)
        throw SamePlatformRequired("receptacle: '" + other_id + "' is not on platform '"
                                   + view.platform_id + "'");
    std::set<Direction> dirs;
    for (const Receptacle& r : compute_initial_receptacles(view, anchor_id, heading)) {
        if (overlaps(r.rect, *other))
            dirs.insert(r.direction);
    }
    return dirs;
}

std::vector<Receptacle> refine_receptacles_for(const PlatformView& view,
                                               const std::string& anchor_id,
                                               const Heading& heading)
{
    const Rect* anchor_world = view.footprint_of(anchor_id);
    if (!anchor_world)
        throw ReceptacleError("receptacle: anchor '" + anchor_id + "' is not on platform '"
                              + view.platform_id + "'");
    LocalFrame frame{heading};
    Rect P = frame.to_local(view.rect);
    Rect A = clip_to(frame.to_local(*anchor_world), P);

    std::vector<Rect> others;
    for (const auto& [id, fp] : view.footprints) {
        if (id == anchor_id)
            continue;
        others.push_back(frame.to_local(fp));
    }

    // Cardinal sweeps: project the anchor edge until the first footprint whose
    // lateral band overlaps the strip, or the platform boundary.
    auto sweep = [&](Direction d) -> Rect {
        Rect r = initial_rect(P, A, d);
        bool horizontal = (d == Direction::Left || d == Direction::Right);
        for (const Rect& o : others) {
            if (horizontal) {
                double band = std::min(o.ymax, A.ymax) - std::max(o.ymin, A.ymin);
                if (band <= kGeomEps)
                    continue;
                if (d == Direction::Right && o.xmax > A.xmax + kGeomEps)
                    r.xmax = std::min(r.xmax, std::max(A.xmax, o.xmin));
                if (d == Direction::Left && o.xmin < A.xmin - kGeomEps)
                    r.xmin = std::max(r.xmin, std::min(A.xmin, o.xmax));
            } else {
                double band = std::min(o.xmax, A.xmax) - std::max(o.xmin, A.xmin);
                if (band <= kGeomEps)
                    continue;
                if (d == Direction::Front && o.ymax > A.ymax + kGeomEps)
                    r.ymax = std::min(r.ymax, std::max(A.ymax, o.ymin));
                if (d == Direction::Rear && o.ymin < A.ymin - kGeomEps)
                    r.ymin = std::max(r.ymin, std::min(A.ymin, o.ymax));
            }
        }
        return r;
    };

    // Diagonal traces: project the vertex along both adjacent cardinals until
    // the first extension line of any other footprint, or the boundary.
    auto trace = [&](Direction d) -> Rect {
        bool to_right = (d == Direction::FrontRight || d == Direction::RearRight);
        bool to_front = (d == Direction::FrontRight || d == Direction::FrontLeft);
        double vx = to_right ? A.xmax : A.xmin;
        double vy = to_front ? A.ymax : A.ymin;
        double sx = to_right ? P.xmax : P.xmin;
        double sy = to_front ? P.ymax : P.ymin;
        for (const Rect& o : others) {
            for (double line : {o.xmin, o.xmax}) {
                if (to_right && line > vx + kGeomEps)
                    sx = std::min(sx, line);
                if (!to_right && line < vx - kGeomEps)
                    sx = std::max(sx, line);
            }
            for (double line : {o.ymin, o.ymax}) {
                if (to_front && line > vy + kGeomEps)
                    sy = std::min(sy, line);
                if (!to_front && line < vy - kGeomEps)
                    sy = std::max(sy, line);
            }
        }
        return Rect{std::min(vx, sx), std::min(vy, sy), std::max(vx, sx), std::max(vy, sy)};
    };

    std::vector<Receptacle> out;
    for (int i = 1; i <= 8; ++i) {
        Direction d = static_cast<Direction>(i);
        bool cardinal = (i % 2 == 1);
        Rect r = cardinal ? sweep(d) : trace(d);
        if (!usable(r))
            continue;
        // Refined receptacles never intersect a footprint; the extension-line
        // rule can still graze one in exact-touch layouts, so drop those.
        bool clear = true;
        for (const Rect& o : others) {
            if (overlaps(r, o)) {
                clear = false;
                break;
            }
        }
        if (!clear)
            continue;
        out.push_back(Receptacle{view.platform_id, anchor_id, d, frame.to_world(r),
                                 ReceptacleKind::Refined});
    }
    return out;
}

std::vector<Receptacle> refine_receptacles(const PlatformView& view, const Heading& heading)
{
    std::vector<Receptacle> out;
    for (const auto& [id, fp] : view.footprints) {
        auto r = refine_receptacles_for(view, id, heading);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

Region merge_receptacles(const std::vector<Rect>& selection)
{
    if (selection.empty())
        throw ReceptacleError("receptacle: empty selection");
    Region region{selection};
    if (!region_is_connected(region))
        throw Disconnected("receptacle: selected receptacles are not connected");
    return region;
}

}  // namespace mbench
