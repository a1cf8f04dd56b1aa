#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

// Axis-aligned 2D footprint geometry: rectangles, rectilinear unions and the
// placement-fit test everything else is built on. All lengths are meters.

namespace mbench {

inline constexpr double kGeomEps = 1e-9;
inline constexpr double kFitMargin = 0.01;
// Minimum overlap (per axis) we require before we call two areas "intersecting"
// when a placement has to touch a selected region.
inline constexpr double kTouchSlack = 1e-4;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Rect {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    // Throws std::invalid_argument on degenerate or non-finite input.
    static Rect make(double xmin, double ymin, double xmax, double ymax);

    double width() const { return xmax - xmin; }
    double depth() const { return ymax - ymin; }
    double area() const { return width() * depth(); }
    Vec2 center() const { return {(xmin + xmax) * 0.5, (ymin + ymax) * 0.5}; }

    bool contains_point(const Vec2& p) const
    {
        return p.x >= xmin - kGeomEps && p.x <= xmax + kGeomEps
            && p.y >= ymin - kGeomEps && p.y <= ymax + kGeomEps;
    }
    bool contains_rect(const Rect& r) const
    {
        return r.xmin >= xmin - kGeomEps && r.xmax <= xmax + kGeomEps
            && r.ymin >= ymin - kGeomEps && r.ymax <= ymax + kGeomEps;
    }
};

// Area of the closed intersection; 0 for touching or disjoint rects.
double overlap_area(const Rect& a, const Rect& b);

// Positive-area overlap (touching edges do not count).
bool overlaps(const Rect& a, const Rect& b, double min_extent = kGeomEps);

// Intersection over union of the two rects (0 when disjoint).
double rect_iou(const Rect& a, const Rect& b);

// True iff the closed rects share positive-length boundary or positive area.
// Corner-point-only contact is not a connection.
bool rects_connected(const Rect& a, const Rect& b);

// a minus b, as up to four disjoint pieces of a.
void rect_subtract(const Rect& a, const Rect& b, std::vector<Rect>& out);

struct Footprint {
    double width = 0.0;  // x extent
    double depth = 0.0;  // y extent
};

// Rectilinear union; rects may overlap each other.
struct Region {
    std::vector<Rect> rects;

    bool empty() const { return rects.empty(); }
};

// True iff r is fully covered by the union.
bool region_contains_rect(const Region& region, const Rect& r);

// True iff the rects of the region form one connected component under
// rects_connected.
bool region_is_connected(const Region& region);

struct Placement {
    Vec2 center;
    Rect rect;  // footprint rect with margin included
};

struct FitOptions {
    // Placement must overlap each of these rects with positive area.
    std::vector<Rect> must_touch;
    // Placement center must lie inside this rect.
    std::optional<Rect> center_in;
};

// Largest-margin placement search: returns a rect of size
// (f.width + 2*margin) x (f.depth + 2*margin) fully inside the union, with the
// lexicographically smallest (y, x) center among feasible candidates, or
// nothing. The footprint is never rotated.
std::optional<Placement> max_inscribed_fit(const Footprint& f, const Region& region,
                                           double margin = kFitMargin);
std::optional<Placement> max_inscribed_fit(const Footprint& f, const Region& region,
                                           double margin, const FitOptions& opts);

}  // namespace mbench
