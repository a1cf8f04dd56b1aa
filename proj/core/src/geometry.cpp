#include "mbench/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mbench {

Rect Rect::make(double xmin, double ymin, double xmax, double ymax)
{
    if (!std::isfinite(xmin) || !std::isfinite(ymin) || !std::isfinite(xmax)
        || !std::isfinite(ymax))
        throw std::invalid_argument("Rect: non-finite coordinate");
    if (!(xmin < xmax) || !(ymin < ymax))
        throw std::invalid_argument("Rect: degenerate extent");
    return Rect{xmin, ymin, xmax, ymax};
}

double overlap_area(const Rect& a, const Rect& b)
{
    double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    double d = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    if (w <= 0.0 || d <= 0.0)
        return 0.0;
    return w * d;
}

bool overlaps(const Rect& a, const Rect& b, double min_extent)
{
    double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    double d = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    return w > min_extent && d > min_extent;
}

double rect_iou(const Rect& a, const Rect& b)
{
    double inter = overlap_area(a, b);
    if (inter <= 0.0)
        return 0.0;
    return inter / (a.area() + b.area() - inter);
}

bool rects_connected(const Rect& a, const Rect& b)
{
    double ox = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    double oy = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    if (ox < -kGeomEps || oy < -kGeomEps)
        return false;  // separated on some axis
    bool edge_x = std::abs(ox) <= kGeomEps;
    bool edge_y = std::abs(oy) <= kGeomEps;
    if (edge_x && edge_y)
        return false;  // corner touch only
    return true;
}

void rect_subtract(const Rect& a, const Rect& b, std::vector<Rect>& out)
{
    if (!overlaps(a, b)) {
        out.push_back(a);
        return;
    }
    double ix0 = std::max(a.xmin, b.xmin);
    double ix1 = std::min(a.xmax, b.xmax);
    double iy0 = std::max(a.ymin, b.ymin);
    double iy1 = std::min(a.ymax, b.ymax);
    if (a.ymin < iy0)
        out.push_back(Rect{a.xmin, a.ymin, a.xmax, iy0});
    if (iy1 < a.ymax)
        out.push_back(Rect{a.xmin, iy1, a.xmax, a.ymax});
    if (a.xmin < ix0)
        out.push_back(Rect{a.xmin, iy0, ix0, iy1});
    if (ix1 < a.xmax)
        out.push_back(Rect{ix1, iy0, a.xmax, iy1});
}

bool region_contains_rect(const Region& region, const Rect& r)
{
    // Shrink the probe a hair so boundary-exact placements are accepted.
    Rect probe{r.xmin + kGeomEps, r.ymin + kGeomEps, r.xmax - kGeomEps, r.ymax - kGeomEps};
    if (probe.xmin >= probe.xmax || probe.ymin >= probe.ymax)
        return true;
    std::vector<Rect> remainder{probe};
    std::vector<Rect> next;
    for (const Rect& cover : region.rects) {
        next.clear();
        for (const Rect& piece : remainder)
            rect_subtract(piece, cover, next);
        std::swap(remainder, next);
        if (remainder.empty())
            return true;
    }
    double left = 0.0;
    for (const Rect& piece : remainder)
        left += piece.area();
    return left <= 1e-12;
}

bool region_is_connected(const Region& region)
{
    size_t n = region.rects.size();
    if (n <= 1)
        return !region.rects.empty();
    std::vector<bool> seen(n, false);
    std::vector<size_t> stack{0};
    seen[0] = true;
    size_t count = 1;
    while (!stack.empty()) {
        size_t i = stack.back();
        stack.pop_back();
        for (size_t j = 0; j < n; ++j) {
            if (!seen[j] && rects_connected(region.rects[i], region.rects[j])) {
                seen[j] = true;
                ++count;
                stack.push_back(j);
            }
        }
    }
    return count == n;
}

namespace {

void push_sorted_unique(std::vector<double>& v, double value)
{
    v.push_back(value);
}

void finish_candidates(std::vector<double>& v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(),
                        [](double a, double b) { return std::abs(a - b) <= kGeomEps; }),
            v.end());
}

}  // namespace

std::optional<Placement> max_inscribed_fit(const Footprint& f, const Region& region,
                                           double margin)
{
    return max_inscribed_fit(f, region, margin, FitOptions{});
}

std::optional<Placement> max_inscribed_fit(const Footprint& f, const Region& region,
                                           double margin, const FitOptions& opts)
{
    if (f.width <= 0.0 || f.depth <= 0.0 || margin < 0.0 || region.empty())
        return std::nullopt;
    const double w = f.width + 2.0 * margin;
    const double d = f.depth + 2.0 * margin;

    // Candidate xmin/ymin values: any optimal placement can be slid until its
    // edges rest on edges of the union, so edge-derived anchors are complete.
    // The must_touch / center_in constraints add their own boundary anchors.
    std::vector<double> xs, ys;
    xs.reserve(region.rects.size() * 2 + opts.must_touch.size() * 4 + 2);
    ys.reserve(xs.capacity());
    for (const Rect& r : region.rects) {
        push_sorted_unique(xs, r.xmin);
        push_sorted_unique(xs, r.xmax - w);
        push_sorted_unique(ys, r.ymin);
        push_sorted_unique(ys, r.ymax - d);
    }
    // must_touch is satisfied by the margin-shrunk footprint, so the anchors
    // offset the margin to leave a kTouchSlack overlap of the footprint itself.
    for (const Rect& t : opts.must_touch) {
        push_sorted_unique(xs, t.xmin - w + margin + kTouchSlack);
        push_sorted_unique(xs, t.xmax - margin - kTouchSlack);
        push_sorted_unique(xs, t.xmin);
        push_sorted_unique(xs, t.xmax - w);
        push_sorted_unique(ys, t.ymin - d + margin + kTouchSlack);
        push_sorted_unique(ys, t.ymax - margin - kTouchSlack);
        push_sorted_unique(ys, t.ymin);
        push_sorted_unique(ys, t.ymax - d);
    }
    if (opts.center_in) {
        push_sorted_unique(xs, opts.center_in->xmin - w * 0.5);
        push_sorted_unique(xs, opts.center_in->xmax - w * 0.5);
        push_sorted_unique(ys, opts.center_in->ymin - d * 0.5);
        push_sorted_unique(ys, opts.center_in->ymax - d * 0.5);
    }
    finish_candidates(xs);
    finish_candidates(ys);

    std::optional<Placement> best;
    for (double ymin : ys) {
        for (double xmin : xs) {
            Rect cand{xmin, ymin, xmin + w, ymin + d};
            Vec2 c = cand.center();
            if (best) {
                if (c.y > best->center.y + kGeomEps)
                    break;  // ys ascending: nothing better in this row or later rows on y alone
                if (std::abs(c.y - best->center.y) <= kGeomEps && c.x >= best->center.x - kGeomEps)
                    continue;
            }
            if (opts.center_in && !opts.center_in->contains_point(c))
                continue;
            // The placement only counts as reaching a must_touch rect if the
            // object footprint itself (margin removed) overlaps it; a graze by
            // the margin ring alone would not survive downstream goal checks.
            Rect inner{cand.xmin + margin, cand.ymin + margin,
                       cand.xmax - margin, cand.ymax - margin};
            bool touches_all = true;
            for (const Rect& t : opts.must_touch) {
                if (!overlaps(inner, t)) {
                    touches_all = false;
                    break;
                }
            }
            if (!touches_all)
                continue;
            if (!region_contains_rect(region, cand))
                continue;
            best = Placement{c, cand};
        }
        if (best && !ys.empty() && ymin > best->center.y + kGeomEps)
            break;
    }
    return best;
}

}  // namespace mbench
