#include <cmath>
#include <random>

#include "doctest.h"
#include "mbench/geometry.hpp"
#include "support/raster.hpp"

using namespace mbench;

namespace {

double quant(double v, double res)
{
    return std::llround(v / res) * res;
}

}  // namespace

TEST_CASE("rect make validates input")
{
    CHECK_THROWS_AS(Rect::make(1, 0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(Rect::make(0, 0, 0, 1), std::invalid_argument);
    Rect r = Rect::make(0, 0, 2, 1);
    CHECK(r.width() == doctest::Approx(2.0));
    CHECK(r.area() == doctest::Approx(2.0));
}

TEST_CASE("rects_connected edge, corner and overlap cases")
{
    Rect a{0, 0, 1, 1};
    CHECK(rects_connected(a, Rect{1, 0, 2, 1}));        // shared edge
    CHECK_FALSE(rects_connected(a, Rect{1, 1, 2, 2}));  // corner touch only
    CHECK(rects_connected(a, Rect{0.5, 0.5, 2, 2}));    // area overlap
    // Symmetric.
    CHECK(rects_connected(Rect{1, 0, 2, 1}, a));
    CHECK_FALSE(rects_connected(Rect{1, 1, 2, 2}, a));
}

TEST_CASE("overlap helpers")
{
    Rect a{0, 0, 2, 2};
    Rect b{1, 1, 3, 3};
    CHECK(overlap_area(a, b) == doctest::Approx(1.0));
    CHECK(overlaps(a, b));
    CHECK_FALSE(overlaps(a, Rect{2, 0, 3, 2}));  // touching edge
    CHECK(rect_iou(a, b) == doctest::Approx(1.0 / 7.0));
    CHECK(rect_iou(a, Rect{5, 5, 6, 6}) == doctest::Approx(0.0));
}

TEST_CASE("rect_subtract produces disjoint cover of the difference")
{
    Rect a{0, 0, 3, 3};
    Rect b{1, 1, 2, 2};
    std::vector<Rect> pieces;
    rect_subtract(a, b, pieces);
    double area = 0.0;
    for (const Rect& p : pieces) {
        area += p.area();
        CHECK(a.contains_rect(p));
        CHECK_FALSE(overlaps(p, b));
    }
    CHECK(area == doctest::Approx(a.area() - b.area()));
}

TEST_CASE("region connectivity")
{
    CHECK(region_is_connected(Region{{Rect{0, 0, 1, 1}, Rect{1, 0, 2, 1}}}));
    CHECK_FALSE(region_is_connected(Region{{Rect{0, 0, 1, 1}, Rect{1.5, 0, 2, 1}}}));
    CHECK_FALSE(region_is_connected(Region{{Rect{0, 0, 1, 1}, Rect{1, 1, 2, 2}}}));
}

TEST_CASE("max_inscribed_fit single-rect fixtures")
{
    Region r{{Rect{1.2, 1.2, 1.8, 2.0}}};
    auto fit = max_inscribed_fit(Footprint{0.5, 0.6}, r, 0.01);
    REQUIRE(fit.has_value());
    CHECK(region_contains_rect(r, fit->rect));
    CHECK(fit->rect.width() == doctest::Approx(0.52));
    CHECK(fit->rect.depth() == doctest::Approx(0.62));

    CHECK_FALSE(max_inscribed_fit(Footprint{0.61, 0.3}, r, 0.01).has_value());
}

TEST_CASE("max_inscribed_fit spans rects of a union")
{
    Region r{{Rect{1.2, 1.2, 1.8, 2.0}, Rect{1.8, 1.2, 2.2, 2.0}}};
    auto fit = max_inscribed_fit(Footprint{0.9, 0.6}, r, 0.01);
    REQUIRE(fit.has_value());
    CHECK(region_contains_rect(r, fit->rect));
    // Too wide for either rect alone.
    CHECK(fit->rect.xmax > 1.8);
    CHECK(fit->rect.xmin < 1.8);
}

TEST_CASE("max_inscribed_fit picks lexicographically smallest (y, x) center")
{
    Region r{{Rect{0, 0, 4, 4}}};
    auto fit = max_inscribed_fit(Footprint{1.0, 1.0}, r, 0.01);
    REQUIRE(fit.has_value());
    CHECK(fit->center.x == doctest::Approx(0.51));
    CHECK(fit->center.y == doctest::Approx(0.51));
}

TEST_CASE("max_inscribed_fit honors must_touch and center_in")
{
    Region r{{Rect{0, 0, 2, 1}, Rect{0, 1, 2, 2}}};
    FitOptions opts;
    opts.must_touch = {Rect{0, 0, 2, 1}, Rect{0, 1, 2, 2}};
    auto fit = max_inscribed_fit(Footprint{0.4, 0.4}, r, 0.01, opts);
    REQUIRE(fit.has_value());
    for (const Rect& t : opts.must_touch)
        CHECK(overlaps(fit->rect, t, kTouchSlack / 2));

    FitOptions centered;
    centered.center_in = Rect{1.5, 1.5, 2.0, 2.0};
    auto cfit = max_inscribed_fit(Footprint{0.4, 0.4}, r, 0.01, centered);
    REQUIRE(cfit.has_value());
    CHECK(centered.center_in->contains_point(cfit->center));

    // Unsatisfiable: footprint cannot reach a disjoint must-touch rect.
    FitOptions far;
    far.must_touch = {Rect{10, 10, 11, 11}};
    CHECK_FALSE(max_inscribed_fit(Footprint{0.4, 0.4}, r, 0.01, far).has_value());
}

TEST_CASE("fit feasibility matches 1 mm rasterized oracle on random instances")
{
    const double res = 0.001;
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> log_extent(std::log(0.05), std::log(3.0));
    std::uniform_real_distribution<double> pos(0.0, 1.5);
    std::uniform_int_distribution<int> nrects(1, 3);

    int feasible = 0;
    for (int i = 0; i < 1000; ++i) {
        Region region;
        int n = nrects(rng);
        for (int k = 0; k < n; ++k) {
            double w = quant(std::exp(log_extent(rng)), res);
            double d = quant(std::exp(log_extent(rng)), res);
            double x = quant(pos(rng), res);
            double y = quant(pos(rng), res);
            region.rects.push_back(Rect{x, y, x + w, y + d});
        }
        Footprint f{quant(std::exp(log_extent(rng)), res),
                    quant(std::exp(log_extent(rng)), res)};

        bool analytic = max_inscribed_fit(f, region, 0.01).has_value();
        bool raster = mbench::testsupport::raster_fit_feasible(f, region, 0.01, res);
        CAPTURE(i);
        CHECK(analytic == raster);
        if (analytic) {
            ++feasible;
            auto fit = max_inscribed_fit(f, region, 0.01);
            CHECK(region_contains_rect(region, fit->rect));

            // Monotone: adding a rect never breaks feasibility.
            Region grown = region;
            grown.rects.push_back(Rect{0, 0, 1, 1});
            CHECK(max_inscribed_fit(f, grown, 0.01).has_value());
        }
    }
    // The sample must exercise both outcomes to mean anything.
    CHECK(feasible > 50);
    CHECK(feasible < 950);
}
