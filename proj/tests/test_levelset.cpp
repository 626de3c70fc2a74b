#include "doctest.h"

#include "tractlab/levelset.hpp"

#include <cmath>
#include <set>

using namespace tractlab;

namespace {

// cell coordinates of the cells a polyline passes through
std::set<std::pair<int, int>> crossed_cells(const LevelSet& ls, const DomainBox& box) {
    std::set<std::pair<int, int>> cells;
    for (const Polyline& p : ls.components)
        for (const Vec2& q : p.uv) {
            int i = static_cast<int>((q.x() - box.u0) / box.extent_u() * ls.grid.nu);
            int k = static_cast<int>((q.y() - box.v0) / box.extent_v() * ls.grid.nv);
            i = std::clamp(i, 0, ls.grid.nu - 1);
            k = std::clamp(k, 0, ls.grid.nv - 1);
            cells.insert({i, k});
        }
    return cells;
}

}  // namespace

TEST_CASE("catenoid |x3| level: two cycles of length 2 pi cosh t") {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const double t = 1.0;
    const LevelSet ls = extract_level_set(h, t, {192, 192});
    REQUIRE(ls.components.size() == 2);
    for (const Polyline& p : ls.components) {
        CHECK(p.closed);
        CHECK(p.length() == doctest::Approx(2 * M_PI * std::cosh(t)).epsilon(2e-3));
        for (const Vec2& q : p.uv)
            CHECK(std::abs(h.value(q.x(), q.y()) - t) <= 1e-8);
    }
}

TEST_CASE("plane x1 = 0 level: one open arc clipped to the box") {
    auto plane = catalog_surface("plane");
    const ScalarField f = ScalarField::coordinate(plane, Vec3(1, 0, 0));
    const LevelSet ls = extract_level_set(f, 0.0, {128, 128});
    REQUIRE(ls.components.size() == 1);
    CHECK_FALSE(ls.components[0].closed);
    CHECK(ls.components[0].length() ==
          doctest::Approx(plane->domain().extent_v()).epsilon(1e-6));
}

TEST_CASE("catenoid x1 = 2: two open arcs inside |v| <= 3") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const LevelSet ls = extract_level_set(f, 2.0, {192, 192});
    CHECK(ls.components.size() == 2);
    CHECK(ls.cycle_count() == 0);
}

TEST_CASE("near-critical level is rejected") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    // (0,0) is a saddle of cosh v cos u with value 1 and sits on the node grid
    CHECK_THROWS_WITH_AS(extract_level_set(f, 1.0, {192, 192}),
                         doctest::Contains("near-critical"), std::runtime_error);
    // an empty level is fine
    CHECK(extract_level_set(f, 50.0, {64, 64}).empty());
}

TEST_CASE("weighted lengths: catenoid circles carry flow 2 pi each") {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const LevelSet ls = extract_level_set(h, 1.3, {192, 192});
    const ComponentLength len = weighted_length(ls);  // theta = |grad h| = 1/cosh t
    REQUIRE(len.per_component.size() == 2);
    CHECK(len.per_component[0] == doctest::Approx(2 * M_PI).epsilon(2e-3));
    CHECK(len.per_component[1] == doctest::Approx(2 * M_PI).epsilon(2e-3));
    CHECK(len.total == doctest::Approx(4 * M_PI).epsilon(2e-3));
}

TEST_CASE("weighted lengths: unit circle and clipped segment") {
    auto plane = catalog_surface("plane");
    const ScalarField r = ScalarField::norm(plane);
    const LevelSet circle = extract_level_set(r, 1.0, {160, 160});
    REQUIRE(circle.components.size() == 1);
    CHECK(circle.components[0].closed);
    const auto one = [](double, double) { return 1.0; };
    CHECK(weighted_length(circle, one).total == doctest::Approx(2 * M_PI).epsilon(1e-3));

    const ScalarField f = ScalarField::coordinate(plane, Vec3(1, 0, 0));
    const LevelSet line = extract_level_set(f, 0.0, {160, 160});
    CHECK(weighted_length(line, one).total ==
          doctest::Approx(plane->domain().extent_v()).epsilon(1e-6));
}

TEST_CASE("weighted length converges with order >= 1.8 on the catenoid circle") {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const double exact = 2 * M_PI;  // flow through each circle
    auto err = [&](int n) {
        const LevelSet ls = extract_level_set(h, 1.0, {n, n});
        return std::abs(weighted_length(ls).per_component[0] - exact);
    };
    const double e1 = err(48), e2 = err(96);
    CHECK(e1 / e2 >= 1.8 * 1.8);  // one refinement step, order >= 1.8
}

TEST_CASE("superlevel components: golden counts and compactness flags") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f1 = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const SuperlevelComponents a = superlevel_components(f1, 2.0, {128, 128});
    CHECK(a.count == 2);
    CHECK(a.resolved);
    for (int c = 0; c < a.count; ++c) CHECK(a.touches_truncation[c]);

    auto plane = catalog_surface("plane");
    const ScalarField g = ScalarField::coordinate(plane, Vec3(1, 0, 0));
    CHECK(superlevel_components(g, 0.0, {128, 128}).count == 1);

    const ScalarField f3 = ScalarField::coordinate(cat, Vec3(0, 0, 1));
    const SuperlevelComponents b = superlevel_components(f3, 1.0, {128, 128});
    CHECK(b.count == 1);
    CHECK(b.touches_truncation[0]);
    // its level boundary is a single cycle
    const LevelSet boundary = extract_level_set(f3, 1.0, {128, 128});
    CHECK(boundary.components.size() == 1);
    CHECK(boundary.components[0].closed);
}

TEST_CASE("superlevel nesting: {f > tau2} sits inside one component of {f > tau1}") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const SuperlevelComponents lo = superlevel_components(f, 2.0, {128, 128}, false);
    const SuperlevelComponents hi = superlevel_components(f, 5.0, {128, 128}, false);
    for (int c = 0; c < hi.count; ++c) {
        const auto [i, k] = hi.representative[c];
        const int parent = lo.cell_label(i, k);
        REQUIRE(parent >= 0);
        CHECK(lo.component_contains(parent, hi, c));
    }
}

TEST_CASE("level-set cells hug the superlevel boundary cells") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const GridSpec grid{96, 96};
    const double tau = 2.0;
    const SuperlevelComponents comps = superlevel_components(f, tau, grid, false);
    const LevelSet ls = extract_level_set(f, tau, grid);
    const auto crossed = crossed_cells(ls, cat->domain());

    // boundary cells: labeled cells with an unlabeled 4-neighbor
    std::set<std::pair<int, int>> boundary;
    const int nu = grid.nu, nv = grid.nv;
    for (int k = 0; k < nv; ++k)
        for (int i = 0; i < nu; ++i) {
            if (comps.cell_label(i, k) < 0) continue;
            const int di[4] = {1, -1, 0, 0}, dk[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                int ni = (i + di[d] + nu) % nu;  // u periodic on the catenoid
                int nk = k + dk[d];
                if (nk < 0 || nk >= nv) continue;
                if (comps.cell_label(ni, nk) < 0) {
                    boundary.insert({i, k});
                    break;
                }
            }
        }
    auto near = [&](const std::pair<int, int>& c, const std::set<std::pair<int, int>>& pool) {
        for (int di = -1; di <= 1; ++di)
            for (int dk = -1; dk <= 1; ++dk) {
                const int ni = (c.first + di + nu) % nu, nk = c.second + dk;
                if (pool.count({ni, nk})) return true;
            }
        return false;
    };
    for (const auto& c : boundary) CHECK(near(c, crossed));
    for (const auto& c : crossed) CHECK(near(c, boundary));
}

TEST_CASE("components are pairwise disjoint after refinement") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const LevelSet ls = extract_level_set(f, 2.0, {128, 128});
    REQUIRE(ls.components.size() >= 2);
    std::set<std::pair<double, double>> seen;
    for (const Polyline& p : ls.components)
        for (const Vec2& q : p.uv) {
            const auto key = std::make_pair(q.x(), q.y());
            CHECK(seen.count(key) == 0);
            seen.insert(key);
        }
}

TEST_CASE("classification and counts are stable under grid refinement") {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    for (const GridSpec grid : {GridSpec{96, 96}, GridSpec{192, 192}}) {
        const LevelSet a = extract_level_set(h, 1.0, grid);
        CHECK(a.components.size() == 2);
        CHECK(a.cycle_count() == 2);
        const LevelSet b = extract_level_set(f, 2.0, grid);
        CHECK(b.components.size() == 2);
        CHECK(b.cycle_count() == 0);
    }
}
