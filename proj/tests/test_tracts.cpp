#include "doctest.h"

#include "tractlab/invariants.hpp"
#include "tractlab/tracts.hpp"

#include <cmath>

using namespace tractlab;

TEST_CASE("tract forest: catenoid x1 has two persistent tracts") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const TractForest forest = build_tract_forest(f, {2.0, 4.0, 8.0}, {128, 128});
    CHECK(forest.tract_count() == 2);
    for (int leaf : forest.leaves_at_top) {
        const auto chain = forest.chain(leaf);
        CHECK(chain.size() == 3);  // alive at every threshold
        for (int node : chain) CHECK(forest.nodes[node].touches_truncation);
    }
    // nesting holds cellwise along every parent link
    for (const auto& node : forest.nodes) {
        if (node.parent < 0) continue;
        const auto& parent = forest.nodes[node.parent];
        CHECK(forest.levels[parent.level].component_contains(
            parent.comp, forest.levels[node.level], node.comp));
    }
}

TEST_CASE("tract forest: plane half-spaces and bounded fields") {
    auto plane = catalog_surface("plane");
    const ScalarField f = ScalarField::coordinate(plane, Vec3(1, 0, 0));
    CHECK(build_tract_forest(f, {0.8, 1.6, 3.2}, {96, 96}).tract_count() == 1);
    const ScalarField g = ScalarField::coordinate(plane, Vec3(-1, 0, 0));
    CHECK(build_tract_forest(g, {0.8, 1.6, 3.2}, {96, 96}).tract_count() == 1);

    // bounded above: superlevels past the sup are empty
    const ScalarField bounded =
        ScalarField::custom(plane, [](double u, double v) { return -(u * u + v * v); });
    CHECK(build_tract_forest(bounded, {1.0, 2.0}, {96, 96}).tract_count() == 0);
}

TEST_CASE("critical tau is reported") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    CHECK_THROWS_WITH_AS(build_tract_forest(f, {1.0, 4.0}, {128, 128}),
                         doctest::Contains("critical tau"), std::runtime_error);
}

TEST_CASE("maximum principle proxy: superlevel maxima sit near component boundaries") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const GridSpec grid{96, 96};
    const SuperlevelComponents comps = superlevel_components(f, 2.0, grid, false);
    const DomainBox& box = cat->domain();
    for (int id = 0; id < comps.count; ++id) {
        double best = -1e300;
        int bi = -1, bk = -1;
        for (int k = 0; k < grid.nv; ++k)
            for (int i = 0; i < grid.nu; ++i) {
                if (comps.cell_label(i, k) != id) continue;
                const double val = f.value(box.u0 + (i + 0.5) * box.extent_u() / grid.nu,
                                           box.v0 + (k + 0.5) * box.extent_v() / grid.nv);
                if (val > best) {
                    best = val;
                    bi = i;
                    bk = k;
                }
            }
        // the arg-max cell must touch the component boundary or the truncation ring
        bool near_boundary = false;
        for (int dk = -1; dk <= 1 && !near_boundary; ++dk)
            for (int di = -1; di <= 1; ++di) {
                const int ni = (bi + di + grid.nu) % grid.nu, nk = bk + dk;
                if (nk < 0 || nk >= grid.nv || comps.cell_label(ni, nk) != id) {
                    near_boundary = true;
                    break;
                }
            }
        CHECK(near_boundary);
    }
}

TEST_CASE("tract regularity against the |x| exhaustion") {
    auto cat = catalog_surface("catenoid");
    const GridSpec grid{128, 128};
    const ScalarField hx = ScalarField::norm(cat);
    std::vector<double> samples;
    for (double w : log_spaced(3.0, 9.0, 8))
        for (double s : {0.97 * w, w, 1.03 * w}) samples.push_back(s);
    std::sort(samples.begin(), samples.end());

    // sections of the x1 tracts are arcs: regular
    const ScalarField f1 = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const SuperlevelComponents d1 = superlevel_components(f1, 2.0, grid, false);
    CHECK(classify_tract(d1, 0, hx, samples, grid).verdict == Regularity::Regular);

    // sections of the x3 tract are full circles: singular
    const ScalarField f3 = ScalarField::coordinate(cat, Vec3(0, 0, 1));
    const SuperlevelComponents d3 = superlevel_components(f3, 0.5, grid, false);
    CHECK(classify_tract(d3, 0, hx, samples, grid).verdict == Regularity::Singular);

    auto plane = catalog_surface("plane");
    const ScalarField fp = ScalarField::coordinate(plane, Vec3(1, 0, 0));
    const ScalarField hp = ScalarField::norm(plane);
    const SuperlevelComponents dp = superlevel_components(fp, 1.0, grid, false);
    std::vector<double> ps;
    for (double w : log_spaced(1.6, 3.6, 8)) ps.push_back(w);
    CHECK(classify_tract(dp, 0, hp, ps, grid).verdict == Regularity::Regular);
}

TEST_CASE("hump counts: catenoid quadruple, plane pair, axis rejected") {
    auto cat = catalog_surface("catenoid");
    const HumpCount hc = hump_count(cat, Vec3(1, 0, 0), 2.0, {128, 128});
    CHECK(hc.count == 4);
    CHECK(hc.enlargement_checked);
    CHECK(hc.enlargement_stable);

    auto plane = catalog_surface("plane");
    CHECK(hump_count(plane, Vec3(1, 0, 0), 2.0, {128, 128}).count == 2);

    CHECK_THROWS_WITH_AS(hump_count(cat, Vec3(0, 0, 1), 2.0, {128, 128}),
                         doctest::Contains("not regular"), std::runtime_error);

    // the count can only drop as the slab widens
    int prev = 1 << 20;
    for (double a : {1.5, 2.0, 3.0, 5.0, 8.0}) {
        const int n = hump_count(cat, Vec3(1, 0, 0), a, {128, 128}).count;
        CHECK(n <= prev);
        prev = n;
    }
}

TEST_CASE("main inequality on catenoid and plane tracts") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const ScalarField h = ScalarField::norm(cat);
    const GridSpec grid{160, 160};
    const SuperlevelComponents comps = superlevel_components(f, 2.0, grid, false);
    REQUIRE(comps.count == 2);
    const MainInequalityCheck mc = main_inequality_check(comps, 0, f, h, 2.0, 3.0, 9.0, grid);
    CHECK(mc.satisfied);
    CHECK(mc.lhs > 0);
    CHECK(mc.lambda_integral > 0);

    auto plane = catalog_surface("plane");
    const ScalarField fp = ScalarField::coordinate(plane, Vec3(1, 0, 0));
    const ScalarField hp = ScalarField::norm(plane);
    const SuperlevelComponents cp = superlevel_components(fp, 1.0, grid, false);
    const MainInequalityCheck mp = main_inequality_check(cp, 0, fp, hp, 2.0, 2.0, 3.8, grid);
    CHECK(mp.satisfied);
    CHECK(mp.rhs / mp.lhs >= 1.0);

    CHECK_THROWS_AS(main_inequality_check(cp, 0, fp, hp, 2.0, 3.0, 2.0, grid),
                    std::invalid_argument);
    // the closed-form level frequencies only exist for alpha = 2
    CHECK_THROWS_AS(main_inequality_check(cp, 0, fp, hp, 2.5, 2.0, 3.0, grid),
                    std::invalid_argument);
}

TEST_CASE("N-tract corollary bound at sampled pairs") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const ScalarField h = ScalarField::norm(cat);
    const GridSpec grid{160, 160};
    const TractForest forest = build_tract_forest(f, {2.0}, grid);
    REQUIRE(forest.tract_count() == 2);
    for (const auto& [t1, t2] : std::vector<std::pair<double, double>>{{3, 6}, {4, 9}, {5, 8}}) {
        const NminCheck nc = n_tract_inequality_check(forest, f, h, 2.0, t1, t2, grid);
        CHECK(nc.satisfied);
    }
}

TEST_CASE("denjoy-ahlfors proxy reports a consistent trend") {
    auto plane = catalog_surface("plane");
    const ScalarField f = ScalarField::abs_coordinate(plane, Vec3(1, 0, 0));
    const ScalarField h = ScalarField::norm(plane);
    std::vector<std::pair<double, double>> schedule;
    for (double t : {1.0, 1.3, 1.6, 1.9}) schedule.emplace_back(t, 2 * t);
    const DenjoyReport dr = denjoy_ahlfors_bound(f, h, 2.0, 3, schedule, {128, 128});
    REQUIRE(dr.product.size() == schedule.size());
    for (double p : dr.product) {
        CHECK(std::isfinite(p));
        CHECK(p > 0);
    }
    CHECK(dr.implied_max_tracts == (dr.decays ? 2 : -1));

    // with N = 1 the exponent vanishes on a circle-sections exhaustion:
    // no decay can be certified
    const DenjoyReport d1 = denjoy_ahlfors_bound(f, h, 2.0, 1, schedule, {128, 128});
    CHECK(d1.implied_max_tracts == -1);
}
