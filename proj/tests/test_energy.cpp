#include "doctest.h"

#include "tractlab/energy.hpp"

#include <cmath>

using namespace tractlab;

namespace {
const double kPi = M_PI;
}

TEST_CASE("dirichlet integrals against hand-computed catenoid values") {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const ScalarField f1 = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const ScalarField f3 = ScalarField::coordinate(cat, Vec3(0, 0, 1));
    const double t = 1.2;
    // int over {|v| < t} of (cosh^2 v sin^2 u + sinh^2 v cos^2 u) du dv = pi sinh 2t
    CHECK(dirichlet_integral(f1, 2.0, {256, 256}, Region::h_ball(h, t)) ==
          doctest::Approx(kPi * std::sinh(2 * t)).epsilon(0.01));
    // |grad x3|^2 dA = du dv over the strip
    CHECK(dirichlet_integral(f3, 2.0, {256, 256}, Region::h_ball(h, t)) ==
          doctest::Approx(4 * kPi * t).epsilon(0.01));
}

TEST_CASE("dirichlet integral on the unit square is the area") {
    auto plane = catalog_surface("plane", DomainBox{0, 1, 0, 1});
    const ScalarField f = ScalarField::coordinate(plane, Vec3(1, 0, 0));
    CHECK(dirichlet_integral(f, 2.0, {64, 64}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("full flow of the catenoid height exhaustion is 4 pi") {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const std::vector<double> ts{0.5, 0.9, 1.3, 1.7, 2.1, 2.5};
    const FullFlow flow = full_flow(h, ts, {192, 192}, 2.0);
    CHECK(flow.S == doctest::Approx(4 * kPi).epsilon(0.01));
    CHECK(flow.max_relative_deviation <= 0.01);

    // |x3| is not 3-harmonic on the catenoid: the alpha = 3 flow drifts
    CHECK_THROWS_WITH_AS(full_flow(h, ts, {192, 192}, 3.0),
                         doctest::Contains("flow not constant"), std::runtime_error);
}

TEST_CASE("full flow through a plane strip is twice the width") {
    auto strip = catalog_surface("plane", DomainBox{-4, 4, 0, 2});
    const ScalarField h = ScalarField::abs_coordinate(strip, Vec3(1, 0, 0));
    const FullFlow flow = full_flow(h, {0.8, 1.6, 2.4, 3.2}, {128, 128}, 2.0);
    CHECK(flow.S == doctest::Approx(2 * 2.0).epsilon(1e-6));
}

TEST_CASE("capacity: closed form and the extremal quadrature agree") {
    CHECK(capacity_closed_form(4 * kPi, 0, 4 * kPi, 2.0) == doctest::Approx(1.0));
    CHECK(capacity_closed_form(4 * kPi, 1, 3, 2.0) == doctest::Approx(2 * kPi));
    CHECK(capacity_closed_form(4 * kPi, 1, 3, 3.0) == doctest::Approx(4 * kPi * kPi));
    CHECK_THROWS_AS(capacity_closed_form(4 * kPi, 3, 1, 2.0), std::invalid_argument);

    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    CHECK(capacity_variational(h, 1.0, 2.5, 2.0, {192, 192}) ==
          doctest::Approx(capacity_closed_form(4 * kPi, 1.0, 2.5, 2.0)).epsilon(0.02));

    auto strip = catalog_surface("plane", DomainBox{-4, 4, 0, 2});
    const ScalarField hs = ScalarField::abs_coordinate(strip, Vec3(1, 0, 0));
    CHECK(capacity_variational(hs, 1.0, 3.0, 2.0, {128, 128}) ==
          doctest::Approx(2 * 2.0 / 2.0).epsilon(0.02));
}

TEST_CASE("max modulus on level sets") {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const double t = 1.4;
    const LevelSet sigma = extract_level_set(h, t, {192, 192});
    CHECK(max_modulus(f, sigma, 0.0) == doctest::Approx(std::cosh(t)).epsilon(1e-3));

    auto plane = catalog_surface("plane");
    const ScalarField g = ScalarField::coordinate(plane, Vec3(1, 0, 0));
    const ScalarField hp = ScalarField::abs_coordinate(plane, Vec3(1, 0, 0));
    CHECK(max_modulus(g, extract_level_set(hp, 1.7, {128, 128}), 0.0) ==
          doctest::Approx(1.7).epsilon(1e-6));
    // flooring dominates a small field
    CHECK(max_modulus(g, extract_level_set(hp, 1.7, {128, 128}), 9.0) == doctest::Approx(9.0));
}

TEST_CASE("singular terms on the catenoid: golden flows, omega, and both Q routes") {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const ScalarField f3 = ScalarField::coordinate(cat, Vec3(0, 0, 1));
    std::vector<double> ts{0.5, 1.0, 1.5, 2.0, 2.5};
    const SingularProfile sp = singular_terms(f3, h, ts, {192, 192});
    for (size_t i = 0; i < ts.size(); ++i) {
        REQUIRE(sp.cycles[i].size() == 2);
        for (const CycleFlow& cf : sp.cycles[i]) {
            CHECK(cf.S_h == doctest::Approx(2 * kPi).epsilon(3e-3));
            CHECK(std::abs(cf.S_f) == doctest::Approx(2 * kPi).epsilon(3e-3));
            CHECK(std::abs(cf.q) == doctest::Approx(ts[i]).epsilon(3e-3));
        }
        CHECK(sp.omega[i] == doctest::Approx(4 * kPi).epsilon(5e-3));
        CHECK(sp.Q[i] == doctest::Approx(4 * kPi * ts[i]).epsilon(5e-3));
        // both Q routes agree: sum q_j S(f, Gamma_j) vs the cumulative integral
        CHECK(sp.Q_direct[i] == doctest::Approx(sp.Q[i]).epsilon(5e-3));
        CHECK(sp.omega[i] >=
              sp.S_f_total[i] * sp.S_f_total[i] / sp.S_h_total[i] - 1e-9);
    }

    // the orthogonal coordinate has mean zero on every circle
    const ScalarField f1 = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const SingularProfile sp1 = singular_terms(f1, h, ts, {192, 192});
    for (size_t i = 0; i < ts.size(); ++i) {
        CHECK(std::abs(sp1.omega[i]) <= 1e-6);
        CHECK(std::abs(sp1.Q[i]) <= 1e-5);
        for (const CycleFlow& cf : sp1.cycles[i]) CHECK(std::abs(cf.q) <= 1e-9);
    }

    // constant fields carry no flow at all
    const ScalarField fc = ScalarField::custom(cat, [](double, double) { return 3.0; });
    const SingularProfile spc = singular_terms(fc, h, {1.0}, {128, 128});
    CHECK(spc.omega[0] == doctest::Approx(0.0));
    CHECK(spc.Q_direct[0] == doctest::Approx(0.0));
}

TEST_CASE("flow derivative: dq/dt matches S(f,Gamma)/S(h,Gamma) per cycle") {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    // a tilted direction mixes the axial and radial behavior
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 1).normalized());
    std::vector<double> ts;
    for (int i = 0; i < 9; ++i) ts.push_back(0.8 + 0.15 * i);
    const SingularProfile sp = singular_terms(f, h, ts, {160, 160});
    for (size_t i = 1; i + 1 < ts.size(); ++i) {
        REQUIRE(sp.cycles[i].size() == 2);
        for (size_t j = 0; j < 2; ++j) {
            const double dq = (sp.cycles[i + 1][j].q - sp.cycles[i - 1][j].q) /
                              (ts[i + 1] - ts[i - 1]);
            const double ratio = sp.cycles[i][j].S_f / sp.cycles[i][j].S_h;
            CHECK(dq == doctest::Approx(ratio).epsilon(5e-3));
        }
    }
}

TEST_CASE("singular terms reject non-tubular levels") {
    auto plane = catalog_surface("plane");
    const ScalarField h = ScalarField::abs_coordinate(plane, Vec3(1, 0, 0));
    const ScalarField f = ScalarField::coordinate(plane, Vec3(0, 1, 0));
    CHECK_THROWS_WITH_AS(singular_terms(f, h, {1.0}, {96, 96}),
                         doctest::Contains("open arcs"), std::runtime_error);
}

TEST_CASE("coarea consistency: dJ/dt matches the ring integral within 3%") {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const GridSpec grid{256, 256};
    const double t = 1.1, dt = std::max(0.04, 3.0 * 6.0 / grid.nv);
    const double dJ = (dirichlet_integral(f, 2.0, grid, Region::h_ball(h, t + dt)) -
                       dirichlet_integral(f, 2.0, grid, Region::h_ball(h, t - dt))) /
                      (2 * dt);
    ScalarField fc = f, hc = h;
    const double ring =
        weighted_length(extract_level_set(h, t, grid), [&fc, &hc](double u, double v) {
            const double gf = fc.gradient_norm(u, v);
            return gf * gf / hc.gradient_norm(u, v);
        }).total;
    CHECK(dJ == doctest::Approx(ring).epsilon(0.03));
    // and both match the analytic derivative 2 pi cosh 2t
    CHECK(ring == doctest::Approx(2 * kPi * std::cosh(2 * t)).epsilon(0.03));
}

TEST_CASE("energy profile: J nondecreasing, c(alpha) convention") {
    CHECK(main_inequality_constant(2.0) == doctest::Approx(0.5));
    CHECK(main_inequality_constant(3.0) == doctest::Approx(2.0 / 3.0));
    CHECK(main_inequality_constant(1.5) == doctest::Approx(1.0 / 1.5));
    CHECK_THROWS_AS(main_inequality_constant(1.0), std::invalid_argument);

    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const EnergyProfile prof =
        compute_energy_profile(f, h, {0.5, 1.0, 1.5, 2.0, 2.5}, 2.0, {160, 160}, true);
    for (size_t i = 1; i < prof.J.size(); ++i) CHECK(prof.J[i] >= prof.J[i - 1]);
    CHECK(prof.S_h == doctest::Approx(4 * kPi).epsilon(0.01));
    for (size_t i = 0; i < prof.M.size(); ++i)
        CHECK(prof.M[i] == doctest::Approx(std::cosh(prof.t[i])).epsilon(1e-2));
}

TEST_CASE("growth bounds hold numerically on the catenoid") {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const GridSpec grid{192, 192};
    LevelSetExtractor ex(h, grid);

    // Dirichlet growth via max modulus and flow: J(t1) <= 4 [int M^-2 / S dt]^{-1}
    const std::vector<double> ts{1.0, 1.3, 1.6, 1.9, 2.2, 2.5};
    const FullFlow flow = full_flow(h, ts, grid, 2.0);
    double acc = 0.0;
    std::vector<double> M;
    for (double t : ts) M.push_back(max_modulus(f, ex.extract(t), 0.0));
    for (size_t i = 1; i < ts.size(); ++i)
        acc += 0.5 * (1 / (M[i] * M[i]) + 1 / (M[i - 1] * M[i - 1])) / flow.S *
               (ts[i] - ts[i - 1]);
    const double J1 = dirichlet_integral(f, 2.0, grid, Region::h_ball(h, ts.front()));
    CHECK(J1 <= 4.0 / acc);

    // capacity form: int_P |grad f|^2 <= 4 cap M^2 on a superlevel tract
    const SuperlevelComponents comps = superlevel_components(f, 2.0, grid, false);
    REQUIRE(comps.count >= 1);
    const Region D = Region::component(comps, 0);
    const double t1 = 1.4, t2 = 2.5;
    const double lhs = dirichlet_integral(f, 2.0, grid, Region::intersect(D, Region::h_ball(h, t1)));
    ScalarField hc = h;
    const Region shell = Region::intersect(D, Region{[hc, t1, t2](double u, double v) {
        const double val = hc.value(u, v);
        return val > t1 && val < t2;
    }});
    const double cap = dirichlet_integral(h, 2.0, grid, shell) / ((t2 - t1) * (t2 - t1));
    const double M2 = max_modulus(f, ex.extract(t2), 2.0, &D);
    CHECK(lhs <= 4.0 * cap * M2 * M2);
}

TEST_CASE("regular t-grids avoid critical values") {
    auto cat = catalog_surface("catenoid");
    const ScalarField f = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    LevelSetExtractor ex(f, {128, 128});
    // f = cosh v cos u has critical values +-1 on the chart
    const std::vector<double> ts = make_regular_t_grid(ex, 0.5, 3.0, 11);
    for (double t : ts) CHECK_NOTHROW(ex.extract(t));
}
