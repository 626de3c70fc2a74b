// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, not configurable.

#include "tractlab/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <vector>

using namespace tractlab;

namespace {

int g_failures = 0;
const double kPi = M_PI;

void report(int criterion, const char* what, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s  (%s)\n", ok ? "PASS" : "FAIL", criterion, what,
                detail.c_str());
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

double truncation_h_radius(const ScalarField& h) {
    const DomainBox& b = h.surface().domain();
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 512; ++i) {
        const double u = b.u0 + i * b.extent_u() / 512;
        const double v = b.v0 + i * b.extent_v() / 512;
        if (!b.periodic_v) m = std::min({m, h.value(u, b.v0), h.value(u, b.v1)});
        if (!b.periodic_u) m = std::min({m, h.value(b.u0, v), h.value(b.u1, v)});
    }
    return m;
}

// ---------------------------------------------------------------------------

ProjectiveVolumeEstimate criterion1_projective_volume() {
    auto t0 = std::chrono::steady_clock::now();
    const ProjectiveVolumeEstimate plane = nested_projective_volume("plane", 1000.0, {256, 256});
    const double s_plane = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const ProjectiveVolumeEstimate cat = nested_projective_volume("catenoid", 1000.0, {256, 256});
    const double s_cat = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const ProjectiveVolumeEstimate hel = nested_projective_volume("helicoid", 1000.0, {256, 256});
    const double s_hel = seconds_since(t0);

    const bool ok = !plane.diverged && std::abs(plane.V2 - 1.0) <= 0.02 && !cat.diverged &&
                    std::abs(cat.V2 - 2.0) <= 0.02 * 2.0 && hel.diverged && s_plane <= 60 &&
                    s_cat <= 60 && s_hel <= 60;
    report(1, "projective volume golden values", ok,
           fmt("plane V2=%.4f (%.1fs), catenoid V2=%.4f (%.1fs), helicoid diverged=%d (%.1fs)",
               plane.V2, s_plane, cat.V2, s_cat, hel.diverged ? 1 : 0, s_hel));
    return cat;
}

void criterion2_bernstein() {
    const auto t0 = std::chrono::steady_clock::now();
    auto plane = catalog_surface("plane", box_for_radius("plane", 112.0));
    const double plane_val =
        projection_multiplicity_integral(plane, Vec3(0, 0, 1), {100.0}, 25, 64, {256, 256})
            .value.back();
    auto enn = catalog_surface("enneper", box_for_radius("enneper", 112.0));
    const double enn_val =
        projection_multiplicity_integral(enn, Vec3(0, 0, 1), {100.0}, 25, 64, {384, 384})
            .value.back();
    const double secs = seconds_since(t0);
    const bool ok = std::abs(plane_val - 2 * kPi) <= 0.02 * 2 * kPi && plane_val < 8.0 &&
                    enn_val >= 8.0 && secs <= 120;
    report(2, "Bernstein dichotomy via projection multiplicity", ok,
           fmt("plane=%.4f (2pi=%.4f), enneper=%.2f >= 8, %.1fs", plane_val, 2 * kPi, enn_val,
               secs));
}

void criterion3_humps(const ProjectiveVolumeEstimate& cat_volume) {
    auto cat = catalog_surface("catenoid");
    const HumpCount hc = hump_count(cat, Vec3(1, 0, 0), 2.0, {256, 256});
    bool axis_rejected = false;
    try {
        hump_count(cat, Vec3(0, 0, 1), 2.0, {256, 256});
    } catch (const std::exception&) {
        axis_rejected = true;
    }
    const double two_v2 = 2.0 * cat_volume.V2;
    const bool ok = hc.count == 4 && two_v2 >= 3.92 && two_v2 <= 4.08 &&
                    hc.count <= two_v2 + 0.05 + 0.08 && axis_rejected;
    report(3, "hump bound N <= 2 V2 with equality on the catenoid", ok,
           fmt("N=%d, 2V2=%.4f, axis rejected=%d", hc.count, two_v2, axis_rejected ? 1 : 0));
}

void criterion4_index(const ProjectiveVolumeEstimate& cat_volume) {
    auto cat = catalog_surface("catenoid");
    const IndexCheck ic = index_theorem_check(cat, Vec3(1, 0, 0), {256, 256}, cat_volume);
    bool ok = ic.critical_points.size() == 2 && ic.sum_index == 2;
    for (const auto& p : ic.critical_points) ok = ok && p.index == 1 && p.valid;
    const double gap = ic.V2 - ic.chi;
    ok = ok && std::abs(gap - 2.0) <= 0.08 && ic.sum_index <= gap + 0.08;

    const ProjectiveVolumeEstimate v_pl = nested_projective_volume("plane", 1000.0, {256, 256});
    const IndexCheck ip =
        index_theorem_check(catalog_surface("plane"), Vec3(1, 0, 0), {256, 256}, v_pl);
    ok = ok && ip.sum_index == 0 && std::abs(ip.V2 - ip.chi) <= 0.08;
    report(4, "index bound sum ind <= V2 - chi", ok,
           fmt("catenoid: %d critical points, sum=%d, V2-chi=%.4f; plane: sum=%d, V2-chi=%.4f",
               static_cast<int>(ic.critical_points.size()), ic.sum_index, gap, ip.sum_index,
               ip.V2 - ip.chi));
}

void criterion5_tubular() {
    SurfacePtr cat = catalog_surface("catenoid", DomainBox{0, 2 * kPi, -8.8, 8.8, true});
    const GridSpec grid{256, 768};
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const ScalarField f1 = ScalarField::coordinate(cat, Vec3(1, 0, 0));
    const ScalarField f3 = ScalarField::coordinate(cat, Vec3(0, 0, 1));
    std::vector<double> ts;
    for (int i = 0; i < 16; ++i) ts.push_back(0.5 + (8.0 - 0.5) * i / 15);

    const TubularGrowth tg = tubular_growth_check(f1, h, ts, grid);
    const SingularProfile sp3 = singular_terms(f3, h, ts, grid);
    const double J3 = dirichlet_integral(f3, 2.0, grid, Region::h_ball(h, ts.back()));
    const double q_over_j3 = sp3.Q.back() / J3;

    const bool ok = std::abs(tg.S_h - 4 * kPi) <= 0.01 * 4 * kPi &&
                    std::abs(tg.growth_at_top - 2.0) <= 0.05 * 2.0 && tg.Q_over_J < 1e-6 &&
                    std::abs(q_over_j3 - 1.0) <= 0.01;
    report(5, "tubular growth ln J(t)/t vs 8 pi / S(h)", ok,
           fmt("S=%.5f, lnJ(8)/8=%.4f vs 2, Q/J[x1]=%.2e, Q/J[x3]=%.4f", tg.S_h,
               tg.growth_at_top, tg.Q_over_J, q_over_j3));
}

void criterion6_main_inequality() {
    int pairs_checked = 0, main_ok = 0, nmin_ok = 0;
    std::mt19937_64 rng(6021);
    for (const char* name : {"catenoid", "plane"}) {
        auto surf = catalog_surface(name);
        const GridSpec grid{192, 192};
        const ScalarField f = ScalarField::coordinate(surf, Vec3(1, 0, 0));
        const ScalarField h = ScalarField::norm(surf);
        const double fmax = std::string(name) == "catenoid" ? std::cosh(3.0) : 4.0;
        const double tau0 = 0.25 * fmax;
        const SuperlevelComponents comps = superlevel_components(f, tau0, grid, false);
        const TractForest forest = build_tract_forest(f, {tau0}, grid);
        const double hi = 0.9 * truncation_h_radius(h);
        const double lo = std::string(name) == "catenoid" ? 2.5 : 1.6;
        std::uniform_real_distribution<double> pick(lo, hi);
        for (int p = 0; p < 10; ++p) {
            double t1 = pick(rng), t2 = pick(rng);
            if (t1 > t2) std::swap(t1, t2);
            if (t2 - t1 < 0.08 * (hi - lo)) t2 = std::min(hi, t1 + 0.1 * (hi - lo));
            const MainInequalityCheck mc =
                main_inequality_check(comps, 0, f, h, 2.0, t1, t2, grid, 13);
            const NminCheck nc = n_tract_inequality_check(forest, f, h, 2.0, t1, t2, grid, 13);
            ++pairs_checked;
            main_ok += mc.satisfied;  // 5% tolerance inside the check
            nmin_ok += nc.satisfied;
        }
    }
    const bool ok = pairs_checked >= 20 && main_ok == pairs_checked && nmin_ok == pairs_checked;
    report(6, "Main Inequality and the N-tract corollary at sampled pairs", ok,
           fmt("%d pairs, main ok=%d, corollary ok=%d", pairs_checked, main_ok, nmin_ok));
}

void criterion7_frequency_oracle() {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> len(0.5, 5.0), wt(0.2, 5.0);
    double max_err = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double L = len(rng), tc = wt(rng);
        const bool closed = i % 2 == 1;
        const double lambda = (closed ? 2 * kPi : kPi) / (tc * L);
        const double hat = rayleigh_oracle(WeightedPath::uniform(L, 256, tc, closed), 2.0, 256);
        max_err = std::max(max_err, std::abs(hat - lambda) / lambda);
    }

    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    LevelSetExtractor ex(h, {256, 256});
    double lam_lo = 1e300, lam_hi = 0.0;
    for (double t : make_regular_t_grid(ex, 0.4, 2.6, 9)) {
        const FrequencyResult fr = fundamental_frequency(ex.extract(t), {});
        lam_lo = std::min(lam_lo, fr.lambda);
        lam_hi = std::max(lam_hi, fr.lambda);
    }
    const bool ok = max_err <= 1e-3 && lam_lo >= 0.99 && lam_hi <= 1.01;
    report(7, "Rayleigh oracle equals the closed forms; catenoid lambda = 1", ok,
           fmt("synthetic max rel err=%.2e, lambda range [%.4f, %.4f]", max_err, lam_lo, lam_hi));
}

void criterion8_capacity() {
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const FullFlow flow = full_flow(h, {0.6, 1.0, 1.4, 1.8, 2.2}, {192, 192}, 2.0);
    const double cat_var = capacity_variational(h, 1.0, 2.5, 2.0, {192, 192});
    const double cat_cf = capacity_closed_form(flow.S, 1.0, 2.5, 2.0);

    auto strip = catalog_surface("plane", DomainBox{-4, 4, 0, 2});
    const ScalarField hs = ScalarField::abs_coordinate(strip, Vec3(1, 0, 0));
    const FullFlow flow_s = full_flow(hs, {0.8, 1.4, 2.0, 2.6, 3.2}, {128, 128}, 2.0);
    const double strip_var = capacity_variational(hs, 1.0, 3.0, 2.0, {128, 128});
    const double strip_cf = capacity_closed_form(flow_s.S, 1.0, 3.0, 2.0);

    const double a3 = capacity_closed_form(4 * kPi, 1.0, 3.0, 3.0);
    const bool ok = std::abs(cat_var - cat_cf) <= 0.02 * cat_cf &&
                    std::abs(strip_var - strip_cf) <= 0.02 * strip_cf &&
                    std::abs(a3 - 4 * kPi * kPi) <= 1e-9;
    report(8, "capacity: extremal quadrature vs closed form, alpha in {2,3}", ok,
           fmt("catenoid %.5f vs %.5f, strip %.5f vs %.5f, alpha=3 formula %.5f", cat_var, cat_cf,
               strip_var, strip_cf, a3));
}

void criterion9_property_suites() {
    std::mt19937_64 rng(909);
    int violations = 0;

    // tract nesting with randomized thresholds on both tract-bearing surfaces
    for (const char* name : {"catenoid", "plane"}) {
        auto surf = catalog_surface(name);
        const ScalarField f = ScalarField::coordinate(surf, Vec3(1, 0, 0));
        const double fmax = std::string(name) == "catenoid" ? std::cosh(3.0) : 4.0;
        std::uniform_real_distribution<double> pick(0.15 * fmax, 0.8 * fmax);
        for (int trial = 0; trial < 3; ++trial) {
            std::vector<double> taus{pick(rng), pick(rng), pick(rng)};
            std::sort(taus.begin(), taus.end());
            taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
            TractForest forest;
            try {
                forest = build_tract_forest(f, taus, {128, 128});
            } catch (const std::exception&) {
                continue;  // a random tau hit a critical value
            }
            for (const auto& node : forest.nodes) {
                if (node.parent < 0) continue;
                const auto& par = forest.nodes[node.parent];
                if (!forest.levels[par.level].component_contains(par.comp,
                                                                 forest.levels[node.level],
                                                                 node.comp))
                    ++violations;
            }
        }
    }

    // J monotone in t; omega >= S_f^2 / S_h on tubular levels
    {
        auto cat = catalog_surface("catenoid");
        const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
        std::uniform_real_distribution<double> az(0.0, 2 * kPi), zc(-0.8, 0.8);
        for (int trial = 0; trial < 4; ++trial) {
            const double phi = az(rng), z = zc(rng);
            const Vec3 e = Vec3(std::cos(phi), std::sin(phi), z).normalized();
            const ScalarField f = ScalarField::coordinate(cat, e);
            const std::vector<double> ts{0.5, 1.0, 1.5, 2.0, 2.5};
            double prevJ = -1;
            for (double t : ts) {
                const double J = dirichlet_integral(f, 2.0, {128, 128}, Region::h_ball(h, t));
                if (J < prevJ - 1e-9 * std::abs(prevJ)) ++violations;
                prevJ = J;
            }
            const SingularProfile sp = singular_terms(f, h, ts, {128, 128});
            for (size_t i = 0; i < sp.t.size(); ++i)
                if (sp.omega[i] < sp.S_f_total[i] * sp.S_f_total[i] / sp.S_h_total[i] - 1e-9)
                    ++violations;
        }
    }

    // index positivity and even sigma for random regular directions
    {
        auto cat = catalog_surface("catenoid");
        std::uniform_real_distribution<double> az(0.0, 2 * kPi);
        for (int trial = 0; trial < 3; ++trial) {
            const double phi = az(rng);
            const auto pts =
                find_critical_points(cat, Vec3(std::cos(phi), std::sin(phi), 0), {160, 160});
            if (pts.size() != 2) ++violations;
            for (const auto& p : pts)
                if (p.index < 1 || p.sigma % 2 != 0) ++violations;
        }
        auto enn = catalog_surface("enneper");
        for (const auto& p : find_critical_points(enn, Vec3(0.1, -0.05, -1), {160, 160}))
            if (p.index < 1 || p.sigma % 2 != 0) ++violations;
    }

    // lambda* monotone under inclusion; N-mean monotone in N
    {
        std::uniform_real_distribution<double> len(0.5, 4.0), wt(0.3, 3.0);
        for (int trial = 0; trial < 10; ++trial) {
            const double L = len(rng), tc = wt(rng), frac = 0.3 + 0.5 * (trial / 10.0);
            const double lam_full = kPi / (tc * L);
            const double lam_sub = kPi / (tc * frac * L);
            if (lam_sub < lam_full - 1e-12) ++violations;

            std::vector<WeightedPath> comps;
            const int n_comp = 1 + static_cast<int>(trial % 3);
            for (int c = 0; c < n_comp; ++c)
                comps.push_back(WeightedPath::uniform(len(rng), 48, wt(rng), (trial + c) % 2));
            double prev = -1;
            for (int N = 1; N <= 8; ++N) {
                const double val = n_mean_lower_bound(comps, N);
                if (val < prev - 1e-12) ++violations;
                prev = val;
            }
        }
    }

    report(9, "property suites over the catalog with seeded randomization", violations == 0,
           fmt("%d violations", violations));
}

void criterion10_numerical_hygiene() {
    // analytic vs finite-difference first derivatives at 1000 points/surface
    double worst_fd = 0.0;
    std::mt19937_64 rng(1010);
    for (const char* name : {"plane", "catenoid", "helicoid", "enneper"}) {
        auto s = catalog_surface(name);
        const DomainBox& b = s->domain();
        std::uniform_real_distribution<double> du(b.u0 + 0.01 * b.extent_u(),
                                                  b.u1 - 0.01 * b.extent_u());
        std::uniform_real_distribution<double> dv(b.v0 + 0.01 * b.extent_v(),
                                                  b.v1 - 0.01 * b.extent_v());
        const double h = 1e-5 * b.max_extent() / 8.0;
        for (int i = 0; i < 1000; ++i) {
            const double u = du(rng), v = dv(rng);
            const Jet2 j = s->jet(u, v);
            const Vec3 fu = (s->position(u + h, v) - s->position(u - h, v)) / (2 * h);
            const Vec3 fv = (s->position(u, v + h) - s->position(u, v - h)) / (2 * h);
            worst_fd = std::max(worst_fd, (fu - j.xu).norm() / std::max(1.0, j.xu.norm()));
            worst_fd = std::max(worst_fd, (fv - j.xv).norm() / std::max(1.0, j.xv.norm()));
        }
    }

    // grid refinement x2 moves headline quantities by < 1%
    auto cat = catalog_surface("catenoid");
    const ScalarField h = ScalarField::abs_coordinate(cat, Vec3(0, 0, 1));
    const std::vector<double> ts{0.6, 1.0, 1.4, 1.8, 2.2};
    const double S1 = full_flow(h, ts, {128, 128}, 2.0).S;
    const double S2 = full_flow(h, ts, {256, 256}, 2.0).S;
    const double dS = std::abs(S1 - S2) / S2;

    const double V1 = nested_projective_volume("catenoid", 1000.0, {128, 128}).V2;
    const double V2_ = nested_projective_volume("catenoid", 1000.0, {256, 256}).V2;
    const double dV = std::abs(V1 - V2_) / V2_;

    const int H1 = hump_count(cat, Vec3(1, 0, 0), 2.0, {128, 128}).count;
    const int H2 = hump_count(cat, Vec3(1, 0, 0), 2.0, {256, 256}).count;

    LevelSetExtractor ex1(h, {128, 128});
    LevelSetExtractor ex2(h, {256, 256});
    const double L1 = fundamental_frequency(ex1.extract(1.3), {}).lambda;
    const double L2 = fundamental_frequency(ex2.extract(1.3), {}).lambda;
    const double dL = std::abs(L1 - L2) / L2;

    const bool ok = worst_fd <= 1e-6 && dS < 0.01 && dV < 0.01 && H1 == H2 && dL < 0.01;
    report(10, "numerical hygiene: FD oracle and refinement stability", ok,
           fmt("fd=%.2e, dS=%.2e, dV2=%.2e, humps %d/%d, dlambda=%.2e", worst_fd, dS, dV, H1, H2,
               dL));
}

}  // namespace

int main() {
    std::printf("tractlab acceptance suite\n");
    const auto t0 = std::chrono::steady_clock::now();
    const ProjectiveVolumeEstimate cat_volume = criterion1_projective_volume();
    criterion2_bernstein();
    criterion3_humps(cat_volume);
    criterion4_index(cat_volume);
    criterion5_tubular();
    criterion6_main_inequality();
    criterion7_frequency_oracle();
    criterion8_capacity();
    criterion9_property_suites();
    criterion10_numerical_hygiene();
    std::printf("%d/10 criteria passed in %.1fs\n", 10 - g_failures, seconds_since(t0));
    return g_failures == 0 ? 0 : 1;
}
