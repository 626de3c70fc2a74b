#include "tractlab/tracts.hpp"

#include <algorithm>
#include <cmath>

namespace tractlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const char* to_string(Regularity r) {
    switch (r) {
        case Regularity::Regular: return "regular";
        case Regularity::Singular: return "singular";
        default: return "undetermined";
    }
}

std::vector<int> TractForest::chain(int leaf_node) const {
    std::vector<int> out;
    for (int n = leaf_node; n >= 0; n = nodes[n].parent) out.push_back(n);
    std::reverse(out.begin(), out.end());
    return out;
}

std::pair<const SuperlevelComponents*, int> TractForest::root_component(int leaf_node) const {
    const int root = chain(leaf_node).front();
    return {&levels[nodes[root].level], nodes[root].comp};
}

TractForest build_tract_forest(const ScalarField& f, const std::vector<double>& tau_grid,
                               const GridSpec& grid) {
    if (tau_grid.empty()) throw std::invalid_argument("empty tau grid");
    if (!std::is_sorted(tau_grid.begin(), tau_grid.end()))
        throw std::invalid_argument("tau grid must be increasing");
    LevelSetExtractor ex(f, grid);
    for (double tau : tau_grid) {
        try {
            ex.ensure_regular_level(tau);
        } catch (const std::exception&) {
            throw std::runtime_error("critical tau sampled: " + std::to_string(tau));
        }
    }

    TractForest forest;
    forest.tau_grid = tau_grid;
    std::vector<std::vector<int>> node_of_comp;  // per level, component id -> node index
    for (size_t lv = 0; lv < tau_grid.size(); ++lv) {
        forest.levels.push_back(superlevel_components(f, tau_grid[lv], grid,
                                                      /*check_refinement=*/lv == 0));
        const SuperlevelComponents& comps = forest.levels.back();
        node_of_comp.emplace_back(comps.count, -1);
        for (int c = 0; c < comps.count; ++c) {
            TractForest::Node node;
            node.level = static_cast<int>(lv);
            node.comp = c;
            node.touches_truncation = comps.touches_truncation[c];
            if (lv > 0) {
                // cellwise nesting: any cell of the child identifies the parent
                const auto [i, k] = comps.representative[c];
                const int parent_comp = forest.levels[lv - 1].cell_label(i, k);
                node.parent = parent_comp >= 0 ? node_of_comp[lv - 1][parent_comp] : -1;
            }
            node_of_comp[lv][c] = static_cast<int>(forest.nodes.size());
            forest.nodes.push_back(node);
        }
    }
    for (int id : node_of_comp.back()) forest.leaves_at_top.push_back(id);
    forest.leaf_regularity.assign(forest.leaves_at_top.size(), Regularity::Undetermined);
    return forest;
}

SectionComponents restrict_level_set(const LevelSet& sigma, const SuperlevelComponents& level,
                                     int comp_id) {
    SectionComponents out;
    for (const Polyline& poly : sigma.components) {
        const int n = poly.size();
        std::vector<char> in(n);
        int inside = 0;
        for (int i = 0; i < n; ++i) {
            in[i] = level.label_at(poly.uv[i].x(), poly.uv[i].y()) == comp_id;
            inside += in[i];
        }
        if (inside == 0) continue;
        if (inside == n) {
            WeightedPath p = WeightedPath::from_polyline(poly);
            p.closed = poly.closed;
            out.paths.push_back(std::move(p));
            if (poly.closed) ++out.cycles;
            continue;
        }
        // maximal runs of inside vertices become open arcs
        const int start = [&] {
            if (!poly.closed) return 0;
            for (int i = 0; i < n; ++i)
                if (!in[i]) return i;
            return 0;
        }();
        int i = 0;
        while (i < n) {
            const int gi = (start + i) % n;
            if (!in[gi]) {
                ++i;
                continue;
            }
            WeightedPath arc;
            arc.closed = false;
            double s = 0.0;
            int prev = -1;
            while (i < n) {
                const int gj = (start + i) % n;
                if (!in[gj]) break;
                if (prev >= 0) s += (poly.xyz[gj] - poly.xyz[prev]).norm();
                arc.s.push_back(s);
                arc.theta.push_back(poly.theta[gj]);
                prev = gj;
                ++i;
            }
            arc.length = s;
            if (arc.size() >= 2) out.paths.push_back(std::move(arc));
        }
    }
    return out;
}

RegularityReport classify_tract(const SuperlevelComponents& level, int comp_id,
                                const ScalarField& h, const std::vector<double>& t_samples,
                                const GridSpec& grid) {
    RegularityReport report;
    LevelSetExtractor ex(h, grid);
    for (double t : t_samples) {
        LevelSet sigma;
        try {
            sigma = ex.extract(t);
        } catch (const std::exception&) {
            continue;  // near-critical sample skipped
        }
        const SectionComponents sec = restrict_level_set(sigma, level, comp_id);
        report.t_samples.push_back(t);
        report.cycles_in_section.push_back(sec.cycles);
    }
    if (report.t_samples.empty()) return report;
    const size_t tail_begin = report.t_samples.size() / 2;
    bool tail_has_cycle = false, tail_all_cycles = true;
    for (size_t i = tail_begin; i < report.t_samples.size(); ++i) {
        if (report.cycles_in_section[i] > 0)
            tail_has_cycle = true;
        else
            tail_all_cycles = false;
    }
    report.verdict = !tail_has_cycle ? Regularity::Regular
                     : tail_all_cycles ? Regularity::Singular
                                       : Regularity::Undetermined;
    return report;
}

HumpCount hump_count(const SurfacePtr& surface, const Vec3& e, double a, const GridSpec& grid) {
    if (!(a > 0)) throw std::invalid_argument("slab half-width a must be positive");
    const ScalarField coord = ScalarField::coordinate(surface, e);
    LevelSetExtractor ex(coord, grid);
    const double range = ex.field_max() - ex.field_min();
    if (range < 1e-9 * (1 + std::abs(ex.field_max())))
        throw std::runtime_error("direction not regular: surface lies in a hyperplane");

    // regular direction: sampled hyperplane sections carry no compact component
    const std::vector<double> sections =
        make_regular_t_grid(ex, ex.field_min() + 0.05 * range, ex.field_max() - 0.05 * range, 9);
    for (double c : sections) {
        LevelSet ls;
        try {
            ls = ex.extract(c);
        } catch (const std::exception&) {
            continue;
        }
        for (const Polyline& p : ls.components)
            if (p.closed)
                throw std::runtime_error("direction not regular: compact section component at <x,e>=" +
                                         std::to_string(c));
    }

    // every component of {|f| > a} carries one sign of f, so the two
    // half-spaces are counted separately (robust when the separating strip
    // thins out near the truncation boundary)
    auto count_humps = [&](const SurfacePtr& s, const GridSpec& g) {
        int n = 0;
        for (const Vec3& dir : {Vec3(e), Vec3(-e)}) {
            const SuperlevelComponents comps =
                superlevel_components(ScalarField::coordinate(s, dir), a, g);
            for (int c = 0; c < comps.count; ++c)
                if (comps.touches_truncation[c]) ++n;
        }
        return n;
    };

    HumpCount out;
    out.slab_half_width = a;
    out.count = count_humps(surface, grid);

    // noncompactness proxy: count must persist when the box is enlarged x2
    try {
        const DomainBox& b = surface->domain();
        DomainBox big = b;
        const double cu = 0.5 * (b.u0 + b.u1), cv = 0.5 * (b.v0 + b.v1);
        if (!b.periodic_u) {
            big.u0 = cu - (cu - b.u0) * 2;
            big.u1 = cu + (b.u1 - cu) * 2;
        }
        if (!b.periodic_v) {
            big.v0 = cv - (cv - b.v0) * 2;
            big.v1 = cv + (b.v1 - cv) * 2;
        }
        SurfacePtr enlarged = catalog_surface(surface->name(), big);
        out.enlargement_stable = count_humps(enlarged, grid) == out.count;
        out.enlargement_checked = true;
    } catch (const std::exception&) {
        out.enlargement_checked = false;  // non-catalog chart, proxy not extendable
    }
    return out;
}

namespace {

// trapezoid of lambda-like integrands sampled on [t1, t2]
double integrate_samples(const std::vector<double>& t, const std::vector<double>& y) {
    double acc = 0.0;
    for (size_t i = 1; i < t.size(); ++i) acc += 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
    return acc;
}

double reduced_frequency_of_section(const SectionComponents& sec) {
    if (sec.cycles > 0) return 0.0;
    double lam = std::numeric_limits<double>::infinity();
    for (const WeightedPath& p : sec.paths) lam = std::min(lam, kPi / theta_integral(p));
    return std::isfinite(lam) ? lam : 0.0;
}

}  // namespace

MainInequalityCheck main_inequality_check(const SuperlevelComponents& level, int comp_id,
                                          const ScalarField& f, const ScalarField& h,
                                          double alpha, double t1, double t2,
                                          const GridSpec& grid, int lambda_samples) {
    if (!(t1 < t2)) throw std::invalid_argument("main inequality requires t1 < t2");
    if (alpha != 2.0)
        throw std::invalid_argument("level frequencies are closed-form for alpha = 2 only");
    MainInequalityCheck out;
    const Region D = Region::component(level, comp_id);
    out.lhs = dirichlet_integral(f, alpha, grid, Region::intersect(D, Region::h_ball(h, t1)));
    out.J_t2 = dirichlet_integral(f, alpha, grid, Region::intersect(D, Region::h_ball(h, t2)));

    LevelSetExtractor ex(h, grid);
    std::vector<double> ts, lam;
    for (int i = 0; i < lambda_samples; ++i) {
        const double t = t1 + (t2 - t1) * i / (lambda_samples - 1);
        try {
            const LevelSet sigma = ex.extract(t);
            const SectionComponents sec = restrict_level_set(sigma, level, comp_id);
            if (sec.paths.empty()) continue;
            ts.push_back(t);
            lam.push_back(reduced_frequency_of_section(sec));
        } catch (const std::exception&) {
            continue;  // near-critical t skipped; integral stays a lower bound
        }
    }
    out.lambda_integral = integrate_samples(ts, lam);
    out.rhs = out.J_t2 * std::exp(-main_inequality_constant(alpha) * out.lambda_integral);
    out.satisfied = out.lhs <= out.rhs * (1.0 + out.tolerance);
    return out;
}

NminCheck n_tract_inequality_check(const TractForest& forest, const ScalarField& f,
                                   const ScalarField& h, double alpha, double t1, double t2,
                                   const GridSpec& grid, int lambda_samples) {
    if (!(t1 < t2)) throw std::invalid_argument("requires t1 < t2");
    if (alpha != 2.0)
        throw std::invalid_argument("level frequencies are closed-form for alpha = 2 only");
    const int N = forest.tract_count();
    if (N < 1) throw std::invalid_argument("forest has no tracts");

    NminCheck out;
    double min_J = std::numeric_limits<double>::infinity();
    for (int leaf : forest.leaves_at_top) {
        const auto [level, comp] = forest.root_component(leaf);
        const Region D = Region::component(*level, comp);
        min_J = std::min(min_J, dirichlet_integral(f, alpha, grid,
                                                   Region::intersect(D, Region::h_ball(h, t1))));
    }
    out.lhs = N * min_J;

    LevelSetExtractor ex(h, grid);
    std::vector<double> ts, lam;
    for (int i = 0; i < lambda_samples; ++i) {
        const double t = t1 + (t2 - t1) * i / (lambda_samples - 1);
        try {
            lam.push_back(n_mean_lower_bound(ex.extract(t), N));
            ts.push_back(t);
        } catch (const std::exception&) {
            continue;
        }
    }
    const double integral = integrate_samples(ts, lam);
    const double J_full = dirichlet_integral(f, alpha, grid, Region::h_ball(h, t2));
    out.rhs = J_full * std::exp(-main_inequality_constant(alpha) * integral);
    out.satisfied = out.lhs <= out.rhs * 1.05;
    return out;
}

DenjoyReport denjoy_ahlfors_bound(const ScalarField& f, const ScalarField& h, double alpha,
                                  int N, const std::vector<std::pair<double, double>>& schedule,
                                  const GridSpec& grid) {
    if (schedule.empty()) throw std::invalid_argument("empty schedule");
    if (alpha != 2.0)
        throw std::invalid_argument("the N-mean lower bound is closed-form for alpha = 2 only");
    for (const auto& [t, xi] : schedule)
        if (!(t < xi)) throw std::invalid_argument("schedule requires t < xi");

    DenjoyReport out;
    LevelSetExtractor ex(h, grid);
    const double c = main_inequality_constant(alpha);
    const double t_anchor = schedule.front().first;

    double integral = 0.0;
    double prev_t = t_anchor;
    double prev_lam = n_mean_lower_bound(ex.extract(t_anchor), N);
    for (const auto& [t, xi] : schedule) {
        // advance the N-mean integral with a few intermediate samples
        const int steps = 4;
        for (int s = 1; s <= steps && t > prev_t; ++s) {
            const double y = prev_t + (t - prev_t) * s / steps;
            double lam = prev_lam;
            try {
                lam = n_mean_lower_bound(ex.extract(y), N);
            } catch (const std::exception&) {
            }
            integral += 0.5 * (lam + prev_lam) * (y - prev_t);
            prev_t = y;
            prev_lam = lam;
        }
        const double M = max_modulus(f, ex.extract(xi), 0.0);
        const double cap = capacity_variational(h, t, xi, alpha, grid);
        out.t.push_back(t);
        out.xi.push_back(xi);
        out.product.push_back(M * std::pow(cap, 1.0 / alpha) *
                              std::exp(-(c / alpha) * integral));
    }

    // trend of ln(product) vs ln(t) over the second half of the schedule
    const size_t half = out.t.size() / 2;
    if (out.t.size() >= 2 && out.product[half] > 0) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (size_t i = half; i < out.t.size(); ++i) {
            if (!(out.product[i] > 0)) continue;
            const double x = std::log(out.t[i]), y = std::log(out.product[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++n;
        }
        if (n >= 2) {
            const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            out.decays = slope < -0.05;
        }
    }
    out.implied_max_tracts = out.decays ? N - 1 : -1;
    return out;
}

}  // namespace tractlab
