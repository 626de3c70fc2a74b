#include "tractlab/energy.hpp"

#include "tractlab/spectra.hpp"

#include <algorithm>
#include <cmath>

namespace tractlab {

Region Region::h_ball(const ScalarField& h, double t) {
    ScalarField copy = h;
    return {[copy, t](double u, double v) { return copy.value(u, v) < t; }};
}

Region Region::component(const SuperlevelComponents& comps, int id) {
    auto lookup = std::make_shared<SuperlevelComponents>(comps);
    return {[lookup, id](double u, double v) { return lookup->label_at(u, v) == id; }};
}

Region Region::intersect(Region a, Region b) {
    if (!a.contains) return b;
    if (!b.contains) return a;
    auto fa = a.contains, fb = b.contains;
    return {[fa, fb](double u, double v) { return fa(u, v) && fb(u, v); }};
}

double main_inequality_constant(double alpha) {
    if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
    return alpha >= 2.0 ? (alpha - 1.0) / alpha : 1.0 / alpha;
}

double region_integral(const SurfaceChart& surface, const GridSpec& grid, const Region& region,
                       const std::function<double(double, double)>& raw_density) {
    const DomainBox& box = surface.domain();
    const double du = box.extent_u() / grid.nu;
    const double dv = box.extent_v() / grid.nv;
    const int sub = 8;  // subsamples per axis on boundary cells

    auto density = [&](double u, double v) {
        return raw_density(u, v) * surface.area_element(u, v);
    };

    double acc = 0.0;
    for (int k = 0; k < grid.nv; ++k) {
        for (int i = 0; i < grid.nu; ++i) {
            const double u0 = box.u0 + i * du, v0 = box.v0 + k * dv;
            const double uc = u0 + 0.5 * du, vc = v0 + 0.5 * dv;
            if (!region.contains) {
                acc += density(uc, vc) * du * dv;
                continue;
            }
            const bool c = region.test(uc, vc);
            const bool b0 = region.test(u0, v0), b1 = region.test(u0 + du, v0);
            const bool b2 = region.test(u0 + du, v0 + dv), b3 = region.test(u0, v0 + dv);
            if (c && b0 && b1 && b2 && b3) {
                acc += density(uc, vc) * du * dv;
            } else if (c || b0 || b1 || b2 || b3) {
                double part = 0.0;
                for (int a = 0; a < sub; ++a)
                    for (int b = 0; b < sub; ++b) {
                        const double us = u0 + (a + 0.5) * du / sub;
                        const double vs = v0 + (b + 0.5) * dv / sub;
                        if (region.test(us, vs)) part += density(us, vs);
                    }
                acc += part * du * dv / (sub * sub);
            }
        }
    }
    return acc;
}

double dirichlet_integral(const ScalarField& f, double alpha, const GridSpec& grid,
                          const Region& region) {
    return region_integral(f.surface(), grid, region, [&f, alpha](double u, double v) {
        return std::pow(f.gradient_norm(u, v), alpha);
    });
}

FullFlow full_flow(const ScalarField& h, const std::vector<double>& t_samples,
                   const GridSpec& grid, double alpha) {
    if (t_samples.empty()) throw std::invalid_argument("full_flow: empty t_samples");
    LevelSetExtractor ex(h, grid);
    FullFlow out;
    for (double t : t_samples) {
        const LevelSet ls = ex.extract(t);
        if (ls.empty())
            throw std::runtime_error("full_flow: empty level set at t=" + std::to_string(t) +
                                     " (outside the chart's exhaustion range)");
        ScalarField hc = h;
        const ComponentLength len = weighted_length(ls, [&hc, alpha](double u, double v) {
            return std::pow(hc.gradient_norm(u, v), alpha - 1.0);
        });
        out.t.push_back(t);
        out.per_t.push_back(len.total);
    }
    double mean = 0.0;
    for (double s : out.per_t) mean += s;
    mean /= out.per_t.size();
    out.S = mean;
    for (double s : out.per_t)
        out.max_relative_deviation = std::max(out.max_relative_deviation,
                                              std::abs(s - mean) / std::abs(mean));
    if (out.max_relative_deviation > 0.01)
        throw std::runtime_error("flow not constant across t (deviation " +
                                 std::to_string(out.max_relative_deviation) +
                                 "): exhaustion not alpha-harmonic or grid too coarse");
    return out;
}

double capacity_closed_form(double S_h, double t1, double t2, double alpha) {
    if (!(t1 < t2)) throw std::invalid_argument("capacity requires t1 < t2");
    return std::pow(S_h / (t2 - t1), alpha - 1.0);
}

double capacity_variational(const ScalarField& h, double t1, double t2, double alpha,
                            const GridSpec& grid) {
    if (!(t1 < t2)) throw std::invalid_argument("capacity requires t1 < t2");
    ScalarField hc = h;
    Region shell{[hc, t1, t2](double u, double v) {
        const double val = hc.value(u, v);
        return val > t1 && val < t2;
    }};
    return dirichlet_integral(h, alpha, grid, shell) / std::pow(t2 - t1, alpha);
}

double max_modulus(const ScalarField& f, const LevelSet& sigma, double floor_tau,
                   const Region* D) {
    if (sigma.empty()) throw std::runtime_error("max_modulus: empty level set");
    double best = floor_tau;
    for (const Polyline& p : sigma.components)
        for (const Vec2& q : p.uv) {
            if (D && !D->test(q.x(), q.y())) continue;
            best = std::max(best, f.value(q.x(), q.y()));
        }
    return best;
}

SingularProfile singular_terms(const ScalarField& f, const ScalarField& h,
                               const std::vector<double>& t_grid, const GridSpec& grid) {
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("singular_terms: t_grid must be increasing");
    LevelSetExtractor ex(h, grid);
    SingularProfile out;
    for (double t : t_grid) {
        const LevelSet ls = ex.extract(t);
        if (ls.empty()) throw std::runtime_error("singular_terms: empty h-sphere");
        std::vector<CycleFlow> flows;
        double omega = 0.0, Sh = 0.0, Sf = 0.0, Qd = 0.0;
        for (const Polyline& poly : ls.components) {
            if (!poly.closed)
                throw std::runtime_error("open arcs present at t=" + std::to_string(t) +
                                         ": not tubular at this level");
            CycleFlow cf;
            const int n = poly.size();
            std::vector<double> fvals(n), flux(n);
            for (int i = 0; i < n; ++i) {
                const double u = poly.uv[i].x(), v = poly.uv[i].y();
                fvals[i] = f.value(u, v);
                const auto [gf, gfn] = f.surface_gradient(u, v);
                const auto [gh, ghn] = h.surface_gradient(u, v);
                flux[i] = ghn > 0 ? gf.dot(gh) / ghn : 0.0;
            }
            WeightedPath path = WeightedPath::from_polyline(poly);
            cf.S_h = theta_integral(path);
            cf.q = admissible_shift(path, fvals, 2.0);
            // signed flow: trapezoid of <grad f, grad h/|grad h|> ds
            double sf = 0.0;
            for (int i = 0; i < n; ++i) {
                const int j = (i + 1) % n;
                const double ds = (poly.xyz[j] - poly.xyz[i]).norm();
                sf += 0.5 * (flux[i] + flux[j]) * ds;
            }
            cf.S_f = sf;
            omega += cf.S_f * cf.S_f / cf.S_h;
            Sh += cf.S_h;
            Sf += cf.S_f;
            Qd += cf.q * cf.S_f;
            flows.push_back(cf);
        }
        out.t.push_back(t);
        out.cycles.push_back(std::move(flows));
        out.omega.push_back(omega);
        out.S_h_total.push_back(Sh);
        out.S_f_total.push_back(Sf);
        out.Q_direct.push_back(Qd);
    }
    // Q(t) = int_0^t omega; omega is assumed constant below the first sample
    out.Q.resize(out.t.size());
    if (!out.t.empty()) {
        out.Q[0] = out.t[0] * out.omega[0];
        for (size_t i = 1; i < out.t.size(); ++i)
            out.Q[i] = out.Q[i - 1] +
                       0.5 * (out.omega[i] + out.omega[i - 1]) * (out.t[i] - out.t[i - 1]);
    }
    return out;
}

EnergyProfile compute_energy_profile(const ScalarField& f, const ScalarField& h,
                                     const std::vector<double>& t_grid, double alpha,
                                     const GridSpec& grid, bool with_singular_terms) {
    EnergyProfile out;
    out.alpha = alpha;
    out.c_alpha = main_inequality_constant(alpha);
    out.t = t_grid;

    LevelSetExtractor ex(h, grid);
    for (double t : t_grid) {
        out.J.push_back(dirichlet_integral(f, alpha, grid, Region::h_ball(h, t)));
        const LevelSet ls = ex.extract(t);
        out.M.push_back(max_modulus(f, ls, 0.0));
    }
    const FullFlow flow = full_flow(h, t_grid, grid, alpha);
    out.S_h = flow.S;
    if (with_singular_terms) {
        const SingularProfile sp = singular_terms(f, h, t_grid, grid);
        out.Q = sp.Q;
        out.omega = sp.omega;
    } else {
        out.Q.assign(t_grid.size(), 0.0);
        out.omega.assign(t_grid.size(), 0.0);
    }
    return out;
}

std::vector<double> make_regular_t_grid(const LevelSetExtractor& ex, double lo, double hi,
                                        int count, bool log_spaced) {
    if (!(lo < hi) || count < 2) throw std::invalid_argument("bad t-grid request");
    // near-critical sample values, scanned on a coarse grid
    std::vector<double> critical;
    const GridSpec& g = ex.grid();
    const double eps_crit = 1e-4 * ex.max_gradient();
    const ScalarField& f = ex.field();
    const DomainBox& box = f.surface().domain();
    const int nu = std::min(g.nu, 128), nv = std::min(g.nv, 128);
    for (int k = 0; k <= nv; ++k)
        for (int i = 0; i <= nu; ++i) {
            const double u = box.u0 + i * box.extent_u() / nu;
            const double v = box.v0 + k * box.extent_v() / nv;
            if (f.gradient_norm(u, v) < eps_crit) critical.push_back(f.value(u, v));
        }
    std::sort(critical.begin(), critical.end());
    critical.erase(std::unique(critical.begin(), critical.end(),
                               [&](double a, double b) { return std::abs(a - b) < 1e-9; }),
                   critical.end());

    std::vector<double> t(count);
    const double step = log_spaced ? (std::log(hi) - std::log(lo)) / (count - 1)
                                   : (hi - lo) / (count - 1);
    const double guard = 5.0 * std::abs(step) * (log_spaced ? hi : 1.0);
    for (int i = 0; i < count; ++i) {
        double val = log_spaced ? std::exp(std::log(lo) + i * step) : lo + i * step;
        for (double c : critical) {
            const double local_guard = log_spaced ? 5.0 * val * step : guard;
            if (std::abs(val - c) < local_guard) val = c + local_guard;
        }
        t[i] = val;
    }
    std::sort(t.begin(), t.end());
    return t;
}

}  // namespace tractlab
