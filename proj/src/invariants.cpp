#include "tractlab/invariants.hpp"

#include "tractlab/spectra.hpp"

#include <algorithm>
#include <cmath>

namespace tractlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kOmega2 = 2 * kPi;  // length of the unit circle

struct LinearFit {
    double slope = 0, intercept = 0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

void fit_and_flag(ProjectiveVolumeEstimate& out) {
    const double t_hi = out.t_grid.back(), t_lo = out.t_grid.front();
    std::vector<double> lx, ly, qx, qy;
    for (size_t i = 0; i < out.t_grid.size(); ++i) {
        if (out.t_grid[i] < t_hi / 10.0) continue;
        lx.push_back(std::log(out.t_grid[i]));
        ly.push_back(out.V_of_t[i]);
        qx.push_back(out.t_grid[i] * out.t_grid[i]);
        qy.push_back(out.area_of_t[i]);
    }
    out.slope_fit_V = least_squares(lx, ly).slope / kOmega2;
    out.slope_fit_area = 2.0 * least_squares(qx, qy).slope / kOmega2;

    std::vector<double> decade_slopes;
    for (double d = t_lo; d * 10.0 <= t_hi * 1.0001; d *= 10.0) {
        std::vector<double> dx, dy;
        for (size_t i = 0; i < out.t_grid.size(); ++i)
            if (out.t_grid[i] >= d && out.t_grid[i] <= d * 10.0) {
                dx.push_back(std::log(out.t_grid[i]));
                dy.push_back(out.V_of_t[i]);
            }
        if (dx.size() >= 2) decade_slopes.push_back(least_squares(dx, dy).slope);
    }
    out.diverged = decade_slopes.size() >= 2 &&
                   decade_slopes.back() > 2.0 * std::max(1e-12, decade_slopes.front());
    out.V2 = out.diverged ? std::numeric_limits<double>::infinity() : out.slope_fit_V;
}

double min_boundary_radius(const SurfaceChart& s, int samples = 512) {
    const DomainBox& b = s.domain();
    double r = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= samples; ++i) {
        const double u = b.u0 + i * b.extent_u() / samples;
        const double v = b.v0 + i * b.extent_v() / samples;
        if (!b.periodic_v) {
            r = std::min(r, s.position(u, b.v0).norm());
            r = std::min(r, s.position(u, b.v1).norm());
        }
        if (!b.periodic_u) {
            r = std::min(r, s.position(b.u0, v).norm());
            r = std::min(r, s.position(b.u1, v).norm());
        }
    }
    return r;
}

}  // namespace

std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (count - 1));
    return out;
}

ProjectiveVolumeEstimate projective_volume(const SurfacePtr& surface,
                                           const std::vector<double>& t_grid,
                                           const GridSpec& grid) {
    if (t_grid.size() < 2) throw std::invalid_argument("t_grid too short");
    const double t_lo = t_grid.front(), t_hi = t_grid.back();
    if (t_hi / t_lo < 99.0) throw std::invalid_argument("t_grid too short (<2 decades)");
    if (min_boundary_radius(*surface) < t_hi)
        throw std::runtime_error("surface not proper on the truncation box: boundary |x| below max t");

    const ScalarField h = ScalarField::norm(surface);
    LevelSetExtractor ex(h, grid);

    // accumulation levels: from just above |x| = 1 through the whole t range
    const double s_lo = std::max(1.0 + 1e-3, 1.001 * std::max(1e-6, ex.field_min()));
    const int per_decade = 24;
    const int n_levels = std::max<int>(48, static_cast<int>(per_decade * std::log10(t_hi / s_lo)));
    std::vector<double> s_levels = log_spaced(s_lo, t_hi, n_levels);
    for (double t : t_grid)
        if (t > s_lo) s_levels.push_back(t);
    std::sort(s_levels.begin(), s_levels.end());
    s_levels.erase(std::unique(s_levels.begin(), s_levels.end()), s_levels.end());

    // coarea densities: w_V(s) = s^-2 int ds/|grad h|, w_A(s) = int ds/|grad h|
    std::vector<double> sv, wV, wA;
    ScalarField hc = h;
    for (double s : s_levels) {
        LevelSet ls;
        bool ok = false;
        for (int tries = 0; tries < 4 && !ok; ++tries) {
            try {
                ls = ex.extract(s);
                ok = true;
            } catch (const std::exception&) {
                s *= 1.0007;  // nudge off a near-critical sample
            }
        }
        if (!ok || ls.empty()) continue;
        const ComponentLength len = weighted_length(ls, [&hc](double u, double v) {
            const double g = hc.gradient_norm(u, v);
            return g > 1e-9 ? 1.0 / g : 0.0;
        });
        sv.push_back(s);
        wV.push_back(len.total / (s * s));
        wA.push_back(len.total);
    }
    if (sv.size() < 8) throw std::runtime_error("projective volume: too few regular levels");

    // cumulative trapezoids, then sample at the requested t grid
    std::vector<double> cumV(sv.size(), 0.0), cumA(sv.size(), 0.0);
    for (size_t i = 1; i < sv.size(); ++i) {
        cumV[i] = cumV[i - 1] + 0.5 * (wV[i] + wV[i - 1]) * (sv[i] - sv[i - 1]);
        cumA[i] = cumA[i - 1] + 0.5 * (wA[i] + wA[i - 1]) * (sv[i] - sv[i - 1]);
    }
    auto at = [&](const std::vector<double>& cum, double t) {
        auto it = std::lower_bound(sv.begin(), sv.end(), t);
        size_t j = std::min<size_t>(sv.size() - 1, it - sv.begin());
        if (j == 0) return cum[0];
        const double w = (t - sv[j - 1]) / (sv[j] - sv[j - 1]);
        return cum[j - 1] + w * (cum[j] - cum[j - 1]);
    };

    ProjectiveVolumeEstimate out;
    out.t_grid = t_grid;
    for (double t : t_grid) {
        out.V_of_t.push_back(at(cumV, t));
        out.area_of_t.push_back(at(cumA, t));
    }
    fit_and_flag(out);
    return out;
}

ProjectiveVolumeEstimate nested_projective_volume(const std::string& name, double radius,
                                                  const GridSpec& grid, int levels_per_decade,
                                                  int t_per_decade) {
    if (radius < 99.0) throw std::invalid_argument("t_grid too short (<2 decades)");
    const int decades = static_cast<int>(std::round(std::log10(radius))) - 1;

    // inner shell {1 < |x| < 10} by cell quadrature on a small box
    const double t_base = 10.0;
    SurfacePtr inner = catalog_surface(name, box_for_radius(name, 1.05 * t_base));
    auto inv_r2 = [&inner](double u, double v) {
        const double r2 = inner->position(u, v).squaredNorm();
        return 1.0 / r2;
    };
    const ScalarField h_inner = ScalarField::norm(inner);
    ScalarField h_copy = h_inner;
    Region shell{[h_copy, t_base](double u, double v) {
        const double r = h_copy.value(u, v);
        return r > 1.0 && r < t_base;
    }};
    double V_acc = region_integral(*inner, grid, shell, inv_r2);
    double A_acc = region_integral(*inner, grid, shell, [](double, double) { return 1.0; });

    ProjectiveVolumeEstimate out;
    out.t_grid.push_back(t_base);
    out.V_of_t.push_back(V_acc);
    out.area_of_t.push_back(A_acc);

    // outer decades by coarea accumulation, one box per decade
    for (int d = 0; d < decades; ++d) {
        const double lo = t_base * std::pow(10.0, d);
        const double hi = std::min(radius, lo * 10.0);
        SurfacePtr surf = catalog_surface(name, box_for_radius(name, 1.05 * hi));
        const ScalarField h = ScalarField::norm(surf);
        LevelSetExtractor ex(h, grid);
        ScalarField hc = h;
        auto inv_grad = [&hc](double u, double v) {
            const double g = hc.gradient_norm(u, v);
            return g > 1e-9 ? 1.0 / g : 0.0;
        };
        std::vector<double> levels = log_spaced(lo, hi, levels_per_decade);
        for (int i = 1; i <= t_per_decade; ++i)
            levels.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / t_per_decade));
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

        double prev_s = -1, prev_wV = 0, prev_wA = 0;
        std::vector<double> report_at = log_spaced(lo, hi, t_per_decade + 1);
        size_t next_report = 1;  // skip lo itself (already reported)
        for (double s : levels) {
            LevelSet ls;
            try {
                ls = ex.extract(s);
            } catch (const std::exception&) {
                continue;
            }
            if (ls.empty()) continue;
            const ComponentLength len = weighted_length(ls, inv_grad);
            const double wV = len.total / (s * s), wA = len.total;
            if (prev_s > 0) {
                V_acc += 0.5 * (wV + prev_wV) * (s - prev_s);
                A_acc += 0.5 * (wA + prev_wA) * (s - prev_s);
            }
            prev_s = s;
            prev_wV = wV;
            prev_wA = wA;
            while (next_report < report_at.size() && s >= report_at[next_report] * 0.99999) {
                out.t_grid.push_back(s);
                out.V_of_t.push_back(V_acc);
                out.area_of_t.push_back(A_acc);
                ++next_report;
            }
        }
    }
    if (out.t_grid.size() < 6) throw std::runtime_error("projective volume: too few levels");
    fit_and_flag(out);
    return out;
}

// ---------------------------------------------------------------------------

MultiplicityIntegral projection_multiplicity_integral(const SurfacePtr& surface,
                                                      const Vec3& plane_normal,
                                                      const std::vector<double>& R_values,
                                                      int n_t, int n_theta,
                                                      const GridSpec& grid) {
    if (R_values.empty()) throw std::invalid_argument("no R values requested");
    const double R_max = *std::max_element(R_values.begin(), R_values.end());

    // orthonormal basis of the projection plane
    const Vec3 w = plane_normal.normalized();
    Vec3 p = std::abs(w.z()) < 0.9 ? w.cross(Vec3(0, 0, 1)) : w.cross(Vec3(1, 0, 0));
    p.normalize();
    const Vec3 q = w.cross(p);
    auto project = [&](const Vec3& x) { return Vec2{x.dot(p), x.dot(q)}; };

    // properness: the projected truncation boundary must clear radius R_max
    {
        const DomainBox& b = surface->domain();
        double rmin = std::numeric_limits<double>::infinity();
        const int m = 1024;
        for (int i = 0; i <= m; ++i) {
            const double u = b.u0 + i * b.extent_u() / m;
            const double v = b.v0 + i * b.extent_v() / m;
            if (!b.periodic_v) {
                rmin = std::min(rmin, project(surface->position(u, b.v0)).norm());
                rmin = std::min(rmin, project(surface->position(u, b.v1)).norm());
            }
            if (!b.periodic_u) {
                rmin = std::min(rmin, project(surface->position(b.u0, v)).norm());
                rmin = std::min(rmin, project(surface->position(b.u1, v)).norm());
            }
        }
        if (rmin < R_max)
            throw std::runtime_error("projection properness violated at radius R=" +
                                     std::to_string(R_max));
    }

    const std::vector<double> radii = log_spaced(1.0, R_max, n_t);
    std::vector<std::vector<int>> counts(radii.size(), std::vector<int>(n_theta, 0));
    std::vector<Vec2> samples(radii.size() * n_theta);
    for (size_t it = 0; it < radii.size(); ++it)
        for (int jt = 0; jt < n_theta; ++jt) {
            // half-step offset keeps samples off cell edges of axis-aligned
            // projections (an edge point would count for both quads)
            const double th = 2 * kPi * (jt + 0.5) / n_theta;
            samples[it * n_theta + jt] = {radii[it] * std::cos(th), radii[it] * std::sin(th)};
        }

    const DomainBox& b = surface->domain();
    auto corner = [&](int i, int k) {
        return project(surface->position(b.u0 + i * b.extent_u() / grid.nu,
                                         b.v0 + k * b.extent_v() / grid.nv));
    };
    auto in_triangle = [](const Vec2& a, const Vec2& bb, const Vec2& c, const Vec2& pt) {
        auto cross = [](const Vec2& x, const Vec2& y) { return x.x() * y.y() - x.y() * y.x(); };
        const double d1 = cross(bb - a, pt - a);
        const double d2 = cross(c - bb, pt - bb);
        const double d3 = cross(a - c, pt - c);
        const bool neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
        const bool pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
        return !(neg && pos);
    };

    // cache one row of projected corners at a time
    std::vector<Vec2> row_lo(grid.nu + 1), row_hi(grid.nu + 1);
    for (int i = 0; i <= grid.nu; ++i) row_hi[i] = corner(i, 0);
    for (int k = 0; k < grid.nv; ++k) {
        std::swap(row_lo, row_hi);
        for (int i = 0; i <= grid.nu; ++i) row_hi[i] = corner(i, k + 1);
        for (int i = 0; i < grid.nu; ++i) {
            const Vec2 c00 = row_lo[i], c10 = row_lo[i + 1];
            const Vec2 c11 = row_hi[i + 1], c01 = row_hi[i];
            double rlo = std::min({c00.norm(), c10.norm(), c11.norm(), c01.norm()});
            double rhi = std::max({c00.norm(), c10.norm(), c11.norm(), c01.norm()});
            const double diam = std::max((c11 - c00).norm(), (c10 - c01).norm());
            rlo = std::max(0.0, rlo - diam);
            const auto lo_it = std::lower_bound(radii.begin(), radii.end(), rlo);
            for (size_t it = lo_it - radii.begin(); it < radii.size() && radii[it] <= rhi; ++it)
                for (int jt = 0; jt < n_theta; ++jt) {
                    const Vec2& pt = samples[it * n_theta + jt];
                    if (in_triangle(c00, c10, c11, pt) || in_triangle(c00, c11, c01, pt))
                        ++counts[it][jt];
                }
        }
    }

    // angular means, then the logarithmic average up to each requested R
    std::vector<double> angular(radii.size(), 0.0);
    for (size_t it = 0; it < radii.size(); ++it) {
        long total = 0;
        for (int jt = 0; jt < n_theta; ++jt) total += counts[it][jt];
        angular[it] = 2 * kPi * static_cast<double>(total) / n_theta;
    }

    MultiplicityIntegral out;
    for (double R : R_values) {
        double acc = 0.0;
        for (size_t i = 1; i < radii.size() && radii[i] <= R * 1.0001; ++i)
            acc += 0.5 * (angular[i] + angular[i - 1]) *
                   (std::log(radii[i]) - std::log(radii[i - 1]));
        out.R.push_back(R);
        out.value.push_back(acc / std::log(R));
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

int branch_count(const ScalarField& f, double u0, double v0, double level, double r_loc) {
    const int m = 720;
    int changes = 0;
    double prev = f.value(u0 + r_loc, v0) - level;
    for (int i = 1; i <= m; ++i) {
        const double phi = 2 * kPi * i / m;
        const double val = f.value(u0 + r_loc * std::cos(phi), v0 + r_loc * std::sin(phi)) - level;
        if ((val > 0) != (prev > 0)) ++changes;
        prev = val;
    }
    return changes;
}

}  // namespace

std::vector<CriticalPointRecord> find_critical_points(const SurfacePtr& surface, const Vec3& e,
                                                      const GridSpec& grid) {
    const ScalarField f = ScalarField::coordinate(surface, e);
    const DomainBox& box = surface->domain();
    const Vec3 dir = e.normalized();
    Vec3 a = std::abs(dir.z()) < 0.9 ? dir.cross(Vec3(0, 0, 1)) : dir.cross(Vec3(1, 0, 0));
    a.normalize();
    const Vec3 bvec = dir.cross(a);

    const int nu = grid.nu, nv = grid.nv;
    std::vector<double> gn((nu + 1) * (nv + 1));
    for (int k = 0; k <= nv; ++k)
        for (int i = 0; i <= nu; ++i)
            gn[k * (nu + 1) + i] = f.gradient_norm(box.u0 + i * box.extent_u() / nu,
                                                   box.v0 + k * box.extent_v() / nv);
    const double eps_seed = 0.5 * *std::max_element(gn.begin(), gn.end());

    // Newton on F(u,v) = (<nu_hat, a>, <nu_hat, b>): zeros are Gauss-map hits of +-e
    auto F = [&](double u, double v) {
        const Vec3 n = surface->normal(u, v);
        return Vec2{n.dot(a), n.dot(bvec)};
    };
    const double step = 1e-6 * box.max_extent();
    auto newton = [&](Vec2 p) -> std::optional<Vec2> {
        for (int it = 0; it < 40; ++it) {
            const Vec2 r = F(p.x(), p.y());
            if (r.norm() < 1e-12) return p;
            Mat2 J;
            J.col(0) = (F(p.x() + step, p.y()) - F(p.x() - step, p.y())) / (2 * step);
            J.col(1) = (F(p.x(), p.y() + step) - F(p.x(), p.y() - step)) / (2 * step);
            const double det = J.determinant();
            if (std::abs(det) < 1e-18) return std::nullopt;
            const Vec2 d = J.inverse() * r;
            p -= d;
            double wu = p.x(), wv = p.y();
            box.wrap(wu, wv);
            p = {wu, wv};
            if (!box.contains(p.x(), p.y(), 0.05 * box.max_extent())) return std::nullopt;
        }
        return F(p.x(), p.y()).norm() < 1e-10 ? std::optional<Vec2>(p) : std::nullopt;
    };

    std::vector<Vec2> found;
    auto record = [&](const Vec2& p) {
        if (!box.contains(p.x(), p.y())) return;
        for (const Vec2& q : found) {
            double du = std::abs(p.x() - q.x());
            if (box.periodic_u) du = std::min(du, box.extent_u() - du);
            double dv = std::abs(p.y() - q.y());
            if (box.periodic_v) dv = std::min(dv, box.extent_v() - dv);
            if (std::hypot(du, dv) < 1e-6) return;  // duplicate
        }
        found.push_back(p);
    };

    for (int k = 1; k < nv; ++k) {
        for (int i = box.periodic_u ? 0 : 1; i < nu; ++i) {
            const double g = gn[k * (nu + 1) + i];
            if (g >= eps_seed) continue;
            bool is_min = true;
            for (int dk = -1; dk <= 1 && is_min; ++dk)
                for (int di = -1; di <= 1; ++di) {
                    int ii = i + di;
                    if (box.periodic_u) ii = (ii + nu) % nu;
                    if (gn[(k + dk) * (nu + 1) + ii] < g) {
                        is_min = false;
                        break;
                    }
                }
            if (!is_min) continue;
            const Vec2 seed{box.u0 + i * box.extent_u() / nu, box.v0 + k * box.extent_v() / nv};
            if (auto p = newton(seed)) record(*p);
        }
    }

    std::sort(found.begin(), found.end(), [](const Vec2& x, const Vec2& y) {
        return x.y() != y.y() ? x.y() < y.y() : x.x() < y.x();
    });

    std::vector<CriticalPointRecord> out;
    for (const Vec2& p : found) {
        CriticalPointRecord rec;
        rec.u = p.x();
        rec.v = p.y();
        rec.value = f.value(p.x(), p.y());
        // level-set branches on a shrinking parameter circle, stable twice
        double r_loc = 1e-2;
        int sigma = branch_count(f, p.x(), p.y(), rec.value, r_loc);
        for (int it = 0; it < 8; ++it) {
            const int next = branch_count(f, p.x(), p.y(), rec.value, r_loc / 2);
            if (next == sigma) break;
            sigma = next;
            r_loc /= 2;
        }
        rec.sigma = sigma;
        rec.index = sigma / 2 - 1;
        rec.valid = (sigma % 2 == 0) && rec.index >= 1;
        out.push_back(rec);
    }
    return out;
}

IndexCheck index_theorem_check(const SurfacePtr& surface, const Vec3& e, const GridSpec& grid,
                               const ProjectiveVolumeEstimate& volume) {
    if (volume.diverged) throw std::invalid_argument("index bound requires finite V2");
    if (!surface->euler_char())
        throw std::invalid_argument("index bound requires a known Euler characteristic");
    IndexCheck out;
    out.critical_points = find_critical_points(surface, e, grid);
    for (const auto& rec : out.critical_points)
        out.sum_index += rec.valid ? rec.index : 0;
    out.V2 = volume.V2;
    out.chi = *surface->euler_char();
    out.satisfied = out.sum_index <= out.V2 - out.chi + 0.05;
    return out;
}

TubularGrowth tubular_growth_check(const ScalarField& f, const ScalarField& h,
                                   const std::vector<double>& t_grid, const GridSpec& grid) {
    TubularGrowth out;
    out.t = t_grid;
    const SingularProfile sp = singular_terms(f, h, t_grid, grid);  // throws on open arcs
    out.Q = sp.Q;
    const FullFlow flow = full_flow(h, t_grid, grid, 2.0);
    out.S_h = flow.S;
    out.bound = 8 * kPi / out.S_h;

    for (double t : t_grid)
        out.J.push_back(dirichlet_integral(f, 2.0, grid, Region::h_ball(h, t)));
    out.growth_at_top = std::log(out.J.back()) / t_grid.back();
    out.Q_over_J = out.Q.back() / out.J.back();
    out.condition_new_holds = out.Q_over_J < 0.05;

    // flow identity: lambda_h(Sigma_h(t)) = 2 pi min_j 1/S(h, Gamma_j) >= 4 pi / S(h)
    out.lambda_vs_4pi_over_S = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < sp.t.size(); ++i) {
        double min_inv = std::numeric_limits<double>::infinity();
        for (const CycleFlow& cf : sp.cycles[i]) min_inv = std::min(min_inv, 1.0 / cf.S_h);
        const double lam = 2 * kPi * min_inv;
        out.lambda_h.push_back(lam);
        out.lambda_vs_4pi_over_S = std::min(out.lambda_vs_4pi_over_S, lam * out.S_h / (4 * kPi));
        // deviation from the 4pi/S(h) form; zero in the equality case
        out.frequency_flow_gap = std::max(out.frequency_flow_gap, std::abs(lam - out.bound / 2.0));
    }
    return out;
}

}  // namespace tractlab
