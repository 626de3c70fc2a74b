#include "tractlab/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace tractlab {

double Polyline::length() const {
    double L = 0.0;
    const int n = size();
    for (int i = 0; i + 1 < n; ++i) L += (xyz[i + 1] - xyz[i]).norm();
    if (closed && n > 1) L += (xyz[0] - xyz[n - 1]).norm();
    return L;
}

int LevelSet::cycle_count() const {
    int c = 0;
    for (const auto& p : components) c += p.closed ? 1 : 0;
    return c;
}

int LevelSet::open_count() const { return static_cast<int>(components.size()) - cycle_count(); }

// ---------------------------------------------------------------------------

LevelSetExtractor::LevelSetExtractor(ScalarField field, GridSpec grid)
    : field_(std::move(field)), grid_(grid) {
    const DomainBox& box = field_.surface().domain();
    const int nu = grid_.nu, nv = grid_.nv;
    fvals_.resize((nu + 1) * (nv + 1));
    gnorm_.resize((nu + 1) * (nv + 1));
    fmin_ = std::numeric_limits<double>::infinity();
    fmax_ = -fmin_;
    max_grad_ = 0.0;
    for (int k = 0; k <= nv; ++k) {
        for (int i = 0; i <= nu; ++i) {
            const Vec2 p = node_uv(i, k);
            double val;
            double gn;
            if (box.periodic_u && i == nu) {
                val = fvals_[idx(0, k)];
                gn = gnorm_[idx(0, k)];
            } else {
                val = field_.value(p.x(), p.y());
                gn = field_.gradient_norm(p.x(), p.y());
            }
            fvals_[idx(i, k)] = val;
            gnorm_[idx(i, k)] = gn;
            fmin_ = std::min(fmin_, val);
            fmax_ = std::max(fmax_, val);
            max_grad_ = std::max(max_grad_, gn);
        }
    }
}

Vec2 LevelSetExtractor::node_uv(int i, int k) const {
    const DomainBox& box = field_.surface().domain();
    return {box.u0 + i * box.extent_u() / grid_.nu, box.v0 + k * box.extent_v() / grid_.nv};
}

Vec2 LevelSetExtractor::refine(Vec2 p, double t) const {
    const DomainBox& box = field_.surface().domain();
    const double scale = std::max({1.0, std::abs(t), fmax_ - fmin_});
    for (int it = 0; it < 25; ++it) {
        const double r = field_.value(p.x(), p.y()) - t;
        if (std::abs(r) <= 1e-13 * scale) break;
        const Vec2 g = field_.param_grad(p.x(), p.y());
        const double g2 = g.squaredNorm();
        if (g2 < 1e-30) break;
        Vec2 q = p - (r / g2) * g;
        // stay within half a cell of the seed so components cannot merge
        const double du = box.extent_u() / grid_.nu, dv = box.extent_v() / grid_.nv;
        q.x() = std::clamp(q.x(), p.x() - 0.6 * du, p.x() + 0.6 * du);
        q.y() = std::clamp(q.y(), p.y() - 0.6 * dv, p.y() + 0.6 * dv);
        if (!box.periodic_u) q.x() = std::clamp(q.x(), box.u0, box.u1);
        if (!box.periodic_v) q.y() = std::clamp(q.y(), box.v0, box.v1);
        p = q;
    }
    return p;
}

namespace {

// Edge of the node grid: axis 0 = horizontal (from node (i,k) to (i+1,k)),
// axis 1 = vertical (from (i,k) to (i,k+1)). Keys are canonical under wrap.
struct EdgeKey {
    int axis, i, k;
    bool operator<(const EdgeKey& o) const {
        if (axis != o.axis) return axis < o.axis;
        if (i != o.i) return i < o.i;
        return k < o.k;
    }
};

}  // namespace

void LevelSetExtractor::ensure_regular_level(double t) const {
    const int nu = grid_.nu, nv = grid_.nv;
    const double eps_node = 1e-6 * std::max(fmax_ - fmin_, 1e-300);
    const double eps_crit = 1e-4 * max_grad_;
    for (int k = 0; k <= nv; ++k)
        for (int i = 0; i <= nu; ++i)
            if (std::abs(fvals_[idx(i, k)] - t) < eps_node && gnorm_[idx(i, k)] < eps_crit)
                throw std::runtime_error("near-critical level t=" + std::to_string(t));
}

LevelSet LevelSetExtractor::extract(double t) const {
    const DomainBox& box = field_.surface().domain();
    const int nu = grid_.nu, nv = grid_.nv;
    ensure_regular_level(t);

    LevelSet out;
    out.level = t;
    out.grid = grid_;

    auto canon_i = [&](int i) { return box.periodic_u && i == nu ? 0 : i; };
    auto canon_k = [&](int k) { return box.periodic_v && k == nv ? 0 : k; };

    // crossing points per edge
    std::map<EdgeKey, int> edge_point;
    std::vector<Vec2> points;
    std::vector<std::array<int, 2>> segments;

    auto sign = [&](double g) { return g > 0.0; };
    auto crossing = [&](int axis, int i, int k) -> int {
        EdgeKey key{axis, axis == 0 ? i : canon_i(i), axis == 1 ? k : canon_k(k)};
        auto it = edge_point.find(key);
        if (it != edge_point.end()) return it->second;
        const int i2 = axis == 0 ? i + 1 : i;
        const int k2 = axis == 1 ? k + 1 : k;
        const double ga = fvals_[idx(i, k)] - t;
        const double gb = fvals_[idx(i2, k2)] - t;
        const double w = ga / (ga - gb);
        const Vec2 a = node_uv(i, k), b = node_uv(i2, k2);
        const int id = static_cast<int>(points.size());
        points.push_back(a + w * (b - a));
        edge_point.emplace(key, id);
        return id;
    };

    for (int k = 0; k < nv; ++k) {
        for (int i = 0; i < nu; ++i) {
            const double g00 = fvals_[idx(i, k)] - t;
            const double g10 = fvals_[idx(i + 1, k)] - t;
            const double g11 = fvals_[idx(i + 1, k + 1)] - t;
            const double g01 = fvals_[idx(i, k + 1)] - t;
            const int code = (sign(g00) ? 1 : 0) | (sign(g10) ? 2 : 0) | (sign(g11) ? 4 : 0) |
                             (sign(g01) ? 8 : 0);
            if (code == 0 || code == 15) continue;

            const int B = 0, R = 1, T = 2, L = 3;
            auto edge_id = [&](int which) {
                switch (which) {
                    case 0: return crossing(0, i, k);
                    case 1: return crossing(1, i + 1, k);
                    case 2: return crossing(0, i, k + 1);
                    default: return crossing(1, i, k);
                }
            };
            auto emit = [&](int a, int b) { segments.push_back({edge_id(a), edge_id(b)}); };

            switch (code) {
                case 1: case 14: emit(L, B); break;
                case 2: case 13: emit(B, R); break;
                case 4: case 11: emit(R, T); break;
                case 8: case 7: emit(T, L); break;
                case 3: case 12: emit(L, R); break;
                case 6: case 9: emit(B, T); break;
                case 5: case 10: {
                    // saddle cell: the value at the center picks the pairing
                    const Vec2 a = node_uv(i, k), b = node_uv(i + 1, k + 1);
                    const Vec2 c = 0.5 * (a + b);
                    const bool center_pos = sign(field_.value(c.x(), c.y()) - t);
                    const bool diag00 = (code == 5);  // positive corners on the 00-11 diagonal
                    if (center_pos == diag00) {
                        emit(B, R);
                        emit(T, L);
                    } else {
                        emit(L, B);
                        emit(R, T);
                    }
                    break;
                }
                default: break;
            }
        }
    }

    if (segments.empty()) return out;

    // adjacency: each crossing point meets one or two segments
    std::vector<std::vector<int>> incident(points.size());
    for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
        incident[segments[s][0]].push_back(s);
        incident[segments[s][1]].push_back(s);
    }

    std::vector<bool> used(segments.size(), false);
    auto walk = [&](int start_point, int start_seg) {
        std::vector<int> chain{start_point};
        int p = start_point, s = start_seg;
        while (true) {
            used[s] = true;
            const int q = segments[s][0] == p ? segments[s][1] : segments[s][0];
            chain.push_back(q);
            p = q;
            int next = -1;
            for (int cand : incident[p])
                if (!used[cand]) { next = cand; break; }
            if (next < 0) break;
            s = next;
        }
        return chain;
    };

    std::vector<std::vector<int>> chains;
    for (int p = 0; p < static_cast<int>(points.size()); ++p)
        if (incident[p].size() == 1 && !used[incident[p][0]])
            chains.push_back(walk(p, incident[p][0]));
    for (int s = 0; s < static_cast<int>(segments.size()); ++s)
        if (!used[s]) chains.push_back(walk(segments[s][0], s));  // remaining are cycles

    for (auto& chain : chains) {
        Polyline poly;
        poly.closed = chain.front() == chain.back();
        if (poly.closed) chain.pop_back();
        if (static_cast<int>(chain.size()) < 2) continue;
        poly.uv.reserve(chain.size());
        for (int pid : chain) {
            Vec2 p = refine(points[pid], t);
            double wu = p.x(), wv = p.y();
            box.wrap(wu, wv);
            poly.uv.emplace_back(wu, wv);
            poly.xyz.push_back(field_.surface().position(wu, wv));
            poly.theta.push_back(field_.gradient_norm(wu, wv));
        }
        out.components.push_back(std::move(poly));
    }

    std::sort(out.components.begin(), out.components.end(),
              [](const Polyline& a, const Polyline& b) {
                  if (a.uv[0].y() != b.uv[0].y()) return a.uv[0].y() < b.uv[0].y();
                  return a.uv[0].x() < b.uv[0].x();
              });
    return out;
}

LevelSet extract_level_set(const ScalarField& field, double t, const GridSpec& grid) {
    return LevelSetExtractor(field, grid).extract(t);
}

// ---------------------------------------------------------------------------

namespace {

double polyline_integral(const Polyline& p, const std::vector<double>& w) {
    double acc = 0.0;
    const int n = p.size();
    for (int i = 0; i + 1 < n; ++i)
        acc += 0.5 * (w[i] + w[i + 1]) * (p.xyz[i + 1] - p.xyz[i]).norm();
    if (p.closed && n > 1) acc += 0.5 * (w[n - 1] + w[0]) * (p.xyz[0] - p.xyz[n - 1]).norm();
    return acc;
}

}  // namespace

ComponentLength weighted_length(const LevelSet& ls) {
    ComponentLength out;
    for (const auto& p : ls.components) {
        out.per_component.push_back(polyline_integral(p, p.theta));
        out.total += out.per_component.back();
    }
    return out;
}

ComponentLength weighted_length(const LevelSet& ls,
                                const std::function<double(double, double)>& theta) {
    ComponentLength out;
    std::vector<double> w;
    for (const auto& p : ls.components) {
        w.resize(p.size());
        for (int i = 0; i < p.size(); ++i) w[i] = theta(p.uv[i].x(), p.uv[i].y());
        out.per_component.push_back(polyline_integral(p, w));
        out.total += out.per_component.back();
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

SuperlevelComponents label_cells(const ScalarField& field, double tau, const GridSpec& grid) {
    const DomainBox& box = field.surface().domain();
    const int nu = grid.nu, nv = grid.nv;
    SuperlevelComponents out;
    out.threshold = tau;
    out.grid = grid;
    out.box = box;
    out.label.assign(static_cast<size_t>(nu) * nv, -1);

    std::vector<char> in(static_cast<size_t>(nu) * nv, 0);
    for (int k = 0; k < nv; ++k)
        for (int i = 0; i < nu; ++i) {
            const double u = box.u0 + (i + 0.5) * box.extent_u() / nu;
            const double v = box.v0 + (k + 0.5) * box.extent_v() / nv;
            in[k * nu + i] = field.value(u, v) > tau ? 1 : 0;
        }

    auto cell = [nu](int i, int k) { return k * nu + i; };
    int next = 0;
    for (int k0 = 0; k0 < nv; ++k0) {
        for (int i0 = 0; i0 < nu; ++i0) {
            if (!in[cell(i0, k0)] || out.label[cell(i0, k0)] >= 0) continue;
            const int id = next++;
            out.representative.emplace_back(i0, k0);
            out.touches_truncation.push_back(false);
            out.cell_count.push_back(0);
            std::queue<std::pair<int, int>> q;
            q.emplace(i0, k0);
            out.label[cell(i0, k0)] = id;
            while (!q.empty()) {
                auto [i, k] = q.front();
                q.pop();
                ++out.cell_count[id];
                if ((!box.periodic_u && (i == 0 || i == nu - 1)) ||
                    (!box.periodic_v && (k == 0 || k == nv - 1)))
                    out.touches_truncation[id] = true;
                const int di[4] = {1, -1, 0, 0};
                const int dk[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    int ni = i + di[d], nk = k + dk[d];
                    if (box.periodic_u) ni = (ni + nu) % nu;
                    if (box.periodic_v) nk = (nk + nv) % nv;
                    if (ni < 0 || ni >= nu || nk < 0 || nk >= nv) continue;
                    if (!in[cell(ni, nk)] || out.label[cell(ni, nk)] >= 0) continue;
                    out.label[cell(ni, nk)] = id;
                    q.emplace(ni, nk);
                }
            }
        }
    }
    out.count = next;
    return out;
}

}  // namespace

int SuperlevelComponents::label_at(double u, double v) const {
    box.wrap(u, v);
    int i = static_cast<int>((u - box.u0) / box.extent_u() * grid.nu);
    int k = static_cast<int>((v - box.v0) / box.extent_v() * grid.nv);
    i = std::clamp(i, 0, grid.nu - 1);
    k = std::clamp(k, 0, grid.nv - 1);
    return cell_label(i, k);
}

bool SuperlevelComponents::component_contains(int parent_id, const SuperlevelComponents& child,
                                              int child_id) const {
    if (child.grid.nu != grid.nu || child.grid.nv != grid.nv)
        throw std::invalid_argument("containment check requires matching grids");
    for (int k = 0; k < grid.nv; ++k)
        for (int i = 0; i < grid.nu; ++i)
            if (child.cell_label(i, k) == child_id && cell_label(i, k) != parent_id)
                return false;
    return true;
}

SuperlevelComponents superlevel_components(const ScalarField& field, double tau,
                                           const GridSpec& grid, bool check_refinement) {
    SuperlevelComponents out = label_cells(field, tau, grid);
    if (check_refinement) {
        SuperlevelComponents fine = label_cells(field, tau, grid.refined());
        out.resolved = (fine.count == out.count);
    }
    return out;
}

}  // namespace tractlab
