#include "tractlab/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tractlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kThetaFloor = 1e-12;

void check_theta(const std::vector<double>& theta) {
    for (double w : theta)
        if (!(w >= kThetaFloor))
            throw std::invalid_argument("weight sample below 1e-12 rejected");
}

// segment list (a, b, length) covering the path including the wrap segment
struct Seg {
    int a, b;
    double len;
};

std::vector<Seg> segments(const WeightedPath& p) {
    std::vector<Seg> out;
    const int n = p.size();
    for (int i = 0; i + 1 < n; ++i) out.push_back({i, i + 1, p.s[i + 1] - p.s[i]});
    if (p.closed && n > 1) out.push_back({n - 1, 0, p.length - p.s[n - 1]});
    return out;
}

}  // namespace

WeightedPath WeightedPath::uniform(double length, int n, double theta_value, bool closed) {
    WeightedPath p;
    p.closed = closed;
    p.length = length;
    const int segs = closed ? n : n - 1;
    for (int i = 0; i < n; ++i) {
        p.s.push_back(length * i / segs);
        p.theta.push_back(theta_value);
    }
    return p;
}

WeightedPath WeightedPath::from_polyline(const Polyline& poly) {
    WeightedPath p;
    p.closed = poly.closed;
    const int n = poly.size();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        if (i > 0) acc += (poly.xyz[i] - poly.xyz[i - 1]).norm();
        p.s.push_back(acc);
        p.theta.push_back(poly.theta[i]);
    }
    p.length = acc + (poly.closed && n > 1 ? (poly.xyz[0] - poly.xyz[n - 1]).norm() : 0.0);
    return p;
}

double theta_integral(const WeightedPath& p) {
    double acc = 0.0;
    for (const Seg& e : segments(p)) acc += 0.5 * (p.theta[e.a] + p.theta[e.b]) * e.len;
    return acc;
}

// ---------------------------------------------------------------------------

FrequencyResult fundamental_frequency(const LevelSet& ls, const FrequencySpec& spec) {
    if (spec.alpha != 2.0)
        throw std::invalid_argument("closed-form frequency requires alpha = 2");
    if (ls.empty()) throw std::runtime_error("undefined frequency: empty level set");

    FrequencyResult out;
    out.method = "wirtinger_closed_form";
    out.lambda = std::numeric_limits<double>::infinity();
    bool any_cycle = false;
    for (int c = 0; c < static_cast<int>(ls.components.size()); ++c) {
        const Polyline& poly = ls.components[c];
        check_theta(poly.theta);
        const WeightedPath path = WeightedPath::from_polyline(poly);
        const double mass = theta_integral(path);
        ComponentFrequency cf;
        cf.component = c;
        cf.cyclic = poly.closed;
        cf.theta_integral = mass;
        cf.lambda = (poly.closed ? 2.0 * kPi : kPi) / mass;
        any_cycle |= poly.closed;
        out.lambda = std::min(out.lambda, cf.lambda);
        out.per_component.push_back(cf);
    }
    if (spec.reduced && any_cycle) out.lambda = 0.0;
    return out;
}

FrequencyResult fundamental_frequency_oracle(const LevelSet& ls, int n) {
    if (ls.empty()) throw std::runtime_error("undefined frequency: empty level set");
    FrequencyResult out;
    out.method = "rayleigh_oracle";
    out.lambda = std::numeric_limits<double>::infinity();
    for (int c = 0; c < static_cast<int>(ls.components.size()); ++c) {
        const Polyline& poly = ls.components[c];
        ComponentFrequency cf;
        cf.component = c;
        cf.cyclic = poly.closed;
        cf.theta_integral = theta_integral(WeightedPath::from_polyline(poly));
        cf.lambda = rayleigh_oracle(poly, 2.0, n);
        out.lambda = std::min(out.lambda, cf.lambda);
        out.per_component.push_back(cf);
    }
    return out;
}

double n_mean_lower_bound(const std::vector<WeightedPath>& components, int N) {
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    std::vector<double> cycle_mass;
    double mass = 0.0;
    for (const WeightedPath& p : components) {
        check_theta(p.theta);
        const double m = theta_integral(p);
        mass += m;
        if (p.closed) cycle_mass.push_back(m);
    }
    if (components.empty() || mass <= 0.0) return 0.0;
    const int cycles = static_cast<int>(cycle_mass.size());
    if (cycles >= N) return 0.0;

    // all components cut into N pieces: arithmetic/harmonic mean step
    double bound = kPi * N / mass;
    // decompositions may instead park whole cycles inside w subsets (each
    // such subset has reduced frequency zero) and cut the remaining material
    // into N - w arcs; parking the w smallest cycles gives the class bound
    std::sort(cycle_mass.begin(), cycle_mass.end());
    double parked = 0.0;
    for (int w = 1; w <= std::min(N - 1, cycles); ++w) {
        parked += cycle_mass[w - 1];
        const double avail = mass - parked;
        if (!(avail > 0.0)) break;
        bound = std::min(bound, kPi * (N - w) * (N - w) / (N * avail));
    }
    return bound;
}

double n_mean_lower_bound(const LevelSet& ls, int N) {
    std::vector<WeightedPath> comps;
    comps.reserve(ls.components.size());
    for (const Polyline& p : ls.components) comps.push_back(WeightedPath::from_polyline(p));
    return n_mean_lower_bound(comps, N);
}

// ---------------------------------------------------------------------------

namespace {

WeightedPath resample(const WeightedPath& p, int n) {
    WeightedPath out;
    out.closed = p.closed;
    out.length = p.length;
    const int segs = p.closed ? n : n - 1;
    auto theta_at = [&](double s) {
        if (s >= p.s.back()) {
            if (!p.closed) return p.theta.back();
            const double seg = p.length - p.s.back();
            const double w = seg > 0 ? (s - p.s.back()) / seg : 0.0;
            return (1 - w) * p.theta.back() + w * p.theta.front();
        }
        auto it = std::upper_bound(p.s.begin(), p.s.end(), s);
        const int j = std::max<int>(1, static_cast<int>(it - p.s.begin()));
        const double w = (s - p.s[j - 1]) / (p.s[j] - p.s[j - 1]);
        return (1 - w) * p.theta[j - 1] + w * p.theta[j];
    };
    for (int i = 0; i < n; ++i) {
        const double s = p.length * i / segs;
        out.s.push_back(s);
        out.theta.push_back(theta_at(std::min(s, p.length)));
    }
    return out;
}

}  // namespace

double rayleigh_oracle(const WeightedPath& input, double alpha, int n) {
    if (alpha != 2.0) throw std::invalid_argument("rayleigh oracle requires alpha = 2");
    if (n < 32) throw std::invalid_argument("rayleigh oracle needs n >= 32 vertices");
    check_theta(input.theta);
    const WeightedPath p = input.size() == n ? input : resample(input, n);

    const int dof = p.closed ? n : n - 2;  // Dirichlet ends for open arcs
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dof, dof);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dof, dof);
    auto dof_of = [&](int vertex) { return p.closed ? vertex % n : vertex - 1; };
    auto in_range = [&](int d) { return d >= 0 && d < dof; };

    for (const Seg& e : segments(p)) {
        const double h = e.len;
        if (!(h > 0)) continue;
        const double ta = p.theta[e.a], tb = p.theta[e.b];
        const double stiff = 0.5 * (1.0 / ta + 1.0 / tb) / h;
        // consistent mass with linear theta on the element
        const double maa = h * (3 * ta + tb) / 12.0;
        const double mbb = h * (ta + 3 * tb) / 12.0;
        const double mab = h * (ta + tb) / 12.0;
        const int da = dof_of(e.a), db = dof_of(e.b);
        if (in_range(da)) {
            A(da, da) += stiff;
            B(da, da) += maa;
        }
        if (in_range(db)) {
            A(db, db) += stiff;
            B(db, db) += mbb;
        }
        if (in_range(da) && in_range(db)) {
            A(da, db) -= stiff;
            A(db, da) -= stiff;
            B(da, db) += mab;
            B(db, da) += mab;
        }
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, B);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigen-solver failed to converge");
    // cyclic: skip the constant mode (eigenvalue 0); the weighted-mean
    // constraint is exactly the B-orthogonality to constants
    const double ev = p.closed ? solver.eigenvalues()(1) : solver.eigenvalues()(0);
    return std::sqrt(std::max(0.0, ev));
}

double rayleigh_oracle(const Polyline& component, double alpha, int n) {
    return rayleigh_oracle(WeightedPath::from_polyline(component), alpha, n);
}

// ---------------------------------------------------------------------------

double admissible_shift(const WeightedPath& p, const std::vector<double>& phi, double alpha) {
    if (!p.closed) throw std::invalid_argument("admissible shift is defined on cyclic components");
    if (static_cast<int>(phi.size()) != p.size())
        throw std::invalid_argument("phi sample count mismatch");
    check_theta(p.theta);

    const auto segs = segments(p);
    auto integral = [&](auto&& g) {
        double acc = 0.0;
        for (const Seg& e : segs) acc += 0.5 * (g(e.a) + g(e.b)) * e.len;
        return acc;
    };
    if (alpha == 2.0) {
        const double num = integral([&](int i) { return phi[i] * p.theta[i]; });
        return num / theta_integral(p);
    }

    auto residual = [&](double xi) {
        return integral([&](int i) {
            // |d|^(alpha-2) d = sign(d) |d|^(alpha-1), finite for alpha > 1
            const double d = xi - phi[i];
            const double mag = std::pow(std::abs(d), alpha - 1.0);
            return (d >= 0 ? mag : -mag) * p.theta[i];
        });
    };
    double lo = *std::min_element(phi.begin(), phi.end());
    double hi = *std::max_element(phi.begin(), phi.end());
    if (lo == hi) return lo;
    const double max_phi = std::max(std::abs(lo), std::abs(hi));
    const double tol = 1e-10 * theta_integral(p) * std::pow(max_phi, alpha - 1.0);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double r = residual(mid);
        if (std::abs(r) <= tol || hi - lo < 1e-15 * (1 + std::abs(mid))) return mid;
        (r > 0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

double yau_lower_bound(const WeightedPath& p, const std::vector<double>& f, double alpha) {
    if (static_cast<int>(f.size()) != p.size())
        throw std::invalid_argument("test function sample count mismatch");
    for (double v : f)
        if (!(v > 0.0)) throw std::invalid_argument("test function must be positive");
    check_theta(p.theta);

    const int n = p.size();
    const auto segs = segments(p);
    // flux |f'|^{alpha-2} f' / theta at segment midpoints
    std::vector<double> flux(segs.size());
    for (size_t e = 0; e < segs.size(); ++e) {
        const double df = f[segs[e].b] - f[segs[e].a];
        const double fp = segs[e].len > 0 ? df / segs[e].len : 0.0;
        const double tm = 0.5 * (p.theta[segs[e].a] + p.theta[segs[e].b]);
        const double mag = std::pow(std::abs(fp), alpha - 1.0);
        flux[e] = (fp >= 0 ? mag : -mag) / tm;
    }

    double inf = std::numeric_limits<double>::infinity();
    const int m = static_cast<int>(segs.size());
    for (int i = 0; i < n; ++i) {
        int eprev, enext;
        if (p.closed) {
            eprev = (i - 1 + m) % m;
            enext = i % m;
        } else {
            if (i == 0 || i == n - 1) continue;
            eprev = i - 1;
            enext = i;
        }
        const double ds = 0.5 * (segs[eprev].len + segs[enext].len);
        if (!(ds > 0)) continue;
        const double div = (flux[enext] - flux[eprev]) / ds;
        const double val = -div / std::pow(f[i] * p.theta[i], alpha - 1.0);
        inf = std::min(inf, val);
    }
    return inf;
}

}  // namespace tractlab
