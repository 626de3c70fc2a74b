#include "tractlab/geometry.hpp"

#include <cmath>
#include <fstream>

namespace tractlab {

bool DomainBox::contains(double u, double v, double slack) const {
    bool in_u = periodic_u || (u >= u0 - slack && u <= u1 + slack);
    bool in_v = periodic_v || (v >= v0 - slack && v <= v1 + slack);
    return in_u && in_v;
}

void DomainBox::wrap(double& u, double& v) const {
    if (periodic_u) {
        const double span = extent_u();
        u = u0 + std::fmod(std::fmod(u - u0, span) + span, span);
    }
    if (periodic_v) {
        const double span = extent_v();
        v = v0 + std::fmod(std::fmod(v - v0, span) + span, span);
    }
}

SurfaceChart::SurfaceChart(std::string name, DomainBox box,
                           std::function<Jet2(double, double)> jet,
                           std::optional<int> euler_char)
    : name_(std::move(name)), box_(box), jet_(std::move(jet)), euler_char_(euler_char) {}

Mat2 SurfaceChart::metric(double u, double v) const {
    const Jet2 j = jet_(u, v);
    Mat2 g;
    g << j.xu.dot(j.xu), j.xu.dot(j.xv), j.xu.dot(j.xv), j.xv.dot(j.xv);
    return g;
}

Vec3 SurfaceChart::normal(double u, double v) const {
    const Jet2 j = jet_(u, v);
    const Vec3 n = j.xu.cross(j.xv);
    const double len = n.norm();
    if (!(len > 0.0)) throw std::runtime_error("degenerate metric: x_u, x_v linearly dependent");
    return n / len;
}

double SurfaceChart::area_element(double u, double v) const {
    const Jet2 j = jet_(u, v);
    return j.xu.cross(j.xv).norm();
}

// ---------------------------------------------------------------------------
// Scalar fields

ScalarField::ScalarField(SurfacePtr s, FieldKind k, Vec3 e,
                         std::function<double(double, double)> f, std::string label)
    : surface_(std::move(s)), kind_(k), dir_(std::move(e)), custom_(std::move(f)),
      label_(std::move(label)) {
    if (!surface_) throw std::invalid_argument("ScalarField: null surface");
}

ScalarField ScalarField::coordinate(SurfacePtr s, const Vec3& e) {
    return ScalarField(std::move(s), FieldKind::Coordinate, e.normalized(), nullptr, "coord");
}

ScalarField ScalarField::abs_coordinate(SurfacePtr s, const Vec3& e) {
    return ScalarField(std::move(s), FieldKind::AbsCoordinate, e.normalized(), nullptr, "abs_coord");
}

ScalarField ScalarField::norm(SurfacePtr s) {
    return ScalarField(std::move(s), FieldKind::Norm, Vec3::Zero(), nullptr, "norm");
}

ScalarField ScalarField::custom(SurfacePtr s, std::function<double(double, double)> f,
                                std::string label) {
    return ScalarField(std::move(s), FieldKind::Custom, Vec3::Zero(), std::move(f),
                       std::move(label));
}

double ScalarField::value(double u, double v) const {
    switch (kind_) {
        case FieldKind::Coordinate: return surface_->position(u, v).dot(dir_);
        case FieldKind::AbsCoordinate: return std::abs(surface_->position(u, v).dot(dir_));
        case FieldKind::Norm: return surface_->position(u, v).norm();
        case FieldKind::Custom: return custom_(u, v);
    }
    return 0.0;
}

Vec2 ScalarField::param_grad(double u, double v) const {
    switch (kind_) {
        case FieldKind::Coordinate: {
            const Jet2 j = surface_->jet(u, v);
            return {j.xu.dot(dir_), j.xv.dot(dir_)};
        }
        case FieldKind::AbsCoordinate: {
            const Jet2 j = surface_->jet(u, v);
            const double s = j.x.dot(dir_) >= 0.0 ? 1.0 : -1.0;
            return {s * j.xu.dot(dir_), s * j.xv.dot(dir_)};
        }
        case FieldKind::Norm: {
            const Jet2 j = surface_->jet(u, v);
            const double r = j.x.norm();
            if (r == 0.0) return Vec2::Zero();
            return {j.x.dot(j.xu) / r, j.x.dot(j.xv) / r};
        }
        case FieldKind::Custom: {
            const double h = 1e-5 * surface_->domain().max_extent();
            return {(custom_(u + h, v) - custom_(u - h, v)) / (2 * h),
                    (custom_(u, v + h) - custom_(u, v - h)) / (2 * h)};
        }
    }
    return Vec2::Zero();
}

std::pair<Vec3, double> ScalarField::surface_gradient(double u, double v) const {
    const Jet2 j = surface_->jet(u, v);
    Mat2 g;
    g << j.xu.dot(j.xu), j.xu.dot(j.xv), j.xu.dot(j.xv), j.xv.dot(j.xv);
    const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    if (!(det > 0.0)) throw std::runtime_error("degenerate metric: x_u, x_v linearly dependent");
    const Vec2 df = param_grad(u, v);
    // contravariant components g^{ij} df_j
    const Vec2 up = {(g(1, 1) * df(0) - g(0, 1) * df(1)) / det,
                     (g(0, 0) * df(1) - g(0, 1) * df(0)) / det};
    const Vec3 grad = up(0) * j.xu + up(1) * j.xv;
    const double norm2 = df.dot(up);
    return {grad, std::sqrt(std::max(0.0, norm2))};
}

double ScalarField::gradient_norm(double u, double v) const {
    return surface_gradient(u, v).second;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

Jet2 plane_jet(double u, double v) {
    Jet2 j;
    j.x = {u, v, 0};
    j.xu = {1, 0, 0};
    j.xv = {0, 1, 0};
    j.xuu = j.xuv = j.xvv = Vec3::Zero();
    return j;
}

Jet2 catenoid_jet(double u, double v) {
    const double cu = std::cos(u), su = std::sin(u);
    const double cv = std::cosh(v), sv = std::sinh(v);
    Jet2 j;
    j.x = {cv * cu, cv * su, v};
    j.xu = {-cv * su, cv * cu, 0};
    j.xv = {sv * cu, sv * su, 1};
    j.xuu = {-cv * cu, -cv * su, 0};
    j.xuv = {-sv * su, sv * cu, 0};
    j.xvv = {cv * cu, cv * su, 0};
    return j;
}

Jet2 helicoid_jet(double u, double v) {
    const double cu = std::cos(u), su = std::sin(u);
    const double cv = std::cosh(v), sv = std::sinh(v);
    Jet2 j;
    j.x = {sv * cu, sv * su, u};
    j.xu = {-sv * su, sv * cu, 1};
    j.xv = {cv * cu, cv * su, 0};
    j.xuu = {-sv * cu, -sv * su, 0};
    j.xuv = {-cv * su, cv * cu, 0};
    j.xvv = {sv * cu, sv * su, 0};
    return j;
}

Jet2 enneper_jet(double u, double v) {
    Jet2 j;
    j.x = {u - u * u * u / 3.0 + u * v * v, -(v - v * v * v / 3.0 + v * u * u), u * u - v * v};
    j.xu = {1 - u * u + v * v, -2 * u * v, 2 * u};
    j.xv = {2 * u * v, -(1 - v * v + u * u), -2 * v};
    j.xuu = {-2 * u, -2 * v, 2};
    j.xuv = {2 * v, -2 * u, 0};
    j.xvv = {2 * u, 2 * v, -2};
    return j;
}

}  // namespace

SurfacePtr catalog_surface(const std::string& name, const DomainBox& box) {
    std::optional<int> chi;
    std::function<Jet2(double, double)> jet;
    if (name == "plane") {
        jet = plane_jet;
        chi = 1;
    } else if (name == "catenoid") {
        jet = catenoid_jet;
        chi = 0;
    } else if (name == "helicoid") {
        jet = helicoid_jet;
        chi = 0;
    } else if (name == "enneper") {
        jet = enneper_jet;
        chi = 1;
    } else {
        throw std::invalid_argument("unknown catalog surface: " + name);
    }
    return std::make_shared<SurfaceChart>(name, box, std::move(jet), chi);
}

SurfacePtr catalog_surface(const std::string& name) {
    DomainBox box;
    if (name == "plane") {
        box = {-4.0, 4.0, -4.0, 4.0};
    } else if (name == "catenoid") {
        box = {0.0, 2 * M_PI, -3.0, 3.0, /*periodic_u=*/true};
    } else if (name == "helicoid") {
        box = {-3.0, 3.0, -3.0, 3.0};
    } else if (name == "enneper") {
        box = {-2.0, 2.0, -2.0, 2.0};
    } else {
        throw std::invalid_argument("unknown catalog surface: " + name);
    }
    return catalog_surface(name, box);
}

SurfacePtr graph_surface(std::function<double(double, double)> phi, const DomainBox& box,
                         std::string name) {
    const double h = 1e-5 * std::max(box.extent_u(), box.extent_v());
    auto jet = [phi, h](double u, double v) {
        Jet2 j;
        const double f = phi(u, v);
        const double fp = phi(u + h, v), fm = phi(u - h, v);
        const double fq = phi(u, v + h), fr = phi(u, v - h);
        const double fu = (fp - fm) / (2 * h);
        const double fv = (fq - fr) / (2 * h);
        const double fuu = (fp - 2 * f + fm) / (h * h);
        const double fvv = (fq - 2 * f + fr) / (h * h);
        const double fuv = (phi(u + h, v + h) - phi(u + h, v - h) - phi(u - h, v + h) +
                            phi(u - h, v - h)) /
                           (4 * h * h);
        j.x = {u, v, f};
        j.xu = {1, 0, fu};
        j.xv = {0, 1, fv};
        j.xuu = {0, 0, fuu};
        j.xuv = {0, 0, fuv};
        j.xvv = {0, 0, fvv};
        return j;
    };
    return std::make_shared<SurfaceChart>(std::move(name), box, std::move(jet), 1);
}

DomainBox box_for_radius(const std::string& name, double radius) {
    if (radius <= 0) throw std::invalid_argument("box_for_radius: radius must be positive");
    if (name == "plane") return {-radius, radius, -radius, radius};
    if (name == "catenoid") {
        const double vmax = std::acosh(std::max(1.0, radius));
        return {0.0, 2 * M_PI, -vmax, vmax, true};
    }
    if (name == "helicoid") {
        const double vmax = std::asinh(radius);
        return {-radius, radius, -vmax, vmax};
    }
    if (name == "enneper") {
        // |x| grows like r^3/3 along the end; pick r with r^3/3 - r >= radius.
        double r = std::cbrt(3.0 * radius);
        while (r * r * r / 3.0 - r < radius) r *= 1.05;
        return {-r, r, -r, r};
    }
    throw std::invalid_argument("unknown catalog surface: " + name);
}

// ---------------------------------------------------------------------------
// Curvature

CurvatureData curvature_at(const SurfaceChart& surface, double u, double v) {
    const Jet2 j = surface.jet(u, v);
    CurvatureData c;
    c.metric << j.xu.dot(j.xu), j.xu.dot(j.xv), j.xu.dot(j.xv), j.xv.dot(j.xv);
    const double det = c.metric.determinant();
    if (!(det > 0.0)) throw std::runtime_error("degenerate metric: x_u, x_v linearly dependent");

    const Vec3 n = j.xu.cross(j.xv);
    c.normal = n / n.norm();
    c.second_form << j.xuu.dot(c.normal), j.xuv.dot(c.normal), j.xuv.dot(c.normal),
        j.xvv.dot(c.normal);

    const double E = c.metric(0, 0), F = c.metric(0, 1), G = c.metric(1, 1);
    const double e = c.second_form(0, 0), f = c.second_form(0, 1), g = c.second_form(1, 1);
    c.mean_curvature = (e * G - 2 * f * F + g * E) / det;
    c.gauss_curvature = (e * g - f * f) / det;

    const double disc = std::max(0.0, c.mean_curvature * c.mean_curvature - 4 * c.gauss_curvature);
    const double root = std::sqrt(disc);
    c.principal_curvatures[0] = 0.5 * (c.mean_curvature + root);
    c.principal_curvatures[1] = 0.5 * (c.mean_curvature - root);

    // Shape operator in coordinates: S = I^{-1} II; eigenvector for each k_i.
    Mat2 shape = c.metric.inverse() * c.second_form;
    for (int i = 0; i < 2; ++i) {
        const double k = c.principal_curvatures[i];
        Mat2 A = shape - k * Mat2::Identity();
        Vec2 dir;
        // kernel of A: pick the larger row and rotate it
        if (A.row(0).norm() > A.row(1).norm() && A.row(0).norm() > 1e-12 * shape.norm() + 1e-300)
            dir = {-A(0, 1), A(0, 0)};
        else if (A.row(1).norm() > 1e-12 * shape.norm() + 1e-300)
            dir = {-A(1, 1), A(1, 0)};
        else
            dir = (i == 0) ? Vec2{1, 0} : Vec2{0, 1};  // umbilic: any direction
        Vec3 t = dir(0) * j.xu + dir(1) * j.xv;
        const double len = t.norm();
        c.principal_directions[i] = len > 0 ? Vec3(t / len) : Vec3(j.xu.normalized());
    }
    // umbilic fallback can leave parallel directions; orthogonalize
    if (std::abs(c.principal_directions[0].dot(c.principal_directions[1])) > 1e-6) {
        Vec3 t = c.normal.cross(c.principal_directions[0]);
        c.principal_directions[1] = t.normalized();
    }
    return c;
}

double gauss_map_distortion(const SurfaceChart& surface, const GridSpec& grid) {
    const DomainBox& box = surface.domain();
    double worst = 0.0;
    bool any = false;
    const double flat_tol = 1e-12;
    for (int i = 0; i < grid.nu; ++i) {
        for (int k = 0; k < grid.nv; ++k) {
            const double u = box.u0 + (i + 0.5) * box.extent_u() / grid.nu;
            const double v = box.v0 + (k + 0.5) * box.extent_v() / grid.nv;
            const CurvatureData c = curvature_at(surface, u, v);
            const double a = std::abs(c.principal_curvatures[0]);
            const double b = std::abs(c.principal_curvatures[1]);
            const double hi = std::max(a, b), lo = std::min(a, b);
            if (hi < flat_tol) continue;  // umbilic-flat sample skipped
            any = true;
            if (lo < flat_tol * hi) {
                worst = std::numeric_limits<double>::infinity();
            } else {
                worst = std::max(worst, hi / lo);
            }
        }
    }
    if (!any) throw std::runtime_error("distortion undefined: all samples degenerate");
    return worst;
}

double alpha_minimality_residual(const SurfaceChart& surface, const Vec3& e, double alpha,
                                 const GridSpec& grid) {
    if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
    const DomainBox& box = surface.domain();
    const Vec3 dir = e.normalized();
    double worst = -1.0;
    for (int i = 0; i < grid.nu; ++i) {
        for (int k = 0; k < grid.nv; ++k) {
            const double u = box.u0 + (i + 0.5) * box.extent_u() / grid.nu;
            const double v = box.v0 + (k + 0.5) * box.extent_v() / grid.nv;
            const Jet2 j = surface.jet(u, v);
            const CurvatureData c = curvature_at(surface, u, v);
            const Vec3 etop = dir - dir.dot(c.normal) * c.normal;
            if (etop.norm() < 1e-9) continue;
            // tangent coordinates of e^T: (a,b) = I^{-1} (e.x_u, e.x_v)
            const Vec2 cov{dir.dot(j.xu), dir.dot(j.xv)};
            const Vec2 ab = c.metric.inverse() * cov;
            const double len2 = cov.dot(ab);
            if (!(len2 > 0)) continue;
            const Vec2 t = ab / std::sqrt(len2);
            const double k_tau = t.dot(c.second_form * t);
            worst = std::max(worst, std::abs(c.mean_curvature + (alpha - 2.0) * k_tau));
        }
    }
    if (worst < 0.0)
        throw std::runtime_error("direction is normal to the surface on the entire grid");
    return worst;
}

void export_obj(const SurfaceChart& surface, const GridSpec& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    const DomainBox& box = surface.domain();
    const int nu = grid.nu, nv = grid.nv;
    for (int k = 0; k <= nv; ++k) {
        for (int i = 0; i <= nu; ++i) {
            const double u = box.u0 + i * box.extent_u() / nu;
            const double v = box.v0 + k * box.extent_v() / nv;
            const Vec3 p = surface.position(u, v);
            out << "v " << p.x() << " " << p.y() << " " << p.z() << "\n";
        }
    }
    auto id = [nu](int i, int k) { return k * (nu + 1) + i + 1; };
    for (int k = 0; k < nv; ++k) {
        for (int i = 0; i < nu; ++i) {
            out << "f " << id(i, k) << " " << id(i + 1, k) << " " << id(i + 1, k + 1) << "\n";
            out << "f " << id(i, k) << " " << id(i + 1, k + 1) << " " << id(i, k + 1) << "\n";
        }
    }
}

}  // namespace tractlab
