#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tractlab {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Position and first/second parameter derivatives of an immersion at (u,v).
struct Jet2 {
    Vec3 x, xu, xv, xuu, xuv, xvv;
};

struct DomainBox {
    double u0 = 0.0, u1 = 1.0;
    double v0 = 0.0, v1 = 1.0;
    bool periodic_u = false;
    bool periodic_v = false;

    double extent_u() const { return u1 - u0; }
    double extent_v() const { return v1 - v0; }
    double max_extent() const { return std::max(extent_u(), extent_v()); }
    bool contains(double u, double v, double slack = 0.0) const;
    /// Maps u (and v) back into the fundamental domain on periodic axes.
    void wrap(double& u, double& v) const;
};

/// Parametric immersion of a 2-D box into R^3. Immutable after construction.
class SurfaceChart {
public:
    SurfaceChart(std::string name, DomainBox box,
                 std::function<Jet2(double, double)> jet,
                 std::optional<int> euler_char);

    const std::string& name() const { return name_; }
    const DomainBox& domain() const { return box_; }
    std::optional<int> euler_char() const { return euler_char_; }

    Jet2 jet(double u, double v) const { return jet_(u, v); }
    Vec3 position(double u, double v) const { return jet_(u, v).x; }

    /// First fundamental form (E, F; F, G) at (u,v).
    Mat2 metric(double u, double v) const;
    /// Unit normal x_u x x_v / |x_u x x_v|.
    Vec3 normal(double u, double v) const;
    double area_element(double u, double v) const;

private:
    std::string name_;
    DomainBox box_;
    std::function<Jet2(double, double)> jet_;
    std::optional<int> euler_char_;
};

using SurfacePtr = std::shared_ptr<const SurfaceChart>;

struct CurvatureData {
    Mat2 metric;                 // (E F; F G)
    Mat2 second_form;            // (e f; f g) w.r.t. the unit normal
    Vec3 normal;
    double mean_curvature;       // trace convention: lambda1 + lambda2
    double gauss_curvature;
    double principal_curvatures[2];
    Vec3 principal_directions[2];
};

enum class FieldKind { Coordinate, AbsCoordinate, Norm, Custom };

/// Scalar function on a chart with parameter-space gradient machinery.
class ScalarField {
public:
    static ScalarField coordinate(SurfacePtr s, const Vec3& e);
    static ScalarField abs_coordinate(SurfacePtr s, const Vec3& e);
    static ScalarField norm(SurfacePtr s);
    static ScalarField custom(SurfacePtr s, std::function<double(double, double)> f,
                              std::string label = "custom");

    const SurfaceChart& surface() const { return *surface_; }
    SurfacePtr surface_ptr() const { return surface_; }
    FieldKind kind() const { return kind_; }
    const Vec3& direction() const { return dir_; }
    const std::string& label() const { return label_; }

    double value(double u, double v) const;
    /// (df/du, df/dv) in parameter space.
    Vec2 param_grad(double u, double v) const;
    /// Tangential gradient in ambient coordinates and its norm.
    std::pair<Vec3, double> surface_gradient(double u, double v) const;
    double gradient_norm(double u, double v) const;

private:
    ScalarField(SurfacePtr s, FieldKind k, Vec3 e,
                std::function<double(double, double)> f, std::string label);

    SurfacePtr surface_;
    FieldKind kind_;
    Vec3 dir_;
    std::function<double(double, double)> custom_;
    std::string label_;
};

/// Uniform sampling grid over a chart domain: nu x nv cells.
struct GridSpec {
    int nu = 256;
    int nv = 256;

    GridSpec() = default;
    GridSpec(int u, int n) : nu(u), nv(n) {}
    GridSpec refined(int factor = 2) const { return {nu * factor, nv * factor}; }
};

SurfacePtr catalog_surface(const std::string& name);
SurfacePtr catalog_surface(const std::string& name, const DomainBox& box);
SurfacePtr graph_surface(std::function<double(double, double)> phi, const DomainBox& box,
                         std::string name = "graph");
/// Domain box on which the catalog surface reaches |x| >= radius at the
/// truncation boundary (used by asymptotic quantities).
DomainBox box_for_radius(const std::string& name, double radius);

CurvatureData curvature_at(const SurfaceChart& surface, double u, double v);

/// Max over regular grid samples of max|k_i| / min|k_i|; throws if every
/// sample is umbilic-flat.
double gauss_map_distortion(const SurfaceChart& surface, const GridSpec& grid);

/// Max of |H + (alpha-2) k_nu(tau)| over grid samples with e^T != 0.
double alpha_minimality_residual(const SurfaceChart& surface, const Vec3& e, double alpha,
                                 const GridSpec& grid);

/// Writes a triangulated sample grid as Wavefront OBJ.
void export_obj(const SurfaceChart& surface, const GridSpec& grid, const std::string& path);

}  // namespace tractlab
