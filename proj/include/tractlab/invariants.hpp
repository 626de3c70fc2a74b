#pragma once

#include "tractlab/energy.hpp"

#include <vector>

namespace tractlab {

struct ProjectiveVolumeEstimate {
    std::vector<double> t_grid;
    std::vector<double> V_of_t;     // int_{1<|x|<t} |x|^-2
    std::vector<double> area_of_t;  // Area{1<|x|<t}
    double slope_fit_V = 0.0;       // V2 via least squares of V(t) against w2 ln t
    double slope_fit_area = 0.0;    // V2 via 2 Area(t) / (w2 t^2)
    bool diverged = false;
    double V2 = 0.0;  // slope_fit_V when not diverged
};

/// Projective 2-volume by coarea accumulation over log-spaced |x|-levels.
/// Requires t_grid to span at least two decades; throws when the surface is
/// not proper on its truncation box (boundary |x| below max t).
ProjectiveVolumeEstimate projective_volume(const SurfacePtr& surface,
                                           const std::vector<double>& t_grid,
                                           const GridSpec& grid);

/// Production path for catalog surfaces: the inner shell {1<|x|<10} is done
/// by cell quadrature on a radius-10 box, each further decade by coarea
/// accumulation on its own box, so small |x|-circles stay resolved.
ProjectiveVolumeEstimate nested_projective_volume(const std::string& name, double radius,
                                                  const GridSpec& grid,
                                                  int levels_per_decade = 32,
                                                  int t_per_decade = 12);

std::vector<double> log_spaced(double lo, double hi, int count);

struct MultiplicityIntegral {
    std::vector<double> R;
    std::vector<double> value;  // (1/ln R) int_1^R dt/t int_0^2pi n(t e^{i th}) dth
};

/// Projection multiplicity integral onto the plane orthogonal to
/// plane_normal, counted by cell coverage on the parameter grid.
MultiplicityIntegral projection_multiplicity_integral(const SurfacePtr& surface,
                                                      const Vec3& plane_normal,
                                                      const std::vector<double>& R_values,
                                                      int n_t, int n_theta,
                                                      const GridSpec& grid);

struct CriticalPointRecord {
    double u = 0, v = 0;
    double value = 0;     // f at the critical point
    int sigma = 0;        // local level-set branch count
    int index = 0;        // sigma/2 - 1
    bool valid = false;   // sigma even and index >= 1
};

/// Critical points of the coordinate function <x, e>: Newton's method on the
/// Gauss map hitting +-e, seeded at local minima of |e^T|.
std::vector<CriticalPointRecord> find_critical_points(const SurfacePtr& surface, const Vec3& e,
                                                      const GridSpec& grid);

struct IndexCheck {
    std::vector<CriticalPointRecord> critical_points;
    int sum_index = 0;
    double V2 = 0.0;
    int chi = 0;
    bool satisfied = false;  // sum ind <= V2 - chi + 0.05
};

IndexCheck index_theorem_check(const SurfacePtr& surface, const Vec3& e, const GridSpec& grid,
                               const ProjectiveVolumeEstimate& volume);

struct TubularGrowth {
    double S_h = 0.0;
    double growth_at_top = 0.0;    // ln J(t) / t at the largest sampled t
    double bound = 0.0;            // 8 pi / S(h)
    double Q_over_J = 0.0;         // at the largest sampled t
    bool condition_new_holds = false;
    std::vector<double> t;
    std::vector<double> J;
    std::vector<double> Q;
    std::vector<double> lambda_h;  // closed-form frequency of Sigma_h(t)
    double frequency_flow_gap = 0.0;    // max |lambda_h - 4 pi / S(h)|, zero for equal flows
    double lambda_vs_4pi_over_S = 0.0;  // min over t of lambda_h * S_h / (4 pi)
};

/// Growth-rate instrumentation on a tubular exhaustion h = |<x,e>|.
TubularGrowth tubular_growth_check(const ScalarField& f, const ScalarField& h,
                                   const std::vector<double>& t_grid, const GridSpec& grid);

}  // namespace tractlab
