#pragma once

#include "tractlab/levelset.hpp"

#include <optional>
#include <vector>

namespace tractlab {

/// Integration region on a chart; an empty predicate means the whole chart.
struct Region {
    std::function<bool(double, double)> contains;

    bool test(double u, double v) const { return !contains || contains(u, v); }
    static Region whole_chart() { return {}; }
    static Region h_ball(const ScalarField& h, double t);
    static Region component(const SuperlevelComponents& comps, int id);
    static Region intersect(Region a, Region b);
};

/// c(alpha) from the Main Inequality: (alpha-1)/alpha for alpha >= 2,
/// 1/alpha on (1,2).
double main_inequality_constant(double alpha);

/// Midpoint quadrature of density * dA over a region; cells cut by the
/// region boundary are subsampled.
double region_integral(const SurfaceChart& surface, const GridSpec& grid, const Region& region,
                       const std::function<double(double, double)>& density);

/// J_alpha(f, D) = int_D |grad f|^alpha by midpoint quadrature; cells cut by
/// the region boundary are subsampled.
double dirichlet_integral(const ScalarField& f, double alpha, const GridSpec& grid,
                          const Region& region = Region::whole_chart());

struct FullFlow {
    double S = 0.0;  // t-average
    std::vector<double> t;
    std::vector<double> per_t;
    double max_relative_deviation = 0.0;
};

/// Full flow of a harmonic exhaustion: int_{Sigma_h(t)} |grad h|^(alpha-1) ds,
/// averaged over t_samples. Throws when the per-t values deviate from the
/// mean by more than 1% (non-harmonic exhaustion or coarse grid).
FullFlow full_flow(const ScalarField& h, const std::vector<double>& t_samples,
                   const GridSpec& grid, double alpha = 2.0);

double capacity_closed_form(double S_h, double t1, double t2, double alpha);
/// int |grad phi|^alpha with the extremal phi = (t2 - h)/(t2 - t1) over the
/// shell {t1 < h < t2}.
double capacity_variational(const ScalarField& h, double t1, double t2, double alpha,
                            const GridSpec& grid);

/// max over level-set vertices (optionally restricted to D) of f, floored at tau.
double max_modulus(const ScalarField& f, const LevelSet& sigma, double floor_tau = 0.0,
                   const Region* D = nullptr);

struct CycleFlow {
    double S_h = 0.0;
    double S_f = 0.0;  // signed, outward normal grad h/|grad h|
    double q = 0.0;    // admissible mean shift of f on the cycle
};

struct SingularProfile {
    std::vector<double> t;
    std::vector<std::vector<CycleFlow>> cycles;
    std::vector<double> omega;     // sum S_f^2/S_h per t
    std::vector<double> Q;         // cumulative trapezoid of omega, zero-limit anchor
    std::vector<double> Q_direct;  // sum q_j S(f, Gamma_j) per t
    std::vector<double> S_h_total;
    std::vector<double> S_f_total;
};

/// Per-t singular terms on tubular levels (cycles only); throws when an open
/// arc shows up at a sampled t.
SingularProfile singular_terms(const ScalarField& f, const ScalarField& h,
                               const std::vector<double>& t_grid, const GridSpec& grid);

struct EnergyProfile {
    double alpha = 2.0;
    double c_alpha = 0.5;
    std::vector<double> t;
    std::vector<double> J;
    std::vector<double> M;
    std::vector<double> Q;
    std::vector<double> omega;
    double S_h = 0.0;
};

EnergyProfile compute_energy_profile(const ScalarField& f, const ScalarField& h,
                                     const std::vector<double>& t_grid, double alpha,
                                     const GridSpec& grid, bool with_singular_terms);

/// t-grid between lo and hi that stays 5 grid-widths clear of the critical
/// values sampled on the extractor's grid.
std::vector<double> make_regular_t_grid(const LevelSetExtractor& ex, double lo, double hi,
                                        int count, bool log_spaced = false);

}  // namespace tractlab
