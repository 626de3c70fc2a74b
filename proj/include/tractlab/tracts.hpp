#pragma once

#include "tractlab/energy.hpp"
#include "tractlab/spectra.hpp"

#include <vector>

namespace tractlab {

enum class Regularity { Regular, Singular, Undetermined };

const char* to_string(Regularity r);

/// Nested superlevel components of a field across a threshold grid. A tract
/// is the chain hanging under a leaf at the largest threshold.
struct TractForest {
    struct Node {
        int level = 0;   // index into tau_grid
        int comp = 0;    // component id within that level
        int parent = -1; // node index at the previous level, -1 at the root level
        bool touches_truncation = false;
    };

    std::vector<double> tau_grid;
    std::vector<SuperlevelComponents> levels;
    std::vector<Node> nodes;
    std::vector<int> leaves_at_top;               // node ids alive at the last tau
    std::vector<Regularity> leaf_regularity;      // filled by classify_tract

    int tract_count() const { return static_cast<int>(leaves_at_top.size()); }
    /// Chain of node ids from the root level to the given leaf.
    std::vector<int> chain(int leaf_node) const;
    /// Component of the leaf's tract at the root threshold tau_grid[0].
    std::pair<const SuperlevelComponents*, int> root_component(int leaf_node) const;
};

TractForest build_tract_forest(const ScalarField& f, const std::vector<double>& tau_grid,
                               const GridSpec& grid);

struct RegularityReport {
    Regularity verdict = Regularity::Undetermined;
    std::vector<double> t_samples;
    std::vector<int> cycles_in_section;
};

/// Samples D(tau0) cut by h-spheres on cofinal t-windows; regular when the
/// tail of samples is cycle-free, singular when every tail sample has a cycle.
RegularityReport classify_tract(const SuperlevelComponents& level, int comp_id,
                                const ScalarField& h, const std::vector<double>& t_samples,
                                const GridSpec& grid);

/// Open arcs and fully-contained cycles of Sigma_h(t) restricted to one
/// superlevel component, as weighted paths with theta = |grad h|.
struct SectionComponents {
    std::vector<WeightedPath> paths;
    int cycles = 0;
};
SectionComponents restrict_level_set(const LevelSet& sigma, const SuperlevelComponents& level,
                                     int comp_id);

struct HumpCount {
    int count = 0;
    double slab_half_width = 0.0;
    bool enlargement_checked = false;
    bool enlargement_stable = false;
};

/// Number of components of {|<x,e>| > a} with noncompact-closure proxy.
/// Throws when e is not a regular direction (compact section component).
HumpCount hump_count(const SurfacePtr& surface, const Vec3& e, double a, const GridSpec& grid);

struct MainInequalityCheck {
    double lhs = 0.0;        // J(t1) on the tract
    double rhs = 0.0;        // J(t2) * exp(-c(alpha) * int lambda*)
    double J_t2 = 0.0;
    double lambda_integral = 0.0;
    bool satisfied = false;
    double tolerance = 0.05;
};

MainInequalityCheck main_inequality_check(const SuperlevelComponents& level, int comp_id,
                                          const ScalarField& f, const ScalarField& h,
                                          double alpha, double t1, double t2,
                                          const GridSpec& grid, int lambda_samples = 17);

struct NminCheck {
    double lhs = 0.0;  // N * min_i J(D_i cap B_h(t1))
    double rhs = 0.0;  // exp(-c(alpha) int lambda(Sigma;N)) * J(B_h(t2))
    bool satisfied = false;
};

/// Corollary-style N-tract bound with the N-mean lower bound in the exponent.
NminCheck n_tract_inequality_check(const TractForest& forest, const ScalarField& f,
                                   const ScalarField& h, double alpha, double t1, double t2,
                                   const GridSpec& grid, int lambda_samples = 17);

struct DenjoyReport {
    std::vector<double> t, xi, product;
    bool decays = false;
    int implied_max_tracts = -1;  // -1: no bound certified
};

/// Evaluates M(xi) cap^{1/alpha}(t,xi) exp(-(c/alpha) int lambda(Sigma;N))
/// along a schedule of (t, xi) pairs and reports the observed trend.
DenjoyReport denjoy_ahlfors_bound(const ScalarField& f, const ScalarField& h, double alpha,
                                  int N, const std::vector<std::pair<double, double>>& schedule,
                                  const GridSpec& grid);

}  // namespace tractlab
