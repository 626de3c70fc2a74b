#pragma once

#include "tractlab/geometry.hpp"

#include <cstdint>
#include <vector>

namespace tractlab {

/// One connected component of a level curve in parameter space, with cached
/// ambient positions and per-vertex weight samples (default |grad field|).
struct Polyline {
    std::vector<Vec2> uv;
    std::vector<Vec3> xyz;
    std::vector<double> theta;
    bool closed = false;

    int size() const { return static_cast<int>(uv.size()); }
    /// Arc length in the induced metric (chordal sum; wraps when closed).
    double length() const;
};

struct LevelSet {
    double level = 0.0;
    GridSpec grid;
    std::vector<Polyline> components;

    bool empty() const { return components.empty(); }
    int cycle_count() const;
    int open_count() const;
};

/// Caches node samples of a field so many levels can be extracted cheaply.
class LevelSetExtractor {
public:
    LevelSetExtractor(ScalarField field, GridSpec grid);

    const ScalarField& field() const { return field_; }
    const GridSpec& grid() const { return grid_; }
    double field_min() const { return fmin_; }
    double field_max() const { return fmax_; }
    double max_gradient() const { return max_grad_; }

    /// Marching squares + Newton refinement onto the level. Throws
    /// "near-critical level" when a grid node is simultaneously on-level and
    /// critical. An empty level set is a valid result.
    LevelSet extract(double t) const;

    /// Throws when some grid node is on-level and critical at t.
    void ensure_regular_level(double t) const;

    double node_value(int i, int k) const { return fvals_[idx(i, k)]; }

private:
    int idx(int i, int k) const { return k * (grid_.nu + 1) + i; }
    Vec2 node_uv(int i, int k) const;
    Vec2 refine(Vec2 p, double t) const;

    ScalarField field_;
    GridSpec grid_;
    std::vector<double> fvals_;
    std::vector<double> gnorm_;
    double fmin_ = 0, fmax_ = 0, max_grad_ = 0;
};

LevelSet extract_level_set(const ScalarField& field, double t, const GridSpec& grid);

struct ComponentLength {
    std::vector<double> per_component;
    double total = 0.0;
};

/// Line integrals of the stored weight along each component (trapezoid).
ComponentLength weighted_length(const LevelSet& ls);
/// Same with a custom weight evaluated at the refined vertices.
ComponentLength weighted_length(const LevelSet& ls,
                                const std::function<double(double, double)>& theta);

/// Labeled cells of the sampled superlevel set {f > tau}; cells are sampled
/// at their centers, adjacency is 4-connected and wraps on periodic axes.
struct SuperlevelComponents {
    double threshold = 0.0;
    GridSpec grid;
    DomainBox box;
    std::vector<int32_t> label;  // nu*nv cells, -1 = below threshold
    int count = 0;
    std::vector<bool> touches_truncation;
    std::vector<std::pair<int, int>> representative;
    std::vector<int> cell_count;
    bool resolved = true;  // component count stable under grid refinement x2

    int cell_label(int i, int k) const { return label[k * grid.nu + i]; }
    bool component_is_compact(int id) const { return !touches_truncation[id]; }
    /// Label of the cell containing (u,v), or -1 outside the sampled set.
    int label_at(double u, double v) const;
    /// True when every labeled cell of `child` (a finer threshold on the same
    /// grid) lies in this labeling's component `parent_id`.
    bool component_contains(int parent_id, const SuperlevelComponents& child,
                            int child_id) const;
};

SuperlevelComponents superlevel_components(const ScalarField& field, double tau,
                                           const GridSpec& grid, bool check_refinement = true);

}  // namespace tractlab
