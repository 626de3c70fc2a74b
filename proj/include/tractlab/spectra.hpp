#pragma once

#include "tractlab/levelset.hpp"

#include <string>
#include <vector>

namespace tractlab {

/// 1-D component reduced to what the frequency machinery needs: arclength
/// breakpoints, positive weight samples, closure flag. For closed paths the
/// wrap segment runs from s.back() to length.
struct WeightedPath {
    std::vector<double> s;
    std::vector<double> theta;
    bool closed = false;
    double length = 0.0;

    int size() const { return static_cast<int>(s.size()); }
    static WeightedPath uniform(double length, int n, double theta_value, bool closed);
    static WeightedPath from_polyline(const Polyline& p);
};

double theta_integral(const WeightedPath& path);

struct FrequencySpec {
    double alpha = 2.0;
    bool reduced = false;
};

struct ComponentFrequency {
    int component = 0;
    bool cyclic = false;
    double theta_integral = 0.0;
    double lambda = 0.0;
};

struct FrequencyResult {
    double lambda = 0.0;
    std::vector<ComponentFrequency> per_component;
    std::string method;
};

/// Closed-form fundamental frequency of a level set for alpha = 2:
/// pi / int(theta) on open components, 2*pi / int(theta) on cycles; the set
/// value is the componentwise minimum. With spec.reduced the value drops to 0
/// as soon as a cycle is present.
FrequencyResult fundamental_frequency(const LevelSet& ls, const FrequencySpec& spec);

/// Same quantity through the discrete eigen-solver path (method
/// "rayleigh_oracle"); the independent cross-check of the closed forms.
FrequencyResult fundamental_frequency_oracle(const LevelSet& ls, int n = 256);

/// Certified lower bound for the N-mean of the fundamental frequency
/// (alpha = 2). All-open sets get pi*N / int(theta); sets with at least N
/// cycles get 0; mixed sets get the decomposition-class bound.
double n_mean_lower_bound(const LevelSet& ls, int N);
double n_mean_lower_bound(const std::vector<WeightedPath>& components, int N);

/// Discrete Rayleigh-quotient minimizer on one component: P1 finite elements
/// for int(phi'^2/theta) / int(phi^2 theta) with Dirichlet ends (open) or the
/// zero-weighted-mean constraint (cyclic). Resamples to n vertices.
double rayleigh_oracle(const WeightedPath& path, double alpha, int n);
double rayleigh_oracle(const Polyline& component, double alpha, int n);

/// Root xi of int |xi - phi|^(alpha-2) (xi - phi) theta = 0 on a cyclic
/// component; the weighted mean for alpha = 2, bisection otherwise.
double admissible_shift(const WeightedPath& path, const std::vector<double>& phi, double alpha);

/// inf over samples of -(1/(f theta)^(alpha-1)) d/ds(|f'|^(alpha-2) f'/theta);
/// a lower bound for lambda^alpha when f > 0.
double yau_lower_bound(const WeightedPath& path, const std::vector<double>& f, double alpha);

}  // namespace tractlab
