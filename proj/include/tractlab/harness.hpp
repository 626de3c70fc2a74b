#pragma once

#include "tractlab/invariants.hpp"
#include "tractlab/tracts.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// vendored single-header nlohmann/json
#include "json.hpp"

namespace tractlab {

using json = nlohmann::ordered_json;

struct RunConfig {
    std::string surface_name = "catenoid";
    std::optional<double> radius;       // truncation |x| target for box_for_radius
    std::optional<DomainBox> box;       // explicit domain override
    std::string graph_phi = "paraboloid";
    Vec3 direction{1, 0, 0};
    double alpha = 2.0;
    int nu = 256, nv = 256;
    std::vector<double> t_grid;         // empty: per-suite defaults
    std::vector<double> tau_grid;       // empty: surface defaults
    double slab_a = 2.0;
    std::vector<std::string> suites;    // empty: surface defaults
    std::string output_dir;
    bool export_obj = false;
    std::uint64_t seed = 20240817;

    static RunConfig from_json(const json& j);
    json to_json() const;
    /// Throws on invalid grids, alpha, or suites not applicable to the surface.
    void validate() const;
};

std::vector<std::string> default_suites(const std::string& surface_name);

struct BoundRecord {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string relation = "<=";
    double tolerance = 0.0;
    bool satisfied = false;
};

struct SuiteRecord {
    std::string suite;
    json inputs;
    json quantities;
    std::vector<BoundRecord> bounds;
    std::vector<std::string> errors;
    bool satisfied = true;
};

struct Report {
    int schema_version = 1;
    RunConfig config;
    std::vector<SuiteRecord> suites;
    bool all_satisfied = true;

    json to_json() const;
    std::string to_string() const { return to_json().dump(2) + "\n"; }
};

/// Runs the configured suites; deterministic for a fixed (config, seed).
Report run_suite(const RunConfig& config);

struct ReportDiff {
    std::vector<std::string> lines;  // per-quantity relative differences
    double max_relative = 0.0;
    bool mismatched = false;
};

ReportDiff compare_reports(const json& a, const json& b);

// CSV / JSON emission helpers (External Interfaces)
void write_levelset_csv(const std::string& path, const std::vector<double>& t,
                        const std::vector<LevelSet>& sets);
void write_frequency_csv(const std::string& path, const json& rows);
void write_profile_csv(const std::string& path, const EnergyProfile& profile);
void write_volume_csv(const std::string& path, const ProjectiveVolumeEstimate& est);
void write_multiplicity_csv(const std::string& path, const MultiplicityIntegral& mult);
json tract_forest_to_json(const TractForest& forest);

SurfacePtr build_surface(const RunConfig& config);

}  // namespace tractlab
