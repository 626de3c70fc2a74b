#include "tractlab/harness.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

tractlab::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return tractlab::json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tractlab: invariants and inequality checks for immersed minimal surfaces"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run theorem suites on a surface");
    std::string config_path, surface, out_dir;
    std::vector<std::string> suites;
    std::vector<double> tau_grid, direction;
    double alpha = -1, slab = -1, radius = -1;
    int nu = -1, nv = -1;
    long long seed = -1;
    bool export_obj = false;
    run->add_option("--config", config_path, "JSON config file");
    run->add_option("--surface", surface, "plane|catenoid|helicoid|enneper|graph");
    run->add_option("--suite", suites, "suite name (repeatable)");
    run->add_option("--alpha", alpha, "alpha > 1");
    run->add_option("--tau-grid", tau_grid, "superlevel thresholds")->delimiter(',');
    run->add_option("--slab", slab, "hump slab half-width a");
    run->add_option("--direction", direction, "direction e as x,y,z")->delimiter(',');
    run->add_option("--radius", radius, "truncation |x| radius");
    run->add_option("--nu", nu, "grid cells in u");
    run->add_option("--nv", nv, "grid cells in v");
    run->add_option("--out", out_dir, "output directory for report.json and CSVs");
    run->add_option("--seed", seed, "seed for randomized checks");
    run->add_flag("--export-obj", export_obj, "write a triangulated OBJ of the chart");

    // compare
    auto* cmp = app.add_subcommand("compare", "diff the quantities of two reports");
    std::string report_a, report_b;
    double max_rel = -1;
    cmp->add_option("a", report_a, "first report.json")->required();
    cmp->add_option("b", report_b, "second report.json")->required();
    cmp->add_option("--max-rel", max_rel, "fail when any relative difference exceeds this");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            tractlab::RunConfig cfg;
            if (!config_path.empty()) cfg = tractlab::RunConfig::from_json(load_json(config_path));
            if (!surface.empty()) cfg.surface_name = surface;
            if (!suites.empty()) cfg.suites = suites;
            if (alpha > 0) cfg.alpha = alpha;
            if (!tau_grid.empty()) cfg.tau_grid = tau_grid;
            if (slab > 0) cfg.slab_a = slab;
            if (radius > 0) cfg.radius = radius;
            if (direction.size() == 3) cfg.direction = {direction[0], direction[1], direction[2]};
            if (nu > 0) cfg.nu = nu;
            if (nv > 0) cfg.nv = nv;
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
            cfg.export_obj = export_obj;

            const tractlab::Report report = tractlab::run_suite(cfg);
            for (const auto& rec : report.suites) {
                std::cout << (rec.satisfied ? "[PASS] " : "[FAIL] ") << rec.suite;
                if (!rec.errors.empty()) std::cout << "  (" << rec.errors.front() << ")";
                std::cout << "\n";
            }
            if (cfg.output_dir.empty()) std::cout << report.to_string();
            return report.all_satisfied ? 0 : 1;
        }
        if (cmp->parsed()) {
            const tractlab::ReportDiff diff =
                tractlab::compare_reports(load_json(report_a), load_json(report_b));
            for (const std::string& line : diff.lines) std::cout << line << "\n";
            std::cout << "max relative difference: " << diff.max_relative << "\n";
            if (diff.mismatched) return 2;
            if (max_rel > 0 && diff.max_relative > max_rel) return 1;
            return 0;
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
