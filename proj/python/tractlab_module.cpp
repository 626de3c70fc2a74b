#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tractlab/harness.hpp"

namespace py = pybind11;
using namespace tractlab;

namespace {

Vec3 to_vec3(const std::vector<double>& v) {
    if (v.size() != 3) throw std::invalid_argument("expected a 3-vector");
    return {v[0], v[1], v[2]};
}

std::vector<double> from_vec3(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

py::dict levelset_to_dict(const LevelSet& ls) {
    py::dict d;
    d["level"] = ls.level;
    py::list comps;
    for (const Polyline& p : ls.components) {
        py::dict c;
        std::vector<std::pair<double, double>> uv;
        for (const Vec2& q : p.uv) uv.emplace_back(q.x(), q.y());
        c["uv"] = uv;
        c["theta"] = p.theta;
        c["closed"] = p.closed;
        c["length"] = p.length();
        comps.append(c);
    }
    d["components"] = comps;
    return d;
}

}  // namespace

PYBIND11_MODULE(_tractlab, m) {
    m.doc() = "invariants and inequality checks for immersed minimal surfaces";

    py::class_<DomainBox>(m, "DomainBox")
        .def(py::init<>())
        .def_readwrite("u0", &DomainBox::u0)
        .def_readwrite("u1", &DomainBox::u1)
        .def_readwrite("v0", &DomainBox::v0)
        .def_readwrite("v1", &DomainBox::v1)
        .def_readwrite("periodic_u", &DomainBox::periodic_u)
        .def_readwrite("periodic_v", &DomainBox::periodic_v);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<int, int>(), py::arg("nu") = 256, py::arg("nv") = 256)
        .def_readwrite("nu", &GridSpec::nu)
        .def_readwrite("nv", &GridSpec::nv);

    py::class_<SurfaceChart, std::shared_ptr<SurfaceChart>>(m, "SurfaceChart")
        .def_property_readonly("name", &SurfaceChart::name)
        .def_property_readonly("euler_char",
                               [](const SurfaceChart& s) { return s.euler_char(); })
        .def("position", [](const SurfaceChart& s, double u, double v) {
            return from_vec3(s.position(u, v));
        })
        .def("normal", [](const SurfaceChart& s, double u, double v) {
            return from_vec3(s.normal(u, v));
        });

    m.def("catalog_surface", [](const std::string& name) {
        return std::const_pointer_cast<SurfaceChart>(catalog_surface(name));
    });
    m.def("catalog_surface", [](const std::string& name, const DomainBox& box) {
        return std::const_pointer_cast<SurfaceChart>(catalog_surface(name, box));
    });
    m.def("graph_surface", [](std::function<double(double, double)> phi, const DomainBox& box) {
        return std::const_pointer_cast<SurfaceChart>(graph_surface(std::move(phi), box));
    });
    m.def("box_for_radius", &box_for_radius);

    m.def("curvature_at", [](const std::shared_ptr<SurfaceChart>& s, double u, double v) {
        const CurvatureData c = curvature_at(*s, u, v);
        py::dict d;
        d["mean_curvature"] = c.mean_curvature;
        d["gauss_curvature"] = c.gauss_curvature;
        d["principal_curvatures"] =
            std::make_pair(c.principal_curvatures[0], c.principal_curvatures[1]);
        d["normal"] = from_vec3(c.normal);
        return d;
    });
    m.def("gauss_map_distortion", [](const std::shared_ptr<SurfaceChart>& s, const GridSpec& g) {
        return gauss_map_distortion(*s, g);
    }, py::arg("surface"), py::arg("grid") = GridSpec{64, 64});
    m.def("alpha_minimality_residual",
          [](const std::shared_ptr<SurfaceChart>& s, const std::vector<double>& e, double alpha, const GridSpec& g) {
              return alpha_minimality_residual(*s, to_vec3(e), alpha, g);
          },
          py::arg("surface"), py::arg("e"), py::arg("alpha") = 2.0,
          py::arg("grid") = GridSpec{64, 64});

    py::class_<ScalarField>(m, "ScalarField")
        .def("value", &ScalarField::value)
        .def("gradient_norm", &ScalarField::gradient_norm);
    m.def("coordinate_field", [](const std::shared_ptr<SurfaceChart>& s, const std::vector<double>& e) {
        return ScalarField::coordinate(s, to_vec3(e));
    });
    m.def("abs_coordinate_field", [](const std::shared_ptr<SurfaceChart>& s, const std::vector<double>& e) {
        return ScalarField::abs_coordinate(s, to_vec3(e));
    });
    m.def("norm_field", [](const SurfacePtr& s) { return ScalarField::norm(s); });

    m.def("extract_level_set",
          [](const ScalarField& f, double t, const GridSpec& g) {
              return levelset_to_dict(extract_level_set(f, t, g));
          },
          py::arg("field"), py::arg("t"), py::arg("grid") = GridSpec{256, 256});
    m.def("superlevel_component_count",
          [](const ScalarField& f, double tau, const GridSpec& g) {
              return superlevel_components(f, tau, g).count;
          },
          py::arg("field"), py::arg("tau"), py::arg("grid") = GridSpec{256, 256});

    m.def("fundamental_frequency",
          [](const ScalarField& f, double t, const GridSpec& g, bool reduced) {
              const LevelSet ls = extract_level_set(f, t, g);
              FrequencySpec spec;
              spec.reduced = reduced;
              const FrequencyResult r = fundamental_frequency(ls, spec);
              py::dict d;
              d["lambda"] = r.lambda;
              py::list per;
              for (const auto& c : r.per_component) {
                  py::dict e;
                  e["component"] = c.component;
                  e["cyclic"] = c.cyclic;
                  e["theta_integral"] = c.theta_integral;
                  e["lambda"] = c.lambda;
                  per.append(e);
              }
              d["per_component"] = per;
              return d;
          },
          py::arg("field"), py::arg("t"), py::arg("grid") = GridSpec{256, 256},
          py::arg("reduced") = false);
    m.def("rayleigh_oracle_uniform",
          [](double length, double theta, bool closed, int n) {
              return rayleigh_oracle(WeightedPath::uniform(length, n, theta, closed), 2.0, n);
          },
          py::arg("length"), py::arg("theta") = 1.0, py::arg("closed") = false,
          py::arg("n") = 256);
    m.def("fundamental_frequency_oracle",
          [](const ScalarField& f, double t, const GridSpec& g, int n) {
              return fundamental_frequency_oracle(extract_level_set(f, t, g), n).lambda;
          },
          py::arg("field"), py::arg("t"), py::arg("grid") = GridSpec{256, 256},
          py::arg("n") = 256);

    m.def("dirichlet_integral",
          [](const ScalarField& f, double alpha, const GridSpec& g) {
              return dirichlet_integral(f, alpha, g);
          },
          py::arg("field"), py::arg("alpha") = 2.0, py::arg("grid") = GridSpec{256, 256});
    m.def("full_flow",
          [](const ScalarField& h, const std::vector<double>& ts, const GridSpec& g,
             double alpha) { return full_flow(h, ts, g, alpha).S; },
          py::arg("h"), py::arg("t_samples"), py::arg("grid") = GridSpec{256, 256},
          py::arg("alpha") = 2.0);
    m.def("capacity_closed_form", &capacity_closed_form);
    m.def("capacity_variational",
          [](const ScalarField& h, double t1, double t2, double alpha, const GridSpec& g) {
              return capacity_variational(h, t1, t2, alpha, g);
          },
          py::arg("h"), py::arg("t1"), py::arg("t2"), py::arg("alpha") = 2.0,
          py::arg("grid") = GridSpec{256, 256});

    m.def("hump_count",
          [](const std::shared_ptr<SurfaceChart>& s, const std::vector<double>& e, double a, const GridSpec& g) {
              return hump_count(s, to_vec3(e), a, g).count;
          },
          py::arg("surface"), py::arg("e"), py::arg("a"), py::arg("grid") = GridSpec{256, 256});

    m.def("projective_volume",
          [](const std::string& name, double radius, const GridSpec& g) {
              const ProjectiveVolumeEstimate est = nested_projective_volume(name, radius, g);
              py::dict d;
              d["V2"] = est.V2;
              d["V2_from_area"] = est.slope_fit_area;
              d["diverged"] = est.diverged;
              return d;
          },
          py::arg("name"), py::arg("radius") = 1000.0, py::arg("grid") = GridSpec{256, 256});

    m.def("find_critical_points",
          [](const std::shared_ptr<SurfaceChart>& s, const std::vector<double>& e, const GridSpec& g) {
              py::list out;
              for (const CriticalPointRecord& r : find_critical_points(s, to_vec3(e), g)) {
                  py::dict d;
                  d["u"] = r.u;
                  d["v"] = r.v;
                  d["value"] = r.value;
                  d["sigma"] = r.sigma;
                  d["index"] = r.index;
                  d["valid"] = r.valid;
                  out.append(d);
              }
              return out;
          },
          py::arg("surface"), py::arg("e"), py::arg("grid") = GridSpec{256, 256});

    m.def("run_suite", [](const std::string& config_json) {
        const RunConfig cfg = RunConfig::from_json(json::parse(config_json));
        return run_suite(cfg).to_json().dump(2);
    });
    m.def("default_suites", &default_suites);
}
