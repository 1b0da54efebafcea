#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dvz/chaos.hpp"
#include "dvz/covering.hpp"
#include "dvz/errors.hpp"
#include "dvz/experiment.hpp"
#include "dvz/lengths.hpp"
#include "dvz/moments.hpp"
#include "dvz/spectral.hpp"

namespace py = pybind11;
using namespace dvz;

namespace {

std::vector<CirclePoint> to_points(const std::vector<double>& xs)
{
    return {xs.begin(), xs.end()};
}

CoveringSample to_sample(const std::vector<double>& omegas)
{
    CoveringSample s;
    s.synthetic = true;
    s.omegas = to_points(omegas);
    return s;
}

py::list arcs_to_list(const ArcSet& s)
{
    py::list out;
    for (const Arc& a : s.arcs())
        out.append(py::make_tuple(a.start().position(), a.length()));
    return out;
}

py::array_t<double> as_array(const std::vector<double>& v)
{
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict verdict_dict(const ConditionVerdict& v)
{
    py::dict d;
    d["kind"] = to_string(v.kind);
    d["classification"] = to_string(v.classification);
    d["method"] = to_string(v.method);
    d["partial_values"] = v.partial_values;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Random covering of the circle";
    m.attr("__version__") = DVZ_VERSION;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<RegionError>(m, "RegionError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<LengthSequence>(m, "LengthSequence")
        .def_static("alpha_over_n", &LengthSequence::alpha_over_n, py::arg("alpha"))
        .def_static("power", &LengthSequence::power, py::arg("c"), py::arg("beta"))
        .def_static("geometric", &LengthSequence::geometric, py::arg("a"), py::arg("ratio"))
        .def_static("explicit", &LengthSequence::explicit_list, py::arg("values"))
        .def("__call__", &LengthSequence::operator(), py::arg("n"))
        .def("count_above", &LengthSequence::count_above)
        .def("prefix_sum", &LengthSequence::prefix_sum)
        .def("__repr__", [](const LengthSequence& s) { return "LengthSequence(" + s.describe() + ")"; });

    m.def("kernel_K", &kernel_K, py::arg("seq"), py::arg("t"));
    m.def("kernel_Kn", &kernel_Kn, py::arg("seq"), py::arg("n"), py::arg("t"));
    m.def("minimal_d", &minimal_d, py::arg("alpha"));
    m.def("expected_uncovered_measure", &expected_uncovered_measure, py::arg("seq"), py::arg("n"));
    m.def(
        "check_condition",
        [](const LengthSequence& seq, const std::string& which, std::int64_t n_max, int d) {
            if (which == "A")
                return verdict_dict(check_condition_A(seq, n_max));
            if (which == "B")
                return verdict_dict(check_condition_B(seq, n_max));
            if (which == "shepp")
                return verdict_dict(shepp_classify(seq, n_max));
            if (which == "eq3")
                return verdict_dict(l1_condition_estimate(seq, d));
            throw ValidationError("unknown condition '" + which + "'");
        },
        py::arg("seq"), py::arg("which"), py::arg("n_max") = 1 << 20, py::arg("d") = 1);

    m.def(
        "sample_omegas",
        [](std::uint64_t seed, std::int64_t n) {
            const auto s = sample_omegas(seed, n);
            std::vector<double> v;
            for (auto p : s.omegas)
                v.push_back(p.position());
            return as_array(v);
        },
        py::arg("seed"), py::arg("n"));
    m.def(
        "arc_union",
        [](const std::vector<std::pair<double, double>>& arcs) {
            std::vector<Arc> a;
            for (auto [s, l] : arcs)
                a.emplace_back(s, l);
            return arcs_to_list(arc_union(a));
        },
        py::arg("arcs"));
    m.def(
        "noncovered_set",
        [](const std::vector<double>& omegas, const LengthSequence& seq, std::int64_t n) {
            return arcs_to_list(noncovered_set(to_sample(omegas), seq, n));
        },
        py::arg("omegas"), py::arg("seq"), py::arg("n"));
    m.def(
        "density_grid",
        [](const std::vector<double>& omegas, const LengthSequence& seq, std::int64_t n, std::int64_t G) {
            const auto gd = density_grid(to_sample(omegas), seq, n, G);
            return py::make_tuple(as_array(gd.values), gd.mass);
        },
        py::arg("omegas"), py::arg("seq"), py::arg("n"), py::arg("G"));
    m.def(
        "fourier_coeffs",
        [](const std::vector<double>& values, std::int64_t k_max) {
            GridDensity gd;
            gd.grid = static_cast<std::int64_t>(values.size());
            gd.values = values;
            gd.mass = total_mass(gd);
            const auto s = fourier_coeffs(gd, k_max);
            return py::array_t<std::complex<double>>(static_cast<py::ssize_t>(s.coeffs.size()), s.coeffs.data());
        },
        py::arg("values"), py::arg("k_max"));
    m.def(
        "pair_correlation_exact",
        [](double t, double u, const LengthSequence& seq, std::int64_t n) {
            return pair_correlation_exact(CirclePoint(t), CirclePoint(u), seq, n);
        },
        py::arg("t"), py::arg("u"), py::arg("seq"), py::arg("n"));
    m.def(
        "joint_Pk_expectation",
        [](const std::vector<double>& pts, double ell) { return joint_Pk_expectation(to_points(pts), ell); },
        py::arg("points"), py::arg("ell"));
    m.def(
        "H_product",
        [](const std::vector<double>& t, const std::vector<double>& tp, const LengthSequence& seq, double delta,
           double eta) {
            const auto r = H_product(to_points(t), to_points(tp), seq,
                                     RegionSpec{delta, static_cast<int>(t.size()), eta});
            return py::make_tuple(r.value, r.remainder_bound);
        },
        py::arg("t_hat"), py::arg("t_hat_prime"), py::arg("seq"), py::arg("delta"), py::arg("eta"));
    m.def(
        "box_dimension",
        [](const std::vector<double>& omegas, const LengthSequence& seq, std::int64_t n, double eps_min,
           double eps_max, int levels) {
            const auto e = box_dimension(noncovered_set(to_sample(omegas), seq, n), eps_min, eps_max, levels);
            return py::make_tuple(e.slope, e.stderr_);
        },
        py::arg("omegas"), py::arg("seq"), py::arg("n"), py::arg("eps_min"), py::arg("eps_max"),
        py::arg("levels"));
    m.def(
        "run_json",
        [](const std::string& config) {
            const auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(config));
            py::gil_scoped_release release;
            return run(cfg).to_json().dump();
        },
        py::arg("config"), "Run an experiment from a JSON config; returns the manifest as JSON text.");
}
