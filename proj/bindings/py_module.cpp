// Python bindings for the core operations: ensemble construction,
// diagonalization, observables, theory curves, law fits and single cells.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "brmdd/ensemble.hpp"
#include "brmdd/fitting.hpp"
#include "brmdd/observables.hpp"
#include "brmdd/spectral.hpp"
#include "brmdd/sweep.hpp"
#include "brmdd/theory.hpp"
#include "brmdd/version.hpp"

namespace py = pybind11;
using namespace brmdd;

namespace {

py::array_t<double> matrix_to_numpy(const BrmddMatrix& m) {
    const int n = m.dim();
    py::array_t<double> out({n, n});
    std::copy(m.entries.begin(), m.entries.end(), out.mutable_data());
    return out;
}

py::array_t<double> vector_to_numpy(const std::vector<double>& v) {
    // the (ssize_t count) array_t constructor of pybind11 3.0 produces a
    // stride-0 array; spell the shape out to hit the ShapeContainer overload
    py::array_t<double> out(py::array::ShapeContainer{static_cast<py::ssize_t>(v.size())});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<OverlapSpectrum> overlap_list(const py::iterable& it) {
    std::vector<OverlapSpectrum> out;
    for (py::handle h : it) out.push_back(h.cast<OverlapSpectrum>());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "band random matrices with disordered diagonal: spectral statistics lab";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "BrmddError");

    py::class_<EnsembleParams>(m, "EnsembleParams")
        .def(py::init<>())
        .def_readwrite("half_size", &EnsembleParams::half_size)
        .def_readwrite("band", &EnsembleParams::band)
        .def_readwrite("coupling_rms", &EnsembleParams::coupling_rms)
        .def_readwrite("level_spacing", &EnsembleParams::level_spacing)
        .def_readwrite("master_seed", &EnsembleParams::master_seed)
        .def_readwrite("n_realizations", &EnsembleParams::n_realizations)
        .def_property_readonly("dim", &EnsembleParams::dim)
        .def("validate", &EnsembleParams::validate)
        .def("__repr__", [](const EnsembleParams& p) {
            return "EnsembleParams(K=" + std::to_string(p.half_size) +
                   ", b=" + std::to_string(p.band) + ", v=" + format_double(p.coupling_rms) +
                   ", delta=" + format_double(p.level_spacing) + ")";
        });

    py::class_<DerivedParams>(m, "DerivedParams")
        .def_readonly("beta", &DerivedParams::beta)
        .def_readonly("delta_c", &DerivedParams::delta_c)
        .def_readonly("q", &DerivedParams::q);
    m.def("derived_params", &derived_params, py::arg("params"));

    m.def(
        "from_dimensionless",
        [](double q, double beta, int half_size, double delta, int realizations,
           std::uint64_t master_seed) {
            return CellSpec::from_dimensionless(q, beta, half_size, delta, realizations,
                                                master_seed)
                .params;
        },
        py::arg("q"), py::arg("beta"), py::arg("half_size"), py::arg("delta") = 1.0,
        py::arg("realizations") = 100, py::arg("master_seed") = 0,
        "EnsembleParams from the (q, beta) parameterization");

    m.def(
        "build_matrix",
        [](const EnsembleParams& p, int realization_index) {
            return matrix_to_numpy(build_matrix(p, realization_index));
        },
        py::arg("params"), py::arg("realization_index"),
        "one disorder realization as a dense numpy array");

    py::class_<SpectralDecomposition>(m, "SpectralDecomposition")
        .def_property_readonly("n", [](const SpectralDecomposition& d) { return d.n; })
        .def_property_readonly(
            "eigenvalues",
            [](const SpectralDecomposition& d) { return vector_to_numpy(d.eigenvalues); })
        .def_property_readonly("eigenvectors", [](const SpectralDecomposition& d) {
            // column j is eigenvector j, matching the numpy eigh convention
            py::array_t<double> out({d.n, d.n});
            double* dst = out.mutable_data();
            for (int i = 0; i < d.n; ++i)
                for (int j = 0; j < d.n; ++j) dst[static_cast<std::size_t>(i) * d.n + j] = d.component(i, j);
            return out;
        });

    m.def(
        "diagonalize",
        [](const EnsembleParams& p, int realization_index) {
            return diagonalize(build_matrix(p, realization_index));
        },
        py::arg("params"), py::arg("realization_index"),
        "build and diagonalize one realization");
    m.def(
        "diagonalize_dense",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
            if (a.ndim() != 2 || a.shape(0) != a.shape(1))
                throw Error("diagonalize_dense: need a square 2-D array");
            const int n = static_cast<int>(a.shape(0));
            std::vector<double> values(a.data(), a.data() + static_cast<std::size_t>(n) * n);
            return diagonalize_dense(n, values);
        },
        py::arg("matrix"), "dense symmetric eigensolve of a numpy array");
    m.def("eigensolver_backend", &eigensolver_backend);

    py::class_<OverlapSpectrum>(m, "OverlapSpectrum")
        .def(py::init<>())
        .def_readwrite("energies", &OverlapSpectrum::energies)
        .def_readwrite("weights", &OverlapSpectrum::weights)
        .def("weight_sum", &OverlapSpectrum::weight_sum)
        .def("sum_squared_weights", &OverlapSpectrum::sum_squared_weights)
        .def("validate", &OverlapSpectrum::validate, py::arg("tol") = 1e-10);
    m.def("overlaps", &overlaps, py::arg("decomposition"));
    m.def(
        "ipr", [](const py::iterable& samples) { return ipr(overlap_list(samples)); },
        py::arg("samples"), "inverse participation ratio over disorder realizations");
    m.def("eigenvector_ipr", &eigenvector_ipr, py::arg("decomposition"));

    py::class_<LsdEstimate>(m, "LsdEstimate")
        .def_readonly("window_half_width", &LsdEstimate::window_half_width)
        .def_readonly("rho_e", &LsdEstimate::rho_e)
        .def_readonly("n_realizations_used", &LsdEstimate::n_realizations_used)
        .def_readonly("bin_edges", &LsdEstimate::bin_edges)
        .def_readonly("weighted_sums", &LsdEstimate::weighted_sums)
        .def_readonly("raw_counts", &LsdEstimate::raw_counts)
        .def("n_bins", &LsdEstimate::n_bins)
        .def("bin_center", &LsdEstimate::bin_center, py::arg("b"))
        .def("populated", &LsdEstimate::populated, py::arg("b"))
        .def("rho", &LsdEstimate::rho, py::arg("b"))
        .def("integral", &LsdEstimate::integral)
        .def("merge", &LsdEstimate::merge, py::arg("other"));
    m.def(
        "lsd_histogram",
        [](const py::iterable& samples, double window_half_width, int n_bins, double rho_e) {
            return lsd_histogram(overlap_list(samples), window_half_width, n_bins, rho_e);
        },
        py::arg("samples"), py::arg("window_half_width"), py::arg("n_bins"), py::arg("rho_e"));

    py::class_<SpacingSample>(m, "SpacingSample")
        .def(py::init<>())
        .def_readwrite("spacings", &SpacingSample::spacings)
        .def_readwrite("window_fraction", &SpacingSample::window_fraction)
        .def("mean", &SpacingSample::mean)
        .def("append", &SpacingSample::append);
    m.def("level_spacings", &level_spacings, py::arg("decomposition"), py::arg("window_fraction"));

    py::enum_<SpacingReference>(m, "SpacingReference")
        .value("poisson", SpacingReference::poisson)
        .value("wigner_dyson", SpacingReference::wigner_dyson);
    m.def("spacing_distance", &spacing_distance, py::arg("sample"), py::arg("reference"));

    py::class_<LawConstants>(m, "LawConstants")
        .def(py::init<>())
        .def_readwrite("L1", &LawConstants::L1)
        .def_readwrite("L2", &LawConstants::L2)
        .def_readwrite("D1", &LawConstants::D1)
        .def_readwrite("D2", &LawConstants::D2)
        .def_readwrite("C", &LawConstants::C)
        .def_readwrite("C0", &LawConstants::C0);

    m.def("breit_wigner", &breit_wigner, py::arg("energy"), py::arg("gamma"));
    m.def("xi_e_law", &xi_e_law, py::arg("q"), py::arg("constants") = LawConstants{});
    m.def("golden_rule_gamma", &golden_rule_gamma, py::arg("coupling_rms"), py::arg("delta_c"));
    m.def("small_q_gamma", &small_q_gamma, py::arg("coupling_rms"), py::arg("beta"));
    m.def("two_state_overlap", &two_state_overlap, py::arg("coupling"), py::arg("energy"));
    m.def("ipr_ergodic_law", &ipr_ergodic_law, py::arg("q"), py::arg("constants") = LawConstants{});
    m.def("ipr_nonergodic_law", &ipr_nonergodic_law, py::arg("q"), py::arg("beta"),
          py::arg("constants") = LawConstants{});
    m.def("reference_spacing_pdf", &reference_spacing_pdf, py::arg("s"), py::arg("which"));
    m.def("reference_spacing_cdf", &reference_spacing_cdf, py::arg("s"), py::arg("which"));

    py::enum_<Regime>(m, "Regime")
        .value("perturbative", Regime::perturbative)
        .value("localized_nonergodic", Regime::localized_nonergodic)
        .value("localized_ergodic", Regime::localized_ergodic);
    py::class_<RegimeDecision>(m, "RegimeDecision")
        .def_readonly("label", &RegimeDecision::label)
        .def_readonly("x", &RegimeDecision::x)
        .def_readonly("localization_border", &RegimeDecision::localization_border)
        .def_readonly("ergodicity_border", &RegimeDecision::ergodicity_border);
    m.def("classify_regime", &classify_regime, py::arg("q"), py::arg("beta"),
          py::arg("constants") = LawConstants{});

    py::class_<LorentzianFit>(m, "LorentzianFit")
        .def_readonly("gamma", &LorentzianFit::gamma)
        .def_readonly("amplitude", &LorentzianFit::amplitude)
        .def_readonly("residual_rms", &LorentzianFit::residual_rms)
        .def_readonly("n_bins_used", &LorentzianFit::n_bins_used)
        .def_readonly("xi_e", &LorentzianFit::xi_e)
        .def_readonly("iterations", &LorentzianFit::iterations)
        .def_readonly("window_converged", &LorentzianFit::window_converged);
    m.def("fit_lorentzian", &fit_lorentzian, py::arg("histogram"), py::arg("rho_e"));

    py::class_<LsdWidthEstimate>(m, "LsdWidthEstimate")
        .def_readonly("fit", &LsdWidthEstimate::fit)
        .def_readonly("histogram", &LsdWidthEstimate::histogram);
    m.def(
        "fit_lsd_width",
        [](const py::iterable& samples, double coupling_rms, double level_spacing, double beta) {
            return fit_lsd_width(overlap_list(samples), coupling_rms, level_spacing, beta);
        },
        py::arg("samples"), py::arg("coupling_rms"), py::arg("level_spacing"), py::arg("beta"));

    py::class_<LawFit>(m, "LawFit")
        .def_readonly("names", &LawFit::names)
        .def_readonly("values", &LawFit::values)
        .def_readonly("std_errors", &LawFit::std_errors)
        .def_readonly("n_points", &LawFit::n_points)
        .def_readonly("rss", &LawFit::rss)
        .def_readonly("restriction", &LawFit::restriction);

    py::class_<LawPoint>(m, "LawPoint")
        .def(py::init<double, double>(), py::arg("q"), py::arg("value"))
        .def_readwrite("q", &LawPoint::q)
        .def_readwrite("value", &LawPoint::value);
    py::class_<ExpPoint>(m, "ExpPoint")
        .def(py::init<double, double, double>(), py::arg("x"), py::arg("xi_ipr"), py::arg("xi_e"))
        .def_readwrite("x", &ExpPoint::x)
        .def_readwrite("xi_ipr", &ExpPoint::xi_ipr)
        .def_readwrite("xi_e", &ExpPoint::xi_e);

    m.def("fit_xi_e_law",
          [](const std::vector<LawPoint>& pts) { return fit_xi_e_law(pts); }, py::arg("points"));
    m.def("fit_ergodic_ipr_law",
          [](const std::vector<LawPoint>& pts) { return fit_ergodic_ipr_law(pts); },
          py::arg("points"));
    m.def(
        "fit_exponential_rate",
        [](const std::vector<ExpPoint>& pts,
           const std::optional<std::function<bool(const ExpPoint&)>>& restriction,
           const std::string& name) {
            if (restriction) return fit_exponential_rate(pts, *restriction, name);
            return fit_exponential_rate(pts);
        },
        py::arg("points"), py::arg("restriction") = py::none(),
        py::arg("restriction_name") = "custom");

    py::enum_<CellStatus>(m, "CellStatus")
        .value("ok", CellStatus::ok)
        .value("rejected", CellStatus::rejected)
        .value("failed", CellStatus::failed);

    py::class_<SweepOptions>(m, "SweepOptions")
        .def(py::init<>())
        .def_readwrite("lsd_bins", &SweepOptions::lsd_bins)
        .def_readwrite("window_gammas", &SweepOptions::window_gammas)
        .def_readwrite("spacing_window_fraction", &SweepOptions::spacing_window_fraction)
        .def_readwrite("guard_ratio", &SweepOptions::guard_ratio)
        .def_readwrite("workers", &SweepOptions::workers)
        .def_readwrite("emit_lsd", &SweepOptions::emit_lsd)
        .def_readwrite("emit_spacing", &SweepOptions::emit_spacing);

    py::class_<CellResult>(m, "CellResult")
        .def_readonly("half_size", &CellResult::half_size)
        .def_readonly("band", &CellResult::band)
        .def_readonly("coupling_rms", &CellResult::coupling_rms)
        .def_readonly("level_spacing", &CellResult::level_spacing)
        .def_readonly("beta", &CellResult::beta)
        .def_readonly("delta_c", &CellResult::delta_c)
        .def_readonly("q", &CellResult::q)
        .def_readonly("gamma", &CellResult::gamma)
        .def_readonly("xi_e", &CellResult::xi_e)
        .def_readonly("xi_ipr", &CellResult::xi_ipr)
        .def_readonly("evec_ipr", &CellResult::evec_ipr)
        .def_readonly("ks_poisson", &CellResult::ks_poisson)
        .def_readonly("ks_wigner_dyson", &CellResult::ks_wigner_dyson)
        .def_readonly("regime", &CellResult::regime)
        .def_readonly("n_realizations", &CellResult::n_realizations)
        .def_readonly("status", &CellResult::status)
        .def_readonly("message", &CellResult::message)
        .def_readonly("cell_key", &CellResult::cell_key)
        .def_readonly("wall_seconds", &CellResult::wall_seconds)
        .def_readonly("lsd", &CellResult::lsd)
        .def_readonly("pooled_spacings", &CellResult::pooled_spacings);
    m.def("run_cell", &run_cell, py::arg("params"), py::arg("options") = SweepOptions{},
          py::call_guard<py::gil_scoped_release>());
}
