#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "detloop/bell.hpp"
#include "detloop/constructions.hpp"
#include "detloop/quantum.hpp"
#include "detloop/solver.hpp"

namespace py = pybind11;
using namespace detloop;

namespace {

// FamilySpec-based threshold entry points keep the eta -> expression map on
// the C++ side, so the GIL can stay released for the whole search.
std::optional<ThresholdResult> py_threshold_efficiency(const FamilySpec& fam,
                                                       const SchmidtState& state,
                                                       const OptimizerConfig& cfg,
                                                       const std::vector<SettingsPair>& seeds,
                                                       const ThresholdOptions& opts) {
    return threshold_efficiency(fam.family(), state, fam.dim(), cfg, seeds, opts);
}

std::optional<ThresholdResult> py_threshold_for_construction(const FamilySpec& fam,
                                                             const SchmidtState& state,
                                                             const MeasurementSettings& a,
                                                             const MeasurementSettings& b,
                                                             const ThresholdOptions& opts) {
    return threshold_for_construction(fam.family(), state, a, b, opts);
}

}  // namespace

PYBIND11_MODULE(_detloop, m) {
    m.doc() = "detection-loophole Bell test toolkit";
    m.attr("__version__") = "0.1.0";

    py::class_<CorrelationTable>(m, "CorrelationTable")
        .def(py::init<>())
        .def(py::init<int, int>(), py::arg("nA"), py::arg("nB"))
        .def_readwrite("nA", &CorrelationTable::nA)
        .def_readwrite("nB", &CorrelationTable::nB)
        .def_readwrite("joint", &CorrelationTable::joint)
        .def_readwrite("margA", &CorrelationTable::margA)
        .def_readwrite("margB", &CorrelationTable::margB)
        .def("at", [](const CorrelationTable& t, int x, int y) { return t.at(x, y); });

    py::class_<BellExpression>(m, "BellExpression")
        .def(py::init<>())
        .def(py::init<int, int>(), py::arg("nA"), py::arg("nB"))
        .def_readwrite("nA", &BellExpression::nA)
        .def_readwrite("nB", &BellExpression::nB)
        .def_readwrite("cJoint", &BellExpression::cJoint)
        .def_readwrite("cA", &BellExpression::cA)
        .def_readwrite("cB", &BellExpression::cB)
        .def_readwrite("constant", &BellExpression::constant)
        .def_readwrite("localBound", &BellExpression::localBound);

    py::class_<DetectionScheme> scheme(m, "DetectionScheme");
    py::enum_<DetectionScheme::Kind>(scheme, "Kind")
        .value("NONE", DetectionScheme::Kind::None)
        .value("SYMMETRIC", DetectionScheme::Kind::Symmetric)
        .value("ASYMMETRIC", DetectionScheme::Kind::Asymmetric);
    scheme.def_static("none", &DetectionScheme::none)
        .def_static("symmetric", &DetectionScheme::symmetric, py::arg("eta"))
        .def_static("asymmetric", &DetectionScheme::asymmetric, py::arg("etaB"))
        .def_readonly("kind", &DetectionScheme::kind)
        .def_readonly("efficiency", &DetectionScheme::efficiency)
        .def("normalizer", &DetectionScheme::normalizer);

    py::class_<DeterministicStrategy>(m, "DeterministicStrategy")
        .def(py::init<>())
        .def_readwrite("outA", &DeterministicStrategy::outA)
        .def_readwrite("outB", &DeterministicStrategy::outB);

    py::class_<LocalBoundResult>(m, "LocalBoundResult")
        .def_readonly("value", &LocalBoundResult::value)
        .def_readonly("strategy", &LocalBoundResult::strategy);

    py::class_<SchmidtState>(m, "SchmidtState")
        .def(py::init<>())
        .def_readwrite("dim", &SchmidtState::dim)
        .def_readwrite("lambda_", &SchmidtState::lambda)
        .def_readwrite("noise", &SchmidtState::noise);

    py::class_<MeasurementSettings>(m, "MeasurementSettings")
        .def(py::init<>())
        .def_readwrite("dim", &MeasurementSettings::dim)
        .def_readwrite("vectors", &MeasurementSettings::vectors)
        .def("count", &MeasurementSettings::count);

    py::class_<RecursionCoefficients>(m, "RecursionCoefficients")
        .def_readonly("p", &RecursionCoefficients::p)
        .def_readonly("q", &RecursionCoefficients::q);

    py::class_<QuquartParams>(m, "QuquartParams")
        .def(py::init<>())
        .def_readwrite("u", &QuquartParams::u)
        .def_readwrite("v", &QuquartParams::v)
        .def_readwrite("p1", &QuquartParams::p1)
        .def_readwrite("p2", &QuquartParams::p2)
        .def_readwrite("q1", &QuquartParams::q1)
        .def_readwrite("q2", &QuquartParams::q2);

    py::class_<Construction>(m, "Construction")
        .def_readonly("name", &Construction::name)
        .def_readonly("expr", &Construction::expr)
        .def_readonly("schemeKind", &Construction::schemeKind)
        .def_readonly("state", &Construction::state)
        .def_readonly("settingsA", &Construction::settingsA)
        .def_readonly("settingsB", &Construction::settingsB);

    py::class_<OptimizerConfig>(m, "OptimizerConfig")
        .def(py::init<>())
        .def_readwrite("restarts", &OptimizerConfig::restarts)
        .def_readwrite("maxIterations", &OptimizerConfig::maxIterations)
        .def_readwrite("xTolerance", &OptimizerConfig::xTolerance)
        .def_readwrite("fTolerance", &OptimizerConfig::fTolerance)
        .def_readwrite("seed", &OptimizerConfig::seed)
        .def_readwrite("seedWithConstructions", &OptimizerConfig::seedWithConstructions)
        .def_readwrite("optimizeState", &OptimizerConfig::optimizeState)
        .def_readwrite("threads", &OptimizerConfig::threads);

    py::class_<SettingsPair>(m, "SettingsPair")
        .def(py::init<>())
        .def(py::init([](MeasurementSettings a, MeasurementSettings b) {
                 return SettingsPair{std::move(a), std::move(b)};
             }),
             py::arg("a"), py::arg("b"))
        .def_readwrite("a", &SettingsPair::a)
        .def_readwrite("b", &SettingsPair::b);

    py::class_<OptimizeResult>(m, "OptimizeResult")
        .def_readonly("value", &OptimizeResult::value)
        .def_readonly("settingsA", &OptimizeResult::settingsA)
        .def_readonly("settingsB", &OptimizeResult::settingsB)
        .def_readonly("state", &OptimizeResult::state)
        .def_readonly("startIndex", &OptimizeResult::startIndex);

    py::class_<ThresholdResult>(m, "ThresholdResult")
        .def_readonly("eta", &ThresholdResult::eta)
        .def_readonly("valueAtEta", &ThresholdResult::valueAtEta)
        .def_readonly("settingsA", &ThresholdResult::settingsA)
        .def_readonly("settingsB", &ThresholdResult::settingsB)
        .def_readonly("state", &ThresholdResult::state)
        .def_readonly("iterations", &ThresholdResult::iterations);

    py::class_<ThresholdOptions>(m, "ThresholdOptions")
        .def(py::init<>())
        .def_readwrite("bracketTol", &ThresholdOptions::bracketTol)
        .def_readwrite("etaLo", &ThresholdOptions::etaLo)
        .def_readwrite("violationTol", &ThresholdOptions::violationTol);

    py::class_<FamilySpec> fam(m, "FamilySpec");
    py::enum_<FamilySpec::Kind>(fam, "Kind")
        .value("CH", FamilySpec::Kind::Ch)
        .value("ASYMMETRIC_INN22", FamilySpec::Kind::AsymmetricInn22)
        .value("SYMMETRIC_I4422", FamilySpec::Kind::SymmetricI4422);
    fam.def(py::init([](FamilySpec::Kind kind, int n) {
                return FamilySpec{kind, n};
            }),
            py::arg("kind"), py::arg("n") = 3)
        .def_readwrite("kind", &FamilySpec::kind)
        .def_readwrite("n", &FamilySpec::n)
        .def("dim", &FamilySpec::dim)
        .def("settingCount", &FamilySpec::settingCount)
        .def("raw", &FamilySpec::raw)
        .def("name", &FamilySpec::name)
        .def("constructionSeeds", &FamilySpec::constructionSeeds, py::arg("epsilon"));

    py::class_<SweepPoint>(m, "SweepPoint")
        .def_readonly("epsilon", &SweepPoint::epsilon)
        .def_readonly("p", &SweepPoint::p)
        .def_readonly("eta", &SweepPoint::eta)
        .def_readonly("value", &SweepPoint::value)
        .def_readonly("converged", &SweepPoint::converged);

    py::class_<NoisePoint>(m, "NoisePoint")
        .def_readonly("p", &NoisePoint::p)
        .def_readonly("family", &NoisePoint::family)
        .def_readonly("eta", &NoisePoint::eta)
        .def_readonly("value", &NoisePoint::value)
        .def_readonly("converged", &NoisePoint::converged)
        .def_readonly("epsilon", &NoisePoint::epsilon);

    // bell-core operations
    m.def("evaluate", &evaluate, py::arg("expr"), py::arg("table"));
    m.def("local_bound", &local_bound, py::arg("expr"),
          py::call_guard<py::gil_scoped_release>());
    m.def("deterministic_table", &deterministic_table, py::arg("strategy"));
    m.def("apply_detection", &apply_detection, py::arg("table"), py::arg("scheme"));
    m.def("modify_for_detection", &modify_for_detection, py::arg("expr"), py::arg("scheme"));
    m.def("build_inn22", &build_inn22, py::arg("n"));
    m.def("build_ch", &build_ch);
    m.def("build_ch_sub", &build_ch_sub, py::arg("i"), py::arg("j"), py::arg("m"), py::arg("n"));
    m.def("build_i4422", &build_i4422);

    // quantum operations
    m.def("schmidt_from_epsilon", &schmidt_from_epsilon, py::arg("n"), py::arg("epsilon"),
          py::arg("noise") = 0.0);
    m.def("correlation_table", &correlation_table, py::arg("state"), py::arg("settingsA"),
          py::arg("settingsB"));
    m.def("closed_form_table", &closed_form_table, py::arg("n"), py::arg("epsilon"),
          py::arg("q0"));

    // constructions
    m.def("recursion_coefficients", &recursion_coefficients, py::arg("n"), py::arg("q0"));
    m.def("asymmetric_settings", &asymmetric_settings, py::arg("n"), py::arg("q0"));
    m.def("optimal_epsilon", &optimal_epsilon, py::arg("n"), py::arg("q0"));
    m.def("asymmetric_value_closed_form", &asymmetric_value_closed_form, py::arg("n"),
          py::arg("q0"), py::arg("etaB"));
    m.def("asymmetric_threshold", &asymmetric_threshold, py::arg("n"), py::arg("q0"));
    m.def("ch_settings", &ch_settings, py::arg("p1"), py::arg("p2"));
    m.def("ququart_settings", &ququart_settings, py::arg("params"));
    m.def("ququart_maxent_params", &ququart_maxent_params);
    m.def("ququart_small_epsilon_params", &ququart_small_epsilon_params, py::arg("epsilon"));
    m.def("lookup_construction", &lookup_construction, py::arg("spec"),
          py::arg("n") = std::nullopt, py::arg("q0") = std::nullopt,
          py::arg("epsilon") = std::nullopt);
    m.def("construction_names", &construction_names);

    // solver
    m.def("maximize_over_settings",
          [](const BellExpression& expr, const SchmidtState& state, int dim,
             const OptimizerConfig& cfg, const std::vector<SettingsPair>& seeds) {
              return maximize_over_settings(expr, state, dim, cfg, seeds);
          },
          py::arg("expr"), py::arg("state"), py::arg("dim"), py::arg("cfg"),
          py::arg("seeds") = std::vector<SettingsPair>{},
          py::call_guard<py::gil_scoped_release>());
    m.def("maximize_over_state_and_settings",
          [](const BellExpression& expr, int dim, const OptimizerConfig& cfg, double noise,
             const std::vector<SettingsPair>& seeds) {
              return maximize_over_state_and_settings(expr, dim, cfg, noise, seeds);
          },
          py::arg("expr"), py::arg("dim"), py::arg("cfg"), py::arg("noise") = 0.0,
          py::arg("seeds") = std::vector<SettingsPair>{},
          py::call_guard<py::gil_scoped_release>());
    m.def("threshold_efficiency", &py_threshold_efficiency, py::arg("family"), py::arg("state"),
          py::arg("cfg"), py::arg("seeds") = std::vector<SettingsPair>{},
          py::arg("opts") = ThresholdOptions{}, py::call_guard<py::gil_scoped_release>());
    m.def("threshold_for_construction", &py_threshold_for_construction, py::arg("family"),
          py::arg("state"), py::arg("settingsA"), py::arg("settingsB"),
          py::arg("opts") = ThresholdOptions{}, py::call_guard<py::gil_scoped_release>());
    m.def("sweep_epsilon",
          [](const FamilySpec& fam, double noise, const std::vector<double>& grid,
             const OptimizerConfig& cfg, bool warmStart, const ThresholdOptions& opts) {
              return sweep_epsilon(fam, noise, grid, cfg, warmStart, opts);
          },
          py::arg("family"), py::arg("noise"), py::arg("grid"), py::arg("cfg"),
          py::arg("warm_start") = true, py::arg("opts") = ThresholdOptions{},
          py::call_guard<py::gil_scoped_release>());
    m.def("sweep_noise",
          [](const std::vector<FamilySpec>& fams, const std::vector<double>& grid,
             const OptimizerConfig& cfg, const ThresholdOptions& opts) {
              return sweep_noise(fams, grid, cfg, opts);
          },
          py::arg("families"), py::arg("grid"), py::arg("cfg"),
          py::arg("opts") = ThresholdOptions{}, py::call_guard<py::gil_scoped_release>());
    m.def("min_threshold_over_epsilon",
          [](const FamilySpec& fam, double noise, const OptimizerConfig& cfg,
             const ThresholdOptions& opts) {
              return min_threshold_over_epsilon(fam, noise, cfg, opts);
          },
          py::arg("family"), py::arg("noise"), py::arg("cfg"),
          py::arg("opts") = ThresholdOptions{}, py::call_guard<py::gil_scoped_release>());
}
