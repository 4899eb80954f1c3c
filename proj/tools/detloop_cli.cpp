// detloop: thresholds, local bounds and sweeps for detection-loophole Bell
// tests with qudits. Every command records a run manifest that `replay` can
// re-execute to reproduce its outputs byte-for-byte.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "detloop/bell.hpp"
#include "detloop/constructions.hpp"
#include "detloop/json_io.hpp"
#include "detloop/quantum.hpp"
#include "detloop/solver.hpp"

using nlohmann::json;
using namespace detloop;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitResource = 3;
constexpr int kExitNoThreshold = 4;
constexpr int kExitRegressionMiss = 5;

// Maps output paths into an alternate directory during replay and records
// everything written for the manifest.
struct OutputSink {
    std::optional<std::string> redirectDir;
    std::vector<std::string> written;

    std::string map(const std::string& path) {
        std::string target = path;
        if (redirectDir) {
            std::filesystem::create_directories(*redirectDir);
            target = (std::filesystem::path(*redirectDir) /
                      std::filesystem::path(path).filename()).string();
        } else {
            const auto parent = std::filesystem::path(path).parent_path();
            if (!parent.empty()) std::filesystem::create_directories(parent);
        }
        written.push_back(target);
        return target;
    }
};

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

std::string format_fixed(double v, int decimals = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

// fixed formatting with trailing zeros trimmed: 0 -> "0", 0.25 -> "0.25"
std::string format_trimmed(double v, int decimals = 6) {
    std::string s = format_fixed(v, decimals);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> grid;
    if (spec.find(':') != std::string::npos) {
        double start = 0.0, stop = 0.0;
        int count = 0;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &start, &stop, &count) != 3 || count < 1) {
            throw std::invalid_argument("grid must be start:stop:count or a comma list");
        }
        for (int i = 0; i < count; ++i) {
            grid.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
        }
        return grid;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
    if (grid.empty()) throw std::invalid_argument("empty grid");
    return grid;
}

FamilySpec family_from_name(const std::string& name, int n) {
    if (name == "ch") return {FamilySpec::Kind::Ch, 2};
    if (name == "inn22") return {FamilySpec::Kind::AsymmetricInn22, n};
    if (name == "i4422") return {FamilySpec::Kind::SymmetricI4422, 4};
    throw std::invalid_argument("unknown family: " + name + " (expected ch, inn22 or i4422)");
}

OptimizerConfig config_from_json(const json& cfg) {
    OptimizerConfig oc;
    oc.restarts = cfg.value("restarts", 64);
    oc.seed = cfg.value("seed", uint64_t{1});
    oc.threads = cfg.value("threads", 0);
    oc.seedWithConstructions = cfg.value("construction_seeds", true);
    return oc;
}

BellExpression expression_from_spec(const std::string& name, int n, const std::string& file) {
    if (!file.empty()) return load_json_file(file).get<BellExpression>();
    if (name == "inn22") return build_inn22(n);
    if (name == "ch") return build_ch();
    if (name == "i4422") return build_i4422();
    throw std::invalid_argument("unknown expression: " + name + " (expected inn22, ch or i4422)");
}

// ---------------------------------------------------------------- commands

int run_bound(const json& cfg, OutputSink& sink) {
    const BellExpression expr =
        expression_from_spec(cfg.value("expr", ""), cfg.value("n", 3), cfg.value("file", ""));
    BellExpression cached = expr;
    const LocalBoundResult bound = local_bound(expr);
    cached.localBound = bound.value;

    std::cout << format_trimmed(bound.value, 6) << "\n";
    std::cout << "strategy outA =";
    for (int o : bound.strategy.outA) std::cout << ' ' << (o > 0 ? "+1" : "-1");
    std::cout << "  outB =";
    for (int o : bound.strategy.outB) std::cout << ' ' << (o > 0 ? "+1" : "-1");
    std::cout << "\n";

    const std::string out = cfg.value("out", "");
    if (!out.empty()) {
        json j;
        j["expression"] = cached;
        j["localBound"] = bound.value;
        j["strategy"] = bound.strategy;
        save_json_file(sink.map(out), j);
    }
    return kExitOk;
}

DetectionScheme scheme_from_json(const json& cfg) {
    const double eta = cfg.value("eta", 0.0);
    const double etab = cfg.value("etab", 0.0);
    if (eta > 0.0 && etab > 0.0) {
        throw std::invalid_argument("--eta and --etab are mutually exclusive");
    }
    if (eta > 0.0) return DetectionScheme::symmetric(eta);
    if (etab > 0.0) return DetectionScheme::asymmetric(etab);
    return DetectionScheme::none();
}

int run_eval(const json& cfg, OutputSink& sink) {
    const DetectionScheme scheme = scheme_from_json(cfg);
    BellExpression expr;
    CorrelationTable table;
    if (cfg.contains("construction")) {
        std::optional<double> n, q0, eps;
        if (cfg.contains("n")) n = cfg["n"].get<double>();
        if (cfg.contains("q0sq")) q0 = std::sqrt(cfg["q0sq"].get<double>());
        if (cfg.contains("epsilon")) eps = cfg["epsilon"].get<double>();
        const Construction c = lookup_construction(cfg["construction"].get<std::string>(), n, q0, eps);
        expr = c.expr;
        SchmidtState state = c.state;
        state.noise = cfg.value("p", 0.0);
        table = correlation_table(state, c.settingsA, c.settingsB);
    } else {
        expr = expression_from_spec(cfg.value("expr", ""), cfg.value("n", 3),
                                    cfg.value("expr_file", ""));
        table = load_json_file(cfg.at("table_file").get<std::string>()).get<CorrelationTable>();
    }
    const double value = evaluate(modify_for_detection(expr, scheme), table);
    std::cout << format_fixed(value, 6) << "\n";

    const std::string out = cfg.value("out", "");
    if (!out.empty()) {
        json j{{"value", value}};
        save_json_file(sink.map(out), j);
    }
    return kExitOk;
}

int run_threshold(const json& cfg, OutputSink& sink) {
    const std::string familyName = cfg.at("family").get<std::string>();
    const int n = cfg.value("n", 3);
    const FamilySpec fam = family_from_name(familyName, n);
    const double p = cfg.value("p", 0.0);

    ThresholdOptions opts;
    opts.bracketTol = cfg.value("bracket_tol", cfg.value("closed_form", false) ? 1e-7 : 1e-4);

    std::optional<ThresholdResult> thr;
    if (cfg.value("closed_form", false)) {
        Construction c;
        if (fam.kind == FamilySpec::Kind::AsymmetricInn22) {
            const double q0 = std::sqrt(cfg.value("q0sq", 0.9));
            c = lookup_construction("inn22", n, q0, std::nullopt);
        } else if (fam.kind == FamilySpec::Kind::Ch) {
            if (cfg.contains("epsilon") && cfg["epsilon"].get<double>() < 0.5) {
                c = lookup_construction("ch-eberhard-partial", std::nullopt, std::nullopt,
                                        cfg["epsilon"].get<double>());
            } else {
                c = lookup_construction("ch-eberhard-maxent");
            }
        } else {
            if (cfg.contains("epsilon") && cfg["epsilon"].get<double>() < 0.5) {
                c = lookup_construction("i4422-smalleps", std::nullopt, std::nullopt,
                                        cfg["epsilon"].get<double>());
            } else {
                c = lookup_construction("i4422-maxent");
            }
        }
        SchmidtState state = c.state;
        state.noise = p;
        thr = threshold_for_construction(fam.family(), state, c.settingsA, c.settingsB, opts);
    } else {
        const double defaultEps = fam.kind == FamilySpec::Kind::SymmetricI4422
                                      ? 0.5
                                      : 1.0 / std::numbers::sqrt2;
        double eps = cfg.value("epsilon", defaultEps);
        if (fam.kind == FamilySpec::Kind::AsymmetricInn22 && cfg.contains("q0sq")) {
            eps = optimal_epsilon(n, std::sqrt(cfg["q0sq"].get<double>()));
        }
        const SchmidtState state = schmidt_from_epsilon(fam.dim(), eps, p);
        OptimizerConfig oc = config_from_json(cfg);
        oc.restarts = cfg.value("restarts", default_restarts_for_dim(fam.dim()));
        oc.optimizeState = cfg.value("free_state", false);
        std::vector<SettingsPair> seeds;
        if (oc.seedWithConstructions) seeds = fam.constructionSeeds(eps);
        thr = threshold_efficiency(fam.family(), state, fam.dim(), oc, seeds, opts);
    }

    if (!thr) {
        std::cout << "no violation at eta = 1\n";
        return kExitNoThreshold;
    }
    std::cout << format_fixed(thr->eta, 4) << "\n";

    const std::string out = cfg.value("out", "detloop-threshold.json");
    if (!out.empty()) {
        json j = *thr;
        j["family"] = familyName;
        save_json_file(sink.map(out), j);
    }
    return kExitOk;
}

int run_witness(const json& cfg, OutputSink& sink) {
    const double etaB = cfg.at("etab").get<double>();
    if (!(etaB > 0.0) || etaB > 1.0) throw std::invalid_argument("etab must lie in (0, 1]");

    OptimizerConfig oc = config_from_json(cfg);
    if (!cfg.contains("restarts")) oc.restarts = 1000;
    oc.optimizeState = true;
    oc.seedWithConstructions = false;

    const BellExpression modified =
        modify_for_detection(build_inn22(3), DetectionScheme::asymmetric(etaB));
    const OptimizeResult qubit = maximize_over_state_and_settings(modified, 2, oc);

    // qutrit feasibility from the closed-form construction; q0 chosen so the
    // construction threshold 1/(3 q0^2) sits below etaB when possible
    double q0sq = cfg.value("q0sq", std::clamp(1.08 / (3.0 * etaB), 0.9, 0.999));
    const double q0 = std::sqrt(q0sq);
    const auto [sa, sb] = asymmetric_settings(3, q0);
    const CorrelationTable t =
        correlation_table(schmidt_from_epsilon(3, optimal_epsilon(3, q0)), sa, sb);
    const double qutritValue = evaluate(modified, t);

    const bool consistent = qubit.value <= 1e-6 && qutritValue > 0.0;
    std::printf("qubit max (dim 2, %d restarts): %.6e\n", oc.restarts, qubit.value);
    std::printf("qutrit construction value (q0^2 = %.4f): %.6e\n", q0sq, qutritValue);
    std::cout << (consistent ? "witness-consistent\n" : "not witness-consistent\n");

    const std::string out = cfg.value("out", "");
    if (!out.empty()) {
        json j{{"etaB", etaB},
               {"qubit_max", qubit.value},
               {"qutrit_value", qutritValue},
               {"q0sq", q0sq},
               {"witness_consistent", consistent}};
        save_json_file(sink.map(out), j);
    }
    return kExitOk;
}

std::string sweep_epsilon_csv(const std::vector<SweepPoint>& points) {
    std::string csv = "epsilon,p,eta,value,converged\n";
    for (const SweepPoint& pt : points) {
        csv += format_fixed(pt.epsilon) + "," + format_fixed(pt.p) + ",";
        csv += pt.eta ? format_fixed(*pt.eta) : std::string{};
        csv += "," + format_fixed(pt.value) + "," + (pt.converged ? "1" : "0") + "\n";
    }
    return csv;
}

std::string sweep_noise_csv(const std::vector<NoisePoint>& points) {
    std::string csv = "p,family,eta,value,converged,epsilon\n";
    for (const NoisePoint& pt : points) {
        csv += format_fixed(pt.p) + "," + pt.family + ",";
        csv += pt.eta ? format_fixed(*pt.eta) : std::string{};
        csv += "," + format_fixed(pt.value) + "," + (pt.converged ? "1" : "0") + ",";
        csv += format_fixed(pt.epsilon) + "\n";
    }
    return csv;
}

int run_sweep_epsilon(const json& cfg, OutputSink& sink) {
    const FamilySpec fam = family_from_name(cfg.at("family").get<std::string>(), cfg.value("n", 3));
    const std::vector<double> grid = cfg.at("grid").get<std::vector<double>>();
    ThresholdOptions opts;
    opts.bracketTol = cfg.value("bracket_tol", 1e-4);
    const auto points = sweep_epsilon(fam, cfg.value("p", 0.0), grid, config_from_json(cfg),
                                      cfg.value("warm_start", true), opts);

    if (cfg.value("p", 0.0) == 0.0) {
        for (size_t i = 1; i < points.size(); ++i) {
            if (points[i].eta && points[i - 1].eta && *points[i].eta < *points[i - 1].eta - 2e-3) {
                std::cerr << "warning: threshold series is not monotone at epsilon = "
                          << points[i].epsilon << "\n";
            }
        }
    }

    const std::string out = cfg.value("out", "sweep-epsilon.csv");
    if (cfg.value("format", std::string{"csv"}) == "json") {
        json j = json::array();
        for (const auto& pt : points) {
            json row{{"epsilon", pt.epsilon}, {"p", pt.p}, {"value", pt.value},
                     {"converged", pt.converged}};
            if (pt.eta) row["eta"] = *pt.eta;
            j.push_back(row);
        }
        save_json_file(sink.map(out), j);
    } else {
        write_text_file(sink.map(out), sweep_epsilon_csv(points));
    }
    for (const auto& pt : points) {
        std::cout << format_fixed(pt.epsilon, 4) << " -> "
                  << (pt.eta ? format_fixed(*pt.eta, 4) : "none") << "\n";
    }
    return kExitOk;
}

int run_sweep_noise(const json& cfg, OutputSink& sink) {
    std::vector<FamilySpec> fams;
    for (const auto& name : cfg.at("families").get<std::vector<std::string>>()) {
        fams.push_back(family_from_name(name, cfg.value("n", 3)));
    }
    const std::vector<double> grid = cfg.at("grid").get<std::vector<double>>();
    ThresholdOptions opts;
    opts.bracketTol = cfg.value("bracket_tol", 2e-4);
    const auto points = sweep_noise(fams, grid, config_from_json(cfg), opts);

    const std::string out = cfg.value("out", "sweep-noise.csv");
    write_text_file(sink.map(out), sweep_noise_csv(points));
    for (const auto& pt : points) {
        std::cout << pt.family << " p=" << format_fixed(pt.p, 4) << " -> "
                  << (pt.eta ? format_fixed(*pt.eta, 4) : "none") << "\n";
    }
    return kExitOk;
}

// ------------------------------------------------------------- reproduce

struct RegressionRow {
    std::string id;
    double computed = 0.0;
    std::string comparison;  // human-readable target
    bool pass = false;
};

void print_summary(const std::vector<RegressionRow>& rows) {
    std::cout << "\nsummary\n";
    for (const auto& r : rows) {
        std::printf("  %-38s computed=%.6f  target %-22s  %s\n", r.id.c_str(), r.computed,
                    r.comparison.c_str(), r.pass ? "PASS" : "FAIL");
    }
}

std::string summary_csv(const std::vector<RegressionRow>& rows) {
    std::string csv = "id,computed,target,pass\n";
    for (const auto& r : rows) {
        csv += r.id + "," + format_fixed(r.computed) + "," + r.comparison + "," +
               (r.pass ? "1" : "0") + "\n";
    }
    return csv;
}

RegressionRow check_abs(const std::string& id, double computed, double target, double tol) {
    return {id, computed, format_fixed(target, 6) + " +- " + format_fixed(tol, 6),
            std::abs(computed - target) <= tol};
}

RegressionRow check_range(const std::string& id, double computed, double lo, double hi) {
    return {id, computed, "[" + format_fixed(lo, 6) + ", " + format_fixed(hi, 6) + "]",
            computed >= lo && computed <= hi};
}

int run_reproduce(const json& cfg, OutputSink& sink) {
    const std::string target = cfg.at("target").get<std::string>();
    OptimizerConfig oc = config_from_json(cfg);
    std::vector<RegressionRow> rows;
    std::string summaryName = "reproduce-" + target + "-summary.csv";

    if (target == "thresholds") {
        ThresholdOptions opts;
        opts.bracketTol = 1e-7;
        auto fixedThreshold = [&](const Construction& c) {
            FamilySpec fam = c.schemeKind == DetectionScheme::Kind::Asymmetric
                                 ? FamilySpec{FamilySpec::Kind::AsymmetricInn22, c.expr.nA}
                                 : (c.expr.nA == 2 ? FamilySpec{FamilySpec::Kind::Ch, 2}
                                                   : FamilySpec{FamilySpec::Kind::SymmetricI4422, 4});
            const auto thr = threshold_for_construction(fam.family(), c.state, c.settingsA,
                                                        c.settingsB, opts);
            return thr ? thr->eta : std::numeric_limits<double>::quiet_NaN();
        };

        rows.push_back(check_abs("inn22(3, q0^2=0.9) closed form",
                                 fixedThreshold(lookup_construction("inn22", 3, std::sqrt(0.9),
                                                                    std::nullopt)),
                                 asymmetric_threshold(3, std::sqrt(0.9)), 1e-6));
        rows.push_back(check_abs("inn22(3, q0^2=0.999) -> 1/3",
                                 fixedThreshold(lookup_construction("inn22", 3, std::sqrt(0.999),
                                                                    std::nullopt)),
                                 1.0 / 3.0, 2e-3));
        rows.push_back(check_abs("ch-eberhard-maxent",
                                 fixedThreshold(lookup_construction("ch-eberhard-maxent")),
                                 2.0 / (1.0 + std::sqrt(2.0)), 1e-3));
        rows.push_back(check_abs("ch-eberhard-partial(1e-3) -> 2/3",
                                 fixedThreshold(lookup_construction("ch-eberhard-partial",
                                                                    std::nullopt, std::nullopt,
                                                                    1e-3)),
                                 2.0 / 3.0, 1e-2));
        rows.push_back(check_abs("i4422-maxent",
                                 fixedThreshold(lookup_construction("i4422-maxent")), 0.7698,
                                 1e-3));
        rows.push_back(check_abs("i4422-smalleps(1e-3) -> 0.618",
                                 fixedThreshold(lookup_construction("i4422-smalleps", std::nullopt,
                                                                    std::nullopt, 1e-3)),
                                 (std::sqrt(5.0) - 1.0) / 2.0, 5e-3));
    } else if (target == "fig1") {
        if (!cfg.contains("restarts")) oc.restarts = 12;
        const FamilySpec fam{FamilySpec::Kind::AsymmetricInn22, 3};
        const std::vector<double> grid = cfg.contains("grid")
                                             ? cfg["grid"].get<std::vector<double>>()
                                             : parse_grid("0.05:0.55:11");
        ThresholdOptions opts;
        opts.bracketTol = cfg.value("bracket_tol", 1e-4);
        for (double p : {0.0, 0.005, 0.01}) {
            const auto points = sweep_epsilon(fam, p, grid, oc, true, opts);
            write_text_file(sink.map("fig1-p" + format_fixed(p, 3) + ".csv"),
                            sweep_epsilon_csv(points));
            if (p == 0.0) {
                const double q0min = optimal_epsilon(3, grid.front());
                rows.push_back(
                    check_range("fig1 p=0 endpoint -> 1/3", points.front().eta.value_or(2.0),
                                1.0 / 3.0 - 1e-3, asymmetric_threshold(3, q0min) + 2e-3));
                bool monotone = true;
                for (size_t i = 1; i < points.size(); ++i) {
                    if (points[i].eta.value_or(2.0) < points[i - 1].eta.value_or(2.0) - 2e-3) {
                        monotone = false;
                    }
                }
                rows.push_back({"fig1 p=0 monotone in epsilon", monotone ? 1.0 : 0.0, "1", monotone});
            }
            if (p == 0.01) {
                // the plateau ends near eps = 0.09 at this noise level, so
                // probe two dedicated points inside it
                const auto plateau = sweep_epsilon(fam, p, std::vector<double>{0.03, 0.06}, oc,
                                                   true, opts);
                const double first = plateau[0].eta.value_or(2.0);
                const double second = plateau[1].eta.value_or(2.0);
                rows.push_back(check_range("fig1 p=0.01 plateau level", first, 0.60, 0.72));
                rows.push_back(check_range("fig1 p=0.01 plateau flatness", std::abs(first - second),
                                           0.0, 2e-2));
            }
        }
        // the epsilon = 0 point is reported separately from a qubit run
        const FamilySpec qubitFam{FamilySpec::Kind::AsymmetricInn22, 3};
        const SchmidtState maxentQubit{3, {1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2, 0.0},
                                       0.0};
        const auto eps0 = threshold_efficiency(qubitFam.family(), maxentQubit, 3, oc, {}, opts);
        rows.push_back(check_abs("fig1 epsilon=0 (maxent qubits) -> 2/3",
                                 eps0 ? eps0->eta : 2.0, 2.0 / 3.0, 1e-2));
    } else if (target == "fig2") {
        if (!cfg.contains("restarts")) oc.restarts = 16;
        const FamilySpec fam{FamilySpec::Kind::SymmetricI4422, 4};
        const std::vector<double> grid = cfg.contains("grid")
                                             ? cfg["grid"].get<std::vector<double>>()
                                             : std::vector<double>{0.001, 0.02, 0.05, 0.1, 0.16,
                                                                   0.24, 0.32, 0.41, 0.5};
        ThresholdOptions opts;
        opts.bracketTol = cfg.value("bracket_tol", 1e-4);
        for (double p : {0.0, 0.005, 0.01}) {
            const auto points = sweep_epsilon(fam, p, grid, oc, true, opts);
            write_text_file(sink.map("fig2-p" + format_fixed(p, 3) + ".csv"),
                            sweep_epsilon_csv(points));
            if (p == 0.0) {
                rows.push_back(check_abs("fig2 p=0 maxent -> 0.7698", points.back().eta.value_or(2.0),
                                         0.7698, 1e-3));
                rows.push_back(check_range("fig2 p=0 small-eps <= 0.625",
                                           points.front().eta.value_or(2.0),
                                           (std::sqrt(5.0) - 1.0) / 2.0 - 1e-3, 0.625));
                bool monotone = true;
                for (size_t i = 1; i < points.size(); ++i) {
                    if (points[i].eta.value_or(2.0) < points[i - 1].eta.value_or(2.0) - 2e-3) {
                        monotone = false;
                    }
                }
                rows.push_back({"fig2 p=0 monotone in epsilon", monotone ? 1.0 : 0.0, "1", monotone});
            }
        }
    } else if (target == "fig3") {
        if (!cfg.contains("restarts")) oc.restarts = 16;
        const std::vector<double> grid = cfg.contains("grid")
                                             ? cfg["grid"].get<std::vector<double>>()
                                             : std::vector<double>{0.0, 0.01, 0.02};
        ThresholdOptions opts;
        opts.bracketTol = cfg.value("bracket_tol", 2e-4);
        const std::vector<FamilySpec> fams{{FamilySpec::Kind::Ch, 2},
                                           {FamilySpec::Kind::AsymmetricInn22, 3},
                                           {FamilySpec::Kind::SymmetricI4422, 4}};
        const auto points = sweep_noise(fams, grid, oc, opts);
        write_text_file(sink.map("fig3.csv"), sweep_noise_csv(points));

        auto find = [&](const std::string& family, double p) -> std::optional<double> {
            for (const auto& pt : points) {
                if (pt.family == family && pt.p == p) return pt.eta;
            }
            return std::nullopt;
        };
        rows.push_back(check_abs("fig3 p=0 ch -> 2/3 (Eberhard)", find("ch", 0.0).value_or(2.0),
                                 2.0 / 3.0, 2e-3));
        rows.push_back(check_abs("fig3 p=0 i4422 -> 0.618", find("i4422", 0.0).value_or(2.0),
                                 (std::sqrt(5.0) - 1.0) / 2.0, 5e-3));
        if (std::find(grid.begin(), grid.end(), 0.01) != grid.end()) {
            const double gap =
                find("ch", 0.01).value_or(2.0) - find("i4422", 0.01).value_or(2.0);
            rows.push_back(check_range("fig3 p=0.01 gap ch - i4422", gap, 0.04, 0.09));
        }
    } else {
        throw std::invalid_argument("unknown reproduce target: " + target +
                                    " (expected fig1, fig2, fig3 or thresholds)");
    }

    print_summary(rows);
    write_text_file(sink.map(summaryName), summary_csv(rows));
    const bool allPass =
        std::all_of(rows.begin(), rows.end(), [](const RegressionRow& r) { return r.pass; });
    return allPass ? kExitOk : kExitRegressionMiss;
}

int dispatch(const std::string& command, const json& cfg, OutputSink& sink) {
    if (command == "bound") return run_bound(cfg, sink);
    if (command == "eval") return run_eval(cfg, sink);
    if (command == "threshold") return run_threshold(cfg, sink);
    if (command == "witness") return run_witness(cfg, sink);
    if (command == "sweep-epsilon") return run_sweep_epsilon(cfg, sink);
    if (command == "sweep-noise") return run_sweep_noise(cfg, sink);
    if (command == "reproduce") return run_reproduce(cfg, sink);
    throw std::invalid_argument("unknown command in manifest: " + command);
}

void write_manifest(const std::string& path, const std::string& command, const json& cfg,
                    const OutputSink& sink, double durationMs) {
    json manifest{{"command", command},
                  {"config", cfg},
                  {"seed", cfg.value("seed", uint64_t{1})},
                  {"version", kVersion},
                  {"outputs", sink.written},
                  {"duration_ms", durationMs}};
    save_json_file(path, manifest);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"detection-loophole Bell test toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string manifestPath;
    json cfg;
    std::string command;

    // bound ------------------------------------------------------------
    auto* bound = app.add_subcommand("bound", "local bound of a Bell expression by enumeration");
    std::string boundExpr, boundFile, boundOut;
    int boundN = 3;
    bound->add_option("expr", boundExpr, "expression name: inn22, ch or i4422");
    bound->add_option("--n", boundN, "setting count for inn22");
    bound->add_option("--file", boundFile, "load the expression from a JSON file");
    bound->add_option("--out", boundOut, "write expression + bound + strategy as JSON");
    bound->add_option("--manifest", manifestPath, "manifest path");
    bound->callback([&] {
        command = "bound";
        cfg = json{{"expr", boundExpr}, {"n", boundN}, {"file", boundFile}, {"out", boundOut}};
    });

    // eval --------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "evaluate a Bell expression on a correlation table");
    std::string evalExpr = "inn22", evalExprFile, evalTable, evalConstruction, evalOut;
    int evalN = 3;
    double evalEta = 0.0, evalEtab = 0.0, evalP = 0.0, evalQ0sq = -1.0, evalEps = -1.0;
    eval->add_option("--expr", evalExpr, "expression name: inn22, ch or i4422");
    eval->add_option("--n", evalN, "setting count for inn22");
    eval->add_option("--expr-file", evalExprFile, "expression JSON file");
    eval->add_option("--table-file", evalTable, "correlation table JSON file");
    eval->add_option("--construction", evalConstruction,
                     "named construction, e.g. inn22(3,0.9487) or i4422-maxent");
    eval->add_option("--q0sq", evalQ0sq, "q0^2 for inn22 constructions");
    eval->add_option("--epsilon", evalEps, "state parameter epsilon");
    eval->add_option("--p", evalP, "white-noise weight");
    eval->add_option("--eta", evalEta, "symmetric detection efficiency");
    eval->add_option("--etab", evalEtab, "asymmetric detection efficiency (Bob)");
    eval->add_option("--out", evalOut, "write the value as JSON");
    eval->add_option("--manifest", manifestPath, "manifest path");
    eval->callback([&] {
        command = "eval";
        cfg = json{{"expr", evalExpr},   {"n", evalN},     {"expr_file", evalExprFile},
                   {"eta", evalEta},     {"etab", evalEtab}, {"p", evalP},
                   {"out", evalOut}};
        if (!evalConstruction.empty()) cfg["construction"] = evalConstruction;
        if (!evalTable.empty()) cfg["table_file"] = evalTable;
        if (evalQ0sq >= 0.0) cfg["q0sq"] = evalQ0sq;
        if (evalEps >= 0.0) cfg["epsilon"] = evalEps;
    });

    // threshold ----------------------------------------------------------
    auto* thr = app.add_subcommand("threshold", "threshold detection efficiency of a family");
    std::string thrFamily, thrOut = "detloop-threshold.json";
    int thrN = 3, thrRestarts = -1, thrThreads = 0;
    double thrEps = -1.0, thrQ0sq = -1.0, thrP = 0.0, thrBracket = -1.0;
    uint64_t thrSeed = 1;
    bool thrClosed = false, thrFreeState = false, thrNoSeeds = false;
    thr->add_option("family", thrFamily, "family: ch, inn22 or i4422")->required();
    thr->add_option("--n", thrN, "setting count / dimension for inn22");
    thr->add_option("--epsilon", thrEps, "state parameter epsilon");
    thr->add_option("--q0sq", thrQ0sq, "q0^2 (inn22: implies the optimal epsilon)");
    thr->add_option("--p", thrP, "white-noise weight");
    thr->add_option("--seed", thrSeed, "optimizer seed");
    thr->add_option("--restarts", thrRestarts, "random restarts");
    thr->add_option("--threads", thrThreads, "worker threads (0 = auto)");
    thr->add_option("--bracket-tol", thrBracket, "bisection bracket width");
    thr->add_flag("--closed-form", thrClosed, "bisect the fixed closed-form construction");
    thr->add_flag("--free-state", thrFreeState, "optimize the Schmidt coefficients too");
    thr->add_flag("--no-construction-seeds", thrNoSeeds, "random restarts only");
    thr->add_option("--out", thrOut, "witness JSON path");
    thr->add_option("--manifest", manifestPath, "manifest path");
    thr->callback([&] {
        command = "threshold";
        cfg = json{{"family", thrFamily}, {"n", thrN},       {"p", thrP},
                   {"seed", thrSeed},     {"out", thrOut},   {"closed_form", thrClosed},
                   {"free_state", thrFreeState},             {"threads", thrThreads},
                   {"construction_seeds", !thrNoSeeds}};
        if (thrEps >= 0.0) cfg["epsilon"] = thrEps;
        if (thrQ0sq >= 0.0) cfg["q0sq"] = thrQ0sq;
        if (thrRestarts > 0) cfg["restarts"] = thrRestarts;
        if (thrBracket > 0.0) cfg["bracket_tol"] = thrBracket;
    });

    // witness -------------------------------------------------------------
    auto* wit = app.add_subcommand("witness", "dimension-witness check for I3322(etaB)");
    double witEtab = 0.428, witQ0sq = -1.0;
    int witRestarts = -1, witThreads = 0;
    uint64_t witSeed = 1;
    std::string witOut;
    wit->add_option("--etab", witEtab, "asymmetric efficiency to test")->required();
    wit->add_option("--restarts", witRestarts, "qubit-search restarts (default 1000)");
    wit->add_option("--seed", witSeed, "optimizer seed");
    wit->add_option("--threads", witThreads, "worker threads (0 = auto)");
    wit->add_option("--q0sq", witQ0sq, "q0^2 of the qutrit construction");
    wit->add_option("--out", witOut, "write the verdict as JSON");
    wit->add_option("--manifest", manifestPath, "manifest path");
    wit->callback([&] {
        command = "witness";
        cfg = json{{"etab", witEtab}, {"seed", witSeed}, {"threads", witThreads}, {"out", witOut}};
        if (witRestarts > 0) cfg["restarts"] = witRestarts;
        if (witQ0sq > 0.0) cfg["q0sq"] = witQ0sq;
    });

    // sweep ----------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "threshold sweeps over epsilon or noise");
    sweep->require_subcommand(1);

    auto* sweepEps = sweep->add_subcommand("epsilon", "threshold vs entanglement at fixed noise");
    std::string seFamily = "inn22", seGrid = "0.05:0.55:11", seOut = "sweep-epsilon.csv";
    std::string seFormat = "csv";
    int seN = 3, seRestarts = 12, seThreads = 0;
    double seP = 0.0, seBracket = 1e-4;
    uint64_t seSeed = 1;
    bool seNoWarm = false, seNoSeeds = false;
    sweepEps->add_option("--family", seFamily, "family: ch, inn22 or i4422");
    sweepEps->add_option("--n", seN, "setting count for inn22");
    sweepEps->add_option("--p", seP, "white-noise weight");
    sweepEps->add_option("--grid", seGrid, "epsilon grid start:stop:count or comma list");
    sweepEps->add_option("--seed", seSeed, "optimizer seed");
    sweepEps->add_option("--restarts", seRestarts, "random restarts per probe");
    sweepEps->add_option("--threads", seThreads, "worker threads (0 = auto)");
    sweepEps->add_option("--bracket-tol", seBracket, "bisection bracket width");
    sweepEps->add_flag("--no-warm-start", seNoWarm, "independent grid points");
    sweepEps->add_flag("--no-construction-seeds", seNoSeeds, "random restarts only");
    sweepEps->add_option("--out", seOut, "CSV/JSON output path");
    sweepEps->add_option("--format", seFormat, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sweepEps->add_option("--manifest", manifestPath, "manifest path");
    sweepEps->callback([&] {
        command = "sweep-epsilon";
        cfg = json{{"family", seFamily},      {"n", seN},
                   {"p", seP},                {"grid", parse_grid(seGrid)},
                   {"seed", seSeed},          {"restarts", seRestarts},
                   {"threads", seThreads},    {"bracket_tol", seBracket},
                   {"warm_start", !seNoWarm}, {"construction_seeds", !seNoSeeds},
                   {"out", seOut},            {"format", seFormat}};
    });

    auto* sweepNoise = sweep->add_subcommand("noise", "minimal threshold vs background noise");
    std::string snFamilies = "ch,i4422", snGrid = "0:0.02:3", snOut = "sweep-noise.csv";
    int snN = 3, snRestarts = 16, snThreads = 0;
    double snBracket = 2e-4;
    uint64_t snSeed = 1;
    sweepNoise->add_option("--families", snFamilies, "comma list from: ch, inn22, i4422");
    sweepNoise->add_option("--n", snN, "setting count for inn22");
    sweepNoise->add_option("--grid", snGrid, "noise grid start:stop:count or comma list");
    sweepNoise->add_option("--seed", snSeed, "optimizer seed");
    sweepNoise->add_option("--restarts", snRestarts, "random restarts per probe");
    sweepNoise->add_option("--threads", snThreads, "worker threads (0 = auto)");
    sweepNoise->add_option("--bracket-tol", snBracket, "bisection bracket width");
    sweepNoise->add_option("--out", snOut, "CSV output path");
    sweepNoise->add_option("--manifest", manifestPath, "manifest path");
    sweepNoise->callback([&] {
        command = "sweep-noise";
        std::vector<std::string> fams;
        std::stringstream ss(snFamilies);
        std::string item;
        while (std::getline(ss, item, ',')) fams.push_back(item);
        cfg = json{{"families", fams},   {"n", snN},
                   {"grid", parse_grid(snGrid)}, {"seed", snSeed},
                   {"restarts", snRestarts},     {"threads", snThreads},
                   {"bracket_tol", snBracket},   {"out", snOut}};
    });

    // reproduce --------------------------------------------------------------
    auto* rep = app.add_subcommand("reproduce", "regenerate a named data set with pass/fail checks");
    std::string repTarget, repGrid;
    int repRestarts = -1, repThreads = 0;
    uint64_t repSeed = 7;
    rep->add_option("target", repTarget, "fig1, fig2, fig3 or thresholds")->required();
    rep->add_option("--seed", repSeed, "optimizer seed");
    rep->add_option("--restarts", repRestarts, "override the per-target restart default");
    rep->add_option("--threads", repThreads, "worker threads (0 = auto)");
    rep->add_option("--grid", repGrid, "override the sweep grid");
    rep->add_option("--manifest", manifestPath, "manifest path");
    rep->callback([&] {
        command = "reproduce";
        cfg = json{{"target", repTarget}, {"seed", repSeed}, {"threads", repThreads}};
        if (repRestarts > 0) cfg["restarts"] = repRestarts;
        if (!repGrid.empty()) cfg["grid"] = parse_grid(repGrid);
    });

    // replay -------------------------------------------------------------------
    auto* rel = app.add_subcommand("replay", "re-run a recorded manifest");
    std::string relManifest, relOutDir;
    rel->add_option("manifest", relManifest, "manifest JSON path")->required();
    rel->add_option("--out-dir", relOutDir, "redirect outputs into this directory");
    rel->callback([&] { command = "replay"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        OutputSink sink;
        if (command == "replay") {
            const json manifest = load_json_file(relManifest);
            if (!relOutDir.empty()) sink.redirectDir = relOutDir;
            return dispatch(manifest.at("command").get<std::string>(), manifest.at("config"), sink);
        }
        const auto start = std::chrono::steady_clock::now();
        const int code = dispatch(command, cfg, sink);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        if (manifestPath.empty()) {
            manifestPath = sink.written.empty() ? "detloop-manifest.json"
                                                : sink.written.front() + ".manifest.json";
        }
        write_manifest(manifestPath, command, cfg, sink, ms);
        return code;
    } catch (const ScenarioTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitResource;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
