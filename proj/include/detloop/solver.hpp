#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "detloop/bell.hpp"
#include "detloop/constructions.hpp"
#include "detloop/quantum.hpp"

namespace detloop {

struct OptimizerConfig {
    int restarts = 64;        // random restarts; construction/warm seeds are extra
    int maxIterations = 4000; // simplex iterations per local-search round
    double xTolerance = 1e-9;
    double fTolerance = 1e-12;
    uint64_t seed = 1;
    bool seedWithConstructions = true;
    bool optimizeState = false;  // also vary lambda on the probability simplex
    int threads = 0;             // 0 = hardware concurrency
};

// Restart budget hint when the caller has no preference: 64 up to qutrits,
// 256 for four-dimensional searches. Witness-style no-violation checks want
// considerably more (>= 1000).
inline int default_restarts_for_dim(int dim) { return dim >= 4 ? 256 : 64; }

struct SettingsPair {
    MeasurementSettings a;
    MeasurementSettings b;
};

struct OptimizeResult {
    double value = 0.0;
    MeasurementSettings settingsA;
    MeasurementSettings settingsB;
    SchmidtState state;
    int startIndex = -1;  // which start won (seeds first, then random restarts)
};

// Maximizes evaluate(expr, correlation_table(state, A, B)) over unit vectors,
// parameterized by hyperspherical angles (dim-1 per vector). Deterministic
// given cfg; the reported value is re-evaluated through the public
// correlation_table/evaluate path on the returned settings. When
// cfg.seedWithConstructions is set, every entry of `seeds` is used as an
// extra start, so the result dominates each seed's value.
OptimizeResult maximize_over_settings(const BellExpression& expr, const SchmidtState& state,
                                      int dim, const OptimizerConfig& cfg,
                                      std::span<const SettingsPair> seeds = {});

// As above, but lambda is optimized as well. The simplex point is encoded as
// an unconstrained vector w with lambda[k] = |w[k]| / ||w||_2 (so that
// sum lambda^2 = 1); `noise` is held fixed.
OptimizeResult maximize_over_state_and_settings(const BellExpression& expr, int dim,
                                                const OptimizerConfig& cfg, double noise = 0.0,
                                                std::span<const SettingsPair> seeds = {});

// eta -> efficiency-modified Bell expression.
using ExpressionFamily = std::function<BellExpression(double)>;

struct ThresholdResult {
    double eta = 1.0;          // bracket midpoint
    double valueAtEta = 0.0;   // best value at the upper bracket edge
    MeasurementSettings settingsA;
    MeasurementSettings settingsB;
    SchmidtState state;
    int iterations = 0;        // bisection steps
};

struct ThresholdOptions {
    double bracketTol = 1e-4;
    double etaLo = 0.02;         // initial lower bracket, expanded down if violated
    double violationTol = 1e-9;  // best value above this counts as a violation
};

// Bisection on eta over [etaLo, 1] with an inner settings optimization at
// each probe; the best settings found so far are carried as a warm start.
// Returns nullopt when there is no violation at eta = 1. Throws
// std::logic_error if the family is not monotone in eta on the final table.
std::optional<ThresholdResult> threshold_efficiency(const ExpressionFamily& family,
                                                    const SchmidtState& state, int dim,
                                                    const OptimizerConfig& cfg,
                                                    std::span<const SettingsPair> seeds = {},
                                                    const ThresholdOptions& opts = {});

// Threshold of a fixed construction: plain bisection on
// eta -> evaluate(family(eta), correlation_table(state, a, b)).
std::optional<ThresholdResult> threshold_for_construction(const ExpressionFamily& family,
                                                          const SchmidtState& state,
                                                          const MeasurementSettings& a,
                                                          const MeasurementSettings& b,
                                                          const ThresholdOptions& opts = {});

// The three scheme-parameterized test families the sweeps range over.
struct FamilySpec {
    enum class Kind { Ch, AsymmetricInn22, SymmetricI4422 };

    Kind kind = Kind::Ch;
    int n = 3;  // setting count / local dimension of the asymmetric family

    int dim() const;
    int settingCount() const;
    DetectionScheme scheme(double eta) const;
    BellExpression raw() const;
    ExpressionFamily family() const;
    std::string name() const;
    // Closed-form constructions appropriate for a state of parameter epsilon.
    std::vector<SettingsPair> constructionSeeds(double epsilon) const;
};

struct SweepPoint {
    double epsilon = 0.0;
    double p = 0.0;
    std::optional<double> eta;  // absent when there is no violation at eta = 1
    double value = 0.0;         // value at threshold, or best value at eta = 1
    bool converged = false;
};

// Threshold efficiency along an epsilon grid at fixed noise. Settings found
// at one grid point warm-start the next (disable with warmStart = false).
std::vector<SweepPoint> sweep_epsilon(const FamilySpec& fam, double noise,
                                      std::span<const double> epsilonGrid,
                                      const OptimizerConfig& cfg, bool warmStart = true,
                                      const ThresholdOptions& opts = {});

struct NoisePoint {
    double p = 0.0;
    std::string family;
    std::optional<double> eta;
    double value = 0.0;
    bool converged = false;
    double epsilon = 0.0;  // minimizing epsilon
};

// For each noise level, minimizes the threshold over epsilon too (coarse grid
// plus golden-section refinement; inner threshold_efficiency per probe).
std::vector<NoisePoint> sweep_noise(std::span<const FamilySpec> families,
                                    std::span<const double> noiseGrid,
                                    const OptimizerConfig& cfg,
                                    const ThresholdOptions& opts = {});

// Single (family, p) entry of sweep_noise: returns the minimizing epsilon and
// its threshold outcome.
std::pair<double, std::optional<ThresholdResult>> min_threshold_over_epsilon(
    const FamilySpec& fam, double noise, const OptimizerConfig& cfg,
    const ThresholdOptions& opts = {});

}  // namespace detloop
