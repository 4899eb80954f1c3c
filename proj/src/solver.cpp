#include "detloop/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "detloop/hypersphere.hpp"
#include "detloop/nelder_mead.hpp"

namespace detloop {

namespace {

struct ProblemLayout {
    int dim = 0;
    int nA = 0;
    int nB = 0;
    bool optimizeState = false;

    int anglesPerVector() const { return dim - 1; }
    int stateParams() const { return optimizeState ? dim : 0; }
    int aOffset() const { return stateParams(); }
    int bOffset() const { return stateParams() + nA * anglesPerVector(); }
    int total() const { return stateParams() + (nA + nB) * anglesPerVector(); }
};

// Objective over simplex coordinates. The table arithmetic mirrors
// correlation_table/evaluate exactly, so the winner's re-evaluation through
// the public path reproduces the reported value bit-for-bit.
class Objective {
public:
    Objective(const BellExpression& expr, const SchmidtState& base, const ProblemLayout& layout)
        : expr_(&expr), layout_(layout), noise_(base.noise), lambda_(base.lambda),
          vecA_(layout.nA, std::vector<double>(layout.dim)),
          vecB_(layout.nB, std::vector<double>(layout.dim)),
          margA_(layout.nA), margB_(layout.nB),
          joint_(static_cast<size_t>(layout.nA) * layout.nB) {}

    double negValue(std::span<const double> params) { return -value(params); }

    double value(std::span<const double> params) {
        decode(params);
        return tableValue();
    }

    void decode(std::span<const double> params) {
        const int d = layout_.dim;
        if (layout_.optimizeState) {
            double norm2 = 0.0;
            for (int k = 0; k < d; ++k) norm2 += params[k] * params[k];
            if (norm2 == 0.0) {
                lambda_.assign(d, 1.0 / std::sqrt(static_cast<double>(d)));
            } else {
                const double inv = 1.0 / std::sqrt(norm2);
                for (int k = 0; k < d; ++k) lambda_[k] = std::abs(params[k]) * inv;
            }
        }
        const int apv = layout_.anglesPerVector();
        for (int x = 0; x < layout_.nA; ++x) {
            unit_vector_from_angles(params.subspan(layout_.aOffset() + x * apv, apv), vecA_[x]);
        }
        for (int y = 0; y < layout_.nB; ++y) {
            unit_vector_from_angles(params.subspan(layout_.bOffset() + y * apv, apv), vecB_[y]);
        }
    }

    const std::vector<double>& lambda() const { return lambda_; }
    const std::vector<std::vector<double>>& vectorsA() const { return vecA_; }
    const std::vector<std::vector<double>>& vectorsB() const { return vecB_; }

private:
    double tableValue() {
        const int d = layout_.dim;
        const double p = noise_;
        for (int x = 0; x < layout_.nA; ++x) {
            double m = 0.0;
            for (int k = 0; k < d; ++k) {
                const double a = vecA_[x][k];
                m += lambda_[k] * lambda_[k] * a * a;
            }
            margA_[x] = (1.0 - p) * m + p / d;
        }
        for (int y = 0; y < layout_.nB; ++y) {
            double m = 0.0;
            for (int k = 0; k < d; ++k) {
                const double b = vecB_[y][k];
                m += lambda_[k] * lambda_[k] * b * b;
            }
            margB_[y] = (1.0 - p) * m + p / d;
        }
        for (int x = 0; x < layout_.nA; ++x) {
            for (int y = 0; y < layout_.nB; ++y) {
                double amp = 0.0;
                for (int k = 0; k < d; ++k) {
                    amp += lambda_[k] * vecA_[x][k] * vecB_[y][k];
                }
                joint_[static_cast<size_t>(x) * layout_.nB + y] =
                    (1.0 - p) * amp * amp + p / (static_cast<double>(d) * d);
            }
        }
        double v = expr_->constant;
        for (size_t i = 0; i < joint_.size(); ++i) v += expr_->cJoint[i] * joint_[i];
        for (int x = 0; x < layout_.nA; ++x) v += expr_->cA[x] * margA_[x];
        for (int y = 0; y < layout_.nB; ++y) v += expr_->cB[y] * margB_[y];
        return v;
    }

    const BellExpression* expr_;
    ProblemLayout layout_;
    double noise_;
    std::vector<double> lambda_;
    std::vector<std::vector<double>> vecA_, vecB_;
    std::vector<double> margA_, margB_, joint_;
};

std::vector<double> encode_seed(const SettingsPair& seed, const SchmidtState& base,
                                const ProblemLayout& layout) {
    if (seed.a.dim != layout.dim || seed.b.dim != layout.dim || seed.a.count() != layout.nA ||
        seed.b.count() != layout.nB) {
        throw std::invalid_argument("seed settings do not match the optimization scenario");
    }
    std::vector<double> params(layout.total());
    if (layout.optimizeState) {
        for (int k = 0; k < layout.dim; ++k) params[k] = base.lambda[k];
    }
    const int apv = layout.anglesPerVector();
    for (int x = 0; x < layout.nA; ++x) {
        const auto angles = angles_from_unit_vector(seed.a.vectors[x]);
        std::copy(angles.begin(), angles.end(), params.begin() + layout.aOffset() + x * apv);
    }
    for (int y = 0; y < layout.nB; ++y) {
        const auto angles = angles_from_unit_vector(seed.b.vectors[y]);
        std::copy(angles.begin(), angles.end(), params.begin() + layout.bOffset() + y * apv);
    }
    return params;
}

std::vector<double> random_start(uint64_t seed, int restartIndex, const ProblemLayout& layout) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(restartIndex)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::vector<double> params(layout.total());
    int i = 0;
    for (; i < layout.stateParams(); ++i) params[i] = weight(rng);
    for (; i < layout.total(); ++i) params[i] = angle(rng);
    return params;
}

OptimizeResult run_optimization(const BellExpression& expr, const SchmidtState& base,
                                const ProblemLayout& layout, const OptimizerConfig& cfg,
                                std::span<const SettingsPair> seeds) {
    if (cfg.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    if (!(cfg.xTolerance > 0.0) || !(cfg.fTolerance > 0.0)) {
        throw std::invalid_argument("tolerances must be positive");
    }
    if (static_cast<int>(base.lambda.size()) != layout.dim) {
        throw std::invalid_argument("state dimension does not match the optimization dimension");
    }

    std::vector<std::vector<double>> starts;
    starts.reserve(seeds.size() + cfg.restarts);
    for (const SettingsPair& s : seeds) starts.push_back(encode_seed(s, base, layout));
    for (int r = 0; r < cfg.restarts; ++r) starts.push_back(random_start(cfg.seed, r, layout));

    std::vector<double> bestValues(starts.size(), -std::numeric_limits<double>::infinity());
    std::vector<std::vector<double>> bestParams(starts.size());

    std::atomic<size_t> nextStart{0};
    auto worker = [&]() {
        Objective obj(expr, base, layout);
        std::function<double(std::span<const double>)> f = [&obj](std::span<const double> p) {
            return obj.negValue(p);
        };
        for (;;) {
            const size_t i = nextStart.fetch_add(1);
            if (i >= starts.size()) break;
            auto coarse = nelder_mead(f, starts[i], 0.4, cfg.maxIterations, cfg.xTolerance,
                                      cfg.fTolerance);
            auto fine = nelder_mead(f, coarse.x, 0.04, cfg.maxIterations, cfg.xTolerance,
                                    cfg.fTolerance);
            bestValues[i] = -fine.value;
            bestParams[i] = std::move(fine.x);
        }
    };

    int threadCount = cfg.threads > 0 ? cfg.threads
                                      : static_cast<int>(std::thread::hardware_concurrency());
    threadCount = std::clamp<int>(threadCount, 1, static_cast<int>(starts.size()));
    if (threadCount == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threadCount);
        for (int t = 0; t < threadCount; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    size_t winner = 0;
    for (size_t i = 1; i < starts.size(); ++i) {
        if (bestValues[i] > bestValues[winner]) winner = i;
    }

    Objective decoder(expr, base, layout);
    decoder.decode(bestParams[winner]);
    OptimizeResult out;
    out.settingsA = MeasurementSettings{layout.dim, decoder.vectorsA()};
    out.settingsB = MeasurementSettings{layout.dim, decoder.vectorsB()};
    out.state = SchmidtState{layout.dim, decoder.lambda(), base.noise};
    out.startIndex = static_cast<int>(winner);
    // Re-evaluate through the public path; identical arithmetic by design.
    out.value = evaluate(expr, correlation_table(out.state, out.settingsA, out.settingsB));
    return out;
}

}  // namespace

OptimizeResult maximize_over_settings(const BellExpression& expr, const SchmidtState& state,
                                      int dim, const OptimizerConfig& cfg,
                                      std::span<const SettingsPair> seeds) {
    if (dim < 2) throw std::invalid_argument("dim must be >= 2");
    ProblemLayout layout{dim, expr.nA, expr.nB, false};
    return run_optimization(expr, state, layout, cfg, seeds);
}

OptimizeResult maximize_over_state_and_settings(const BellExpression& expr, int dim,
                                                const OptimizerConfig& cfg, double noise,
                                                std::span<const SettingsPair> seeds) {
    if (dim < 2) throw std::invalid_argument("dim must be >= 2");
    ProblemLayout layout{dim, expr.nA, expr.nB, true};
    SchmidtState base;
    base.dim = dim;
    base.lambda.assign(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    base.noise = noise;
    return run_optimization(expr, base, layout, cfg, seeds);
}

namespace {

void check_family_monotone(const ExpressionFamily& family, const CorrelationTable& table,
                           double etaLo, double etaHi) {
    if (evaluate(family(etaLo), table) > evaluate(family(etaHi), table) + 1e-12) {
        throw std::logic_error("expression family is not monotone in eta on the witness table");
    }
}

}  // namespace

std::optional<ThresholdResult> threshold_efficiency(const ExpressionFamily& family,
                                                    const SchmidtState& state, int dim,
                                                    const OptimizerConfig& cfg,
                                                    std::span<const SettingsPair> seeds,
                                                    const ThresholdOptions& opts) {
    auto solve = [&](double eta, std::span<const SettingsPair> allSeeds) {
        const BellExpression expr = family(eta);
        if (cfg.optimizeState) {
            return maximize_over_state_and_settings(expr, dim, cfg, state.noise, allSeeds);
        }
        return maximize_over_settings(expr, state, dim, cfg, allSeeds);
    };

    std::vector<SettingsPair> warm(seeds.begin(), seeds.end());
    int steps = 1;
    OptimizeResult incumbent = solve(1.0, warm);
    if (!(incumbent.value > opts.violationTol)) return std::nullopt;
    double hi = 1.0;
    warm.insert(warm.begin(), SettingsPair{incumbent.settingsA, incumbent.settingsB});

    double lo = std::min(opts.etaLo, hi * 0.5);
    for (;;) {
        OptimizeResult atLo = solve(lo, warm);
        ++steps;
        if (!(atLo.value > opts.violationTol)) break;
        hi = lo;
        incumbent = atLo;
        warm[0] = SettingsPair{incumbent.settingsA, incumbent.settingsB};
        lo *= 0.5;
        if (lo < 1e-6) {
            throw std::logic_error("threshold_efficiency: violation persists at eta -> 0");
        }
    }

    while (hi - lo > opts.bracketTol) {
        const double mid = 0.5 * (hi + lo);
        OptimizeResult atMid = solve(mid, warm);
        ++steps;
        if (atMid.value > opts.violationTol) {
            hi = mid;
            incumbent = atMid;
            warm[0] = SettingsPair{incumbent.settingsA, incumbent.settingsB};
        } else {
            lo = mid;
        }
    }

    const CorrelationTable witness =
        correlation_table(incumbent.state, incumbent.settingsA, incumbent.settingsB);
    check_family_monotone(family, witness, std::max(lo, 1e-6), hi);

    ThresholdResult out;
    out.eta = 0.5 * (hi + lo);
    out.valueAtEta = incumbent.value;
    out.settingsA = std::move(incumbent.settingsA);
    out.settingsB = std::move(incumbent.settingsB);
    out.state = std::move(incumbent.state);
    out.iterations = steps;
    return out;
}

std::optional<ThresholdResult> threshold_for_construction(const ExpressionFamily& family,
                                                          const SchmidtState& state,
                                                          const MeasurementSettings& a,
                                                          const MeasurementSettings& b,
                                                          const ThresholdOptions& opts) {
    const CorrelationTable table = correlation_table(state, a, b);
    auto value = [&](double eta) { return evaluate(family(eta), table); };

    int steps = 1;
    double hi = 1.0;
    double hiValue = value(hi);
    if (!(hiValue > opts.violationTol)) return std::nullopt;

    double lo = std::min(opts.etaLo, 0.5);
    for (;;) {
        ++steps;
        if (!(value(lo) > opts.violationTol)) break;
        hi = lo;
        hiValue = value(hi);
        lo *= 0.5;
        if (lo < 1e-9) {
            throw std::logic_error("threshold_for_construction: violation persists at eta -> 0");
        }
    }
    check_family_monotone(family, table, lo, hi);

    while (hi - lo > opts.bracketTol) {
        const double mid = 0.5 * (hi + lo);
        const double midValue = value(mid);
        ++steps;
        if (midValue > opts.violationTol) {
            hi = mid;
            hiValue = midValue;
        } else {
            lo = mid;
        }
    }

    ThresholdResult out;
    out.eta = 0.5 * (hi + lo);
    out.valueAtEta = hiValue;
    out.settingsA = a;
    out.settingsB = b;
    out.state = state;
    out.iterations = steps;
    return out;
}

int FamilySpec::dim() const {
    switch (kind) {
        case Kind::Ch: return 2;
        case Kind::AsymmetricInn22: return n;
        case Kind::SymmetricI4422: return 4;
    }
    return 2;
}

int FamilySpec::settingCount() const {
    switch (kind) {
        case Kind::Ch: return 2;
        case Kind::AsymmetricInn22: return n;
        case Kind::SymmetricI4422: return 4;
    }
    return 2;
}

DetectionScheme FamilySpec::scheme(double eta) const {
    return kind == Kind::AsymmetricInn22 ? DetectionScheme::asymmetric(eta)
                                         : DetectionScheme::symmetric(eta);
}

BellExpression FamilySpec::raw() const {
    switch (kind) {
        case Kind::Ch: return build_ch();
        case Kind::AsymmetricInn22: return build_inn22(n);
        case Kind::SymmetricI4422: return build_i4422();
    }
    return build_ch();
}

ExpressionFamily FamilySpec::family() const {
    return [spec = *this, base = raw()](double eta) {
        return modify_for_detection(base, spec.scheme(eta));
    };
}

std::string FamilySpec::name() const {
    switch (kind) {
        case Kind::Ch: return "ch";
        case Kind::AsymmetricInn22: return "inn22(" + std::to_string(n) + ")";
        case Kind::SymmetricI4422: return "i4422";
    }
    return "ch";
}

std::vector<SettingsPair> FamilySpec::constructionSeeds(double epsilon) const {
    std::vector<SettingsPair> seeds;
    switch (kind) {
        case Kind::Ch: {
            auto [a1, b1] = ch_settings(std::cos(std::numbers::pi / 16.0),
                                        std::cos(3.0 * std::numbers::pi / 16.0));
            seeds.push_back({std::move(a1), std::move(b1)});
            const double eps = std::clamp(epsilon, 0.0, 1.0);
            auto [a2, b2] = ch_settings(1.0, std::sqrt(1.0 - eps));
            seeds.push_back({std::move(a2), std::move(b2)});
            break;
        }
        case Kind::AsymmetricInn22: {
            // optimal_epsilon is an involution, so it doubles as epsilon -> q0.
            const double q0 = optimal_epsilon(n, std::clamp(epsilon, 0.0, 1.0));
            auto [a, b] = asymmetric_settings(n, q0);
            seeds.push_back({std::move(a), std::move(b)});
            break;
        }
        case Kind::SymmetricI4422: {
            auto [a1, b1] = ququart_settings(ququart_maxent_params());
            seeds.push_back({std::move(a1), std::move(b1)});
            auto [a2, b2] =
                ququart_settings(ququart_small_epsilon_params(std::clamp(epsilon, 0.0, 1.0)));
            seeds.push_back({std::move(a2), std::move(b2)});
            break;
        }
    }
    return seeds;
}

std::vector<SweepPoint> sweep_epsilon(const FamilySpec& fam, double noise,
                                      std::span<const double> epsilonGrid,
                                      const OptimizerConfig& cfg, bool warmStart,
                                      const ThresholdOptions& opts) {
    for (double eps : epsilonGrid) {
        // epsilon = 0 degenerates to one dimension less; report it separately
        // from a lower-dimensional run instead
        if (!(eps > 0.0) || eps > 1.0) {
            throw std::invalid_argument("epsilon grid values must lie in (0, 1]");
        }
    }
    if (noise < 0.0 || noise >= 1.0) throw std::invalid_argument("noise must lie in [0, 1)");
    std::vector<SweepPoint> out;
    out.reserve(epsilonGrid.size());
    std::vector<SettingsPair> warm;
    const ExpressionFamily family = fam.family();

    for (double eps : epsilonGrid) {
        const SchmidtState state = schmidt_from_epsilon(fam.dim(), eps, noise);
        std::vector<SettingsPair> seeds;
        if (warmStart) seeds = warm;
        if (cfg.seedWithConstructions) {
            for (auto& s : fam.constructionSeeds(eps)) seeds.push_back(std::move(s));
        }
        auto thr = threshold_efficiency(family, state, fam.dim(), cfg, seeds, opts);
        SweepPoint point;
        point.epsilon = eps;
        point.p = noise;
        if (thr) {
            point.eta = thr->eta;
            point.value = thr->valueAtEta;
            point.converged = true;
            warm.assign(1, SettingsPair{thr->settingsA, thr->settingsB});
        } else {
            auto best = maximize_over_settings(family(1.0), state, fam.dim(), cfg, seeds);
            point.value = best.value;
            point.converged = false;
        }
        out.push_back(std::move(point));
    }
    return out;
}

std::pair<double, std::optional<ThresholdResult>> min_threshold_over_epsilon(
    const FamilySpec& fam, double noise, const OptimizerConfig& cfg,
    const ThresholdOptions& opts) {
    std::vector<double> grid;
    switch (fam.kind) {
        case FamilySpec::Kind::Ch:
            grid = {0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.35, 0.55, 0.707};
            break;
        case FamilySpec::Kind::AsymmetricInn22:
            grid = {0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.35, 0.55};
            break;
        case FamilySpec::Kind::SymmetricI4422:
            grid = {0.001, 0.003, 0.01, 0.03, 0.07, 0.13, 0.2, 0.3, 0.4, 0.5};
            break;
    }

    std::vector<SettingsPair> warm;
    auto probe = [&](double eps) -> std::pair<double, std::optional<ThresholdResult>> {
        const SchmidtState state = schmidt_from_epsilon(fam.dim(), eps, noise);
        std::vector<SettingsPair> seeds = warm;
        if (cfg.seedWithConstructions) {
            for (auto& s : fam.constructionSeeds(eps)) seeds.push_back(std::move(s));
        }
        auto thr = threshold_efficiency(fam.family(), state, fam.dim(), cfg, seeds, opts);
        if (thr) warm.assign(1, SettingsPair{thr->settingsA, thr->settingsB});
        const double eta = thr ? thr->eta : std::numeric_limits<double>::infinity();
        return {eta, std::move(thr)};
    };

    std::vector<double> etas(grid.size());
    std::vector<std::optional<ThresholdResult>> results(grid.size());
    size_t bestIdx = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
        auto [eta, thr] = probe(grid[i]);
        etas[i] = eta;
        results[i] = std::move(thr);
        if (etas[i] < etas[bestIdx]) bestIdx = i;
    }
    if (!results[bestIdx]) return {grid[bestIdx], std::nullopt};

    // Golden-section refinement inside the bracketing neighbours.
    double a = grid[bestIdx > 0 ? bestIdx - 1 : 0];
    double b = grid[bestIdx + 1 < grid.size() ? bestIdx + 1 : bestIdx];
    double bestEps = grid[bestIdx];
    double bestEta = etas[bestIdx];
    std::optional<ThresholdResult> bestThr = results[bestIdx];
    if (b > a) {
        constexpr double invPhi = 0.6180339887498949;
        double x1 = b - invPhi * (b - a);
        double x2 = a + invPhi * (b - a);
        auto [f1, t1] = probe(x1);
        auto [f2, t2] = probe(x2);
        for (int it = 0; it < 12; ++it) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                t2 = std::move(t1);
                x1 = b - invPhi * (b - a);
                std::tie(f1, t1) = probe(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                t1 = std::move(t2);
                x2 = a + invPhi * (b - a);
                std::tie(f2, t2) = probe(x2);
            }
        }
        if (f1 < bestEta && t1) {
            bestEta = f1;
            bestEps = x1;
            bestThr = std::move(t1);
        }
        if (f2 < bestEta && t2) {
            bestEta = f2;
            bestEps = x2;
            bestThr = std::move(t2);
        }
    }
    return {bestEps, bestThr};
}

std::vector<NoisePoint> sweep_noise(std::span<const FamilySpec> families,
                                    std::span<const double> noiseGrid,
                                    const OptimizerConfig& cfg, const ThresholdOptions& opts) {
    for (double p : noiseGrid) {
        if (p < 0.0 || p > 0.05) {
            throw std::invalid_argument("noise grid values must lie in [0, 0.05]");
        }
    }
    std::vector<NoisePoint> out;
    for (const FamilySpec& fam : families) {
        for (double p : noiseGrid) {
            auto [eps, thr] = min_threshold_over_epsilon(fam, p, cfg, opts);
            NoisePoint point;
            point.p = p;
            point.family = fam.name();
            point.epsilon = eps;
            if (thr) {
                point.eta = thr->eta;
                point.value = thr->valueAtEta;
                point.converged = true;
            }
            out.push_back(std::move(point));
        }
    }
    return out;
}

}  // namespace detloop
