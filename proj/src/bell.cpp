#include "detloop/bell.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>

namespace detloop {

namespace {

void require_in_unit_interval(double eta) {
    if (!(eta > 0.0) || eta > 1.0) {
        throw std::invalid_argument("detection efficiency must lie in (0, 1]");
    }
}

void require_same_scenario(const BellExpression& expr, const CorrelationTable& table) {
    if (expr.nA != table.nA || expr.nB != table.nB) {
        throw std::invalid_argument("expression and table scenario sizes differ");
    }
}

// Strategy order used for tie-breaking: +1 sorts before -1, outA before outB.
bool strategy_less(const DeterministicStrategy& a, const DeterministicStrategy& b) {
    auto rank = [](int o) { return o == +1 ? 0 : 1; };
    for (size_t i = 0; i < a.outA.size(); ++i) {
        if (a.outA[i] != b.outA[i]) return rank(a.outA[i]) < rank(b.outA[i]);
    }
    for (size_t i = 0; i < a.outB.size(); ++i) {
        if (a.outB[i] != b.outB[i]) return rank(a.outB[i]) < rank(b.outB[i]);
    }
    return false;
}

}  // namespace

DetectionScheme DetectionScheme::symmetric(double eta) {
    require_in_unit_interval(eta);
    return {Kind::Symmetric, eta};
}

DetectionScheme DetectionScheme::asymmetric(double etaB) {
    require_in_unit_interval(etaB);
    return {Kind::Asymmetric, etaB};
}

double DetectionScheme::normalizer() const {
    switch (kind) {
        case Kind::None: return 1.0;
        case Kind::Symmetric: return efficiency * efficiency;
        case Kind::Asymmetric: return efficiency;
    }
    return 1.0;
}

double evaluate(const BellExpression& expr, const CorrelationTable& table) {
    require_same_scenario(expr, table);
    double v = expr.constant;
    for (size_t i = 0; i < expr.cJoint.size(); ++i) v += expr.cJoint[i] * table.joint[i];
    for (int x = 0; x < expr.nA; ++x) v += expr.cA[x] * table.margA[x];
    for (int y = 0; y < expr.nB; ++y) v += expr.cB[y] * table.margB[y];
    return v;
}

CorrelationTable deterministic_table(const DeterministicStrategy& s) {
    CorrelationTable t(static_cast<int>(s.outA.size()), static_cast<int>(s.outB.size()));
    for (int x = 0; x < t.nA; ++x) t.margA[x] = s.outA[x] == +1 ? 1.0 : 0.0;
    for (int y = 0; y < t.nB; ++y) t.margB[y] = s.outB[y] == +1 ? 1.0 : 0.0;
    for (int x = 0; x < t.nA; ++x)
        for (int y = 0; y < t.nB; ++y) t.at(x, y) = t.margA[x] * t.margB[y];
    return t;
}

LocalBoundResult local_bound(const BellExpression& expr) {
    if (expr.nA > 20 || expr.nB > 20) {
        throw ScenarioTooLarge("local_bound: scenario too large for enumeration (limit 20 settings per side)");
    }
    if (expr.nA <= 0 || expr.nB <= 0) {
        throw std::invalid_argument("local_bound: empty scenario");
    }

    // Enumerate Bob's 2^nB outputs; for each, Alice's best response separates
    // per setting. Choosing +1 exactly when its contribution is >= 0 also
    // yields the lexicographically smallest maximizer for that Bob strategy,
    // so the global tie-break only has to compare the surviving candidates.
    const int nA = expr.nA, nB = expr.nB;
    bool found = false;
    LocalBoundResult best;
    DeterministicStrategy cand;
    cand.outA.assign(nA, +1);
    cand.outB.assign(nB, +1);

    for (uint64_t mask = 0; mask < (uint64_t{1} << nB); ++mask) {
        double value = expr.constant;
        for (int y = 0; y < nB; ++y) {
            cand.outB[y] = (mask >> y) & 1 ? -1 : +1;
            if (cand.outB[y] == +1) value += expr.cB[y];
        }
        for (int x = 0; x < nA; ++x) {
            double contrib = expr.cA[x];
            for (int y = 0; y < nB; ++y) {
                if (cand.outB[y] == +1) contrib += expr.cj(x, y);
            }
            cand.outA[x] = contrib >= 0.0 ? +1 : -1;
            if (contrib > 0.0) value += contrib;
        }
        if (!found || value > best.value ||
            (value == best.value && strategy_less(cand, best.strategy))) {
            found = true;
            best.value = value;
            best.strategy = cand;
        }
    }
    // Report the bound through the same arithmetic as evaluate() so that the
    // returned strategy attains it exactly.
    best.value = evaluate(expr, deterministic_table(best.strategy));
    return best;
}

CorrelationTable apply_detection(const CorrelationTable& table, const DetectionScheme& scheme) {
    if (scheme.kind != DetectionScheme::Kind::None) require_in_unit_interval(scheme.efficiency);
    CorrelationTable out = table;
    const double eta = scheme.efficiency;
    switch (scheme.kind) {
        case DetectionScheme::Kind::None:
            break;
        case DetectionScheme::Kind::Symmetric:
            for (double& j : out.joint) j *= eta * eta;
            for (double& m : out.margA) m *= eta;
            for (double& m : out.margB) m *= eta;
            break;
        case DetectionScheme::Kind::Asymmetric:
            for (double& j : out.joint) j *= eta;
            for (double& m : out.margB) m *= eta;
            break;
    }
    return out;
}

BellExpression modify_for_detection(const BellExpression& expr, const DetectionScheme& scheme) {
    if (scheme.kind != DetectionScheme::Kind::None) {
        require_in_unit_interval(scheme.efficiency);
        if (expr.constant != 0.0) {
            throw std::invalid_argument("modify_for_detection requires a zero constant term");
        }
    }
    BellExpression out = expr;
    out.localBound.reset();
    const double eta = scheme.efficiency;
    switch (scheme.kind) {
        case DetectionScheme::Kind::None:
            return out;
        case DetectionScheme::Kind::Symmetric:
            for (double& c : out.cA) c /= eta;
            for (double& c : out.cB) c /= eta;
            break;
        case DetectionScheme::Kind::Asymmetric:
            for (double& c : out.cA) c /= eta;
            break;
    }
    return out;
}

BellExpression build_inn22(int n) {
    if (n < 2) throw std::invalid_argument("build_inn22 requires n >= 2");
    BellExpression e(n, n);
    e.cA[0] = -1.0;
    for (int y = 1; y < n; ++y) e.cB[y] = -1.0;
    for (int y = 0; y < n; ++y) e.cj(0, y) = 1.0;
    for (int x = 1; x < n; ++x) e.cj(x, x) = 1.0;
    for (int x = 1; x < n; ++x)
        for (int y = 0; y < x; ++y) e.cj(x, y) = -1.0;
    return e;
}

BellExpression build_ch() {
    BellExpression e(2, 2);
    e.cj(0, 0) = 1.0;
    e.cj(0, 1) = 1.0;
    e.cj(1, 0) = 1.0;
    e.cj(1, 1) = -1.0;
    e.cA[0] = -1.0;
    e.cB[0] = -1.0;
    return e;
}

BellExpression build_ch_sub(int i, int j, int m, int n) {
    for (int idx : {i, j, m, n}) {
        if (idx < 1 || idx > 4) throw std::invalid_argument("build_ch_sub indices must lie in 1..4");
    }
    BellExpression e(4, 4);
    e.cj(i - 1, m - 1) += 1.0;
    e.cj(j - 1, m - 1) += 1.0;
    e.cj(i - 1, n - 1) += 1.0;
    e.cj(j - 1, n - 1) -= 1.0;
    e.cA[i - 1] -= 1.0;
    e.cB[m - 1] -= 1.0;
    return e;
}

BellExpression build_i4422() {
    BellExpression e(4, 4);
    auto add = [&e](const BellExpression& other, double weight) {
        for (size_t k = 0; k < e.cJoint.size(); ++k) e.cJoint[k] += weight * other.cJoint[k];
        for (int x = 0; x < 4; ++x) e.cA[x] += weight * other.cA[x];
        for (int y = 0; y < 4; ++y) e.cB[y] += weight * other.cB[y];
    };
    add(build_ch_sub(1, 2, 1, 2), +1.0);
    add(build_ch_sub(3, 4, 3, 4), +1.0);
    add(build_ch_sub(2, 1, 4, 3), -1.0);
    add(build_ch_sub(4, 3, 2, 1), -1.0);
    e.cA[1] -= 1.0;
    e.cA[3] -= 1.0;
    e.cB[1] -= 1.0;
    e.cB[3] -= 1.0;
    return e;
}

}  // namespace detloop
