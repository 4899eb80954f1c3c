#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace detloop {

// Joint/marginal "click" probabilities of a two-party binary-outcome
// scenario: joint[x][y] = P(A_x=+1, B_y=+1), margA[x] = P(A_x=+1),
// margB[y] = P(B_y=+1). Together these determine the full four-outcome
// distribution of every setting pair.
struct CorrelationTable {
    int nA = 0;
    int nB = 0;
    std::vector<double> joint;  // row-major nA*nB
    std::vector<double> margA;  // length nA
    std::vector<double> margB;  // length nB

    CorrelationTable() = default;
    CorrelationTable(int nA_, int nB_)
        : nA(nA_), nB(nB_), joint(static_cast<size_t>(nA_) * nB_, 0.0),
          margA(nA_, 0.0), margB(nB_, 0.0) {}

    double& at(int x, int y) { return joint[static_cast<size_t>(x) * nB + y]; }
    double at(int x, int y) const { return joint[static_cast<size_t>(x) * nB + y]; }
};

// Linear functional over a CorrelationTable:
//   constant + sum cJoint[x][y]*joint[x][y] + sum cA[x]*margA[x] + sum cB[y]*margB[y]
struct BellExpression {
    int nA = 0;
    int nB = 0;
    std::vector<double> cJoint;  // row-major nA*nB
    std::vector<double> cA;      // length nA
    std::vector<double> cB;      // length nB
    double constant = 0.0;
    std::optional<double> localBound;  // cache, see local_bound()

    BellExpression() = default;
    BellExpression(int nA_, int nB_)
        : nA(nA_), nB(nB_), cJoint(static_cast<size_t>(nA_) * nB_, 0.0),
          cA(nA_, 0.0), cB(nB_, 0.0) {}

    double& cj(int x, int y) { return cJoint[static_cast<size_t>(x) * nB + y]; }
    double cj(int x, int y) const { return cJoint[static_cast<size_t>(x) * nB + y]; }
};

// No-click events are binned as outcome "-1" on the inefficient side(s).
struct DetectionScheme {
    enum class Kind { None, Symmetric, Asymmetric };

    Kind kind = Kind::None;
    double efficiency = 1.0;  // eta (symmetric) or etaB (asymmetric)

    static DetectionScheme none() { return {Kind::None, 1.0}; }
    static DetectionScheme symmetric(double eta);
    static DetectionScheme asymmetric(double etaB);

    // Factor relating modified and raw expressions:
    // evaluate(modified, T) = evaluate(raw, apply_detection(T)) / normalizer().
    double normalizer() const;
};

// Local deterministic assignment of +1/-1 outputs to every setting.
struct DeterministicStrategy {
    std::vector<int> outA;  // entries +1 or -1
    std::vector<int> outB;

    bool operator==(const DeterministicStrategy&) const = default;
};

struct LocalBoundResult {
    double value = 0.0;
    DeterministicStrategy strategy;
};

// Thrown when local_bound is asked for a scenario beyond the enumeration limit.
struct ScenarioTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

double evaluate(const BellExpression& expr, const CorrelationTable& table);

// Exact local bound by enumeration over deterministic strategies, together
// with one maximizer. Ties are broken by the lexicographically smallest
// (outA, outB) with +1 < -1. Requires nA, nB <= 20.
LocalBoundResult local_bound(const BellExpression& expr);

CorrelationTable deterministic_table(const DeterministicStrategy& s);

// Efficiency-scaled table: asymmetric keeps Alice's marginals untouched.
CorrelationTable apply_detection(const CorrelationTable& table, const DetectionScheme& scheme);

// Coefficient-space counterpart of apply_detection: marginal coefficients of
// the inefficient side(s) are divided by the efficiency so that
//   evaluate(modified, T) == evaluate(raw, apply_detection(T, s)) / s.normalizer()
// for every table T. Rejects expressions with a nonzero constant term.
BellExpression modify_for_detection(const BellExpression& expr, const DetectionScheme& scheme);

// Collins-Gisin I_NN22 inequality (local bound 0), N settings per side.
BellExpression build_inn22(int n);

// CH inequality (local bound 0).
BellExpression build_ch();

// CH block on settings (i,j) x (m,n) embedded in a 4x4 scenario; 1-based indices.
BellExpression build_ch_sub(int i, int j, int m, int n);

// Four-setting symmetric inequality assembled from four lifted CH blocks
// minus four marginals (local bound 0).
BellExpression build_i4422();

}  // namespace detloop
