#include "detloop/quantum.hpp"

#include <cmath>
#include <stdexcept>

#include "detloop/constructions.hpp"

namespace detloop {

namespace {

constexpr double kUnitNormTol = 1e-9;

void require_normalized_state(const SchmidtState& s) {
    double norm2 = 0.0;
    for (double l : s.lambda) {
        if (l < 0.0) throw std::invalid_argument("Schmidt coefficients must be nonnegative");
        norm2 += l * l;
    }
    if (std::abs(norm2 - 1.0) > kUnitNormTol) {
        throw std::invalid_argument("Schmidt coefficients must be normalized");
    }
    if (s.noise < 0.0 || s.noise > 1.0) {
        throw std::invalid_argument("noise must lie in [0, 1]");
    }
}

void require_unit_vectors(const MeasurementSettings& s) {
    for (const auto& v : s.vectors) {
        if (static_cast<int>(v.size()) != s.dim) {
            throw std::invalid_argument("measurement vector length differs from dim");
        }
        double norm2 = 0.0;
        for (double c : v) norm2 += c * c;
        if (std::abs(norm2 - 1.0) > kUnitNormTol) {
            throw std::invalid_argument("measurement vector is not unit-norm");
        }
    }
}

}  // namespace

SchmidtState schmidt_from_epsilon(int n, double epsilon, double noise) {
    if (n < 2) throw std::invalid_argument("schmidt_from_epsilon requires dim >= 2");
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must lie in [0, 1]");
    if (noise < 0.0 || noise > 1.0) throw std::invalid_argument("noise must lie in [0, 1]");
    SchmidtState s;
    s.dim = n;
    s.noise = noise;
    s.lambda.assign(n, std::sqrt((1.0 - epsilon * epsilon) / (n - 1)));
    s.lambda[n - 1] = epsilon;
    return s;
}

CorrelationTable correlation_table(const SchmidtState& state,
                                   const MeasurementSettings& settingsA,
                                   const MeasurementSettings& settingsB) {
    const int d = state.dim;
    if (settingsA.dim != d || settingsB.dim != d) {
        throw std::invalid_argument("state and settings dimensions differ");
    }
    if (static_cast<int>(state.lambda.size()) != d) {
        throw std::invalid_argument("lambda length differs from dim");
    }
    require_normalized_state(state);
    require_unit_vectors(settingsA);
    require_unit_vectors(settingsB);

    const int nA = settingsA.count();
    const int nB = settingsB.count();
    const double p = state.noise;
    CorrelationTable t(nA, nB);

    for (int x = 0; x < nA; ++x) {
        double m = 0.0;
        for (int k = 0; k < d; ++k) {
            const double a = settingsA.vectors[x][k];
            m += state.lambda[k] * state.lambda[k] * a * a;
        }
        t.margA[x] = (1.0 - p) * m + p / d;
    }
    for (int y = 0; y < nB; ++y) {
        double m = 0.0;
        for (int k = 0; k < d; ++k) {
            const double b = settingsB.vectors[y][k];
            m += state.lambda[k] * state.lambda[k] * b * b;
        }
        t.margB[y] = (1.0 - p) * m + p / d;
    }
    for (int x = 0; x < nA; ++x) {
        for (int y = 0; y < nB; ++y) {
            double amp = 0.0;
            for (int k = 0; k < d; ++k) {
                amp += state.lambda[k] * settingsA.vectors[x][k] * settingsB.vectors[y][k];
            }
            t.at(x, y) = (1.0 - p) * amp * amp + p / (static_cast<double>(d) * d);
        }
    }
    return t;
}

CorrelationTable closed_form_table(int n, double epsilon, double q0) {
    if (n < 2) throw std::invalid_argument("closed_form_table requires n >= 2");
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must lie in [0, 1]");
    if (q0 < 0.0 || q0 > 1.0) throw std::invalid_argument("q0 must lie in [0, 1]");

    const auto [settingsA, settingsB] = asymmetric_settings(n, q0);
    const SchmidtState state = schmidt_from_epsilon(n, epsilon, 0.0);
    // Entries outside the closed-form block (marginals P(A_x) for x >= 2 and
    // P(B_1), plus the above-diagonal joints the inequality never touches)
    // come from the tensor rule.
    CorrelationTable t = correlation_table(state, settingsA, settingsB);

    const RecursionCoefficients rc = recursion_coefficients(n, q0);
    const double eps2 = epsilon * epsilon;
    const double share = (1.0 - eps2) / (n - 1);
    const double s = std::sqrt(share);

    t.margA[0] = eps2;
    for (int y = 1; y < n; ++y) t.margB[y] = share * (1.0 - q0 * q0) + eps2 * q0 * q0;
    for (int y = 0; y < n; ++y) t.at(0, y) = eps2 * q0 * q0;
    const double diag = s * rc.p[1] * rc.q[1] + epsilon * rc.p[0] * rc.q[0];
    for (int x = 1; x < n; ++x) t.at(x, x) = diag * diag;
    const double below = s * rc.p[1] * rc.q[1] / (1.0 - n) + epsilon * rc.p[0] * rc.q[0];
    for (int x = 1; x < n; ++x) {
        for (int y = 0; y < x; ++y) t.at(x, y) = below * below;
    }
    return t;
}

}  // namespace detloop
