#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "detloop/bell.hpp"
#include "detloop/quantum.hpp"

namespace detloop {

// Coefficient ladders behind the asymmetric measurement family:
//   p0^2 = 1/n, p1^2 = (n-1)/n, p_{k+1}^2 = (1 - 1/(n-k)^2) p_k^2  (k >= 1)
//   q1^2 = 1 - q0^2,            q_{k+1}^2 = (1 - 1/(n-k)^2) q_k^2  (k >= 1)
// All entries are the nonnegative roots.
struct RecursionCoefficients {
    std::vector<double> p;  // p[0..n-1]
    std::vector<double> q;  // q[0..n-1]
};

RecursionCoefficients recursion_coefficients(int n, double q0);

// The n-setting measurement family for the asymmetric I_NN22 test. Every
// returned vector is exactly unit-norm; the sign structure is fixed (minus
// signs on the leading p_x/q_y entries, a plus sign on the last row).
std::pair<MeasurementSettings, MeasurementSettings> asymmetric_settings(int n, double q0);

// Entanglement parameter that cancels the below-diagonal joint probabilities:
// eps^2 = (1-q0^2) / (1 + ((n-1)^2 - 1) q0^2).
double optimal_epsilon(int n, double q0);

// Value of the efficiency-modified I_NN22 on the construction with optimal
// epsilon: eps^2 (-1/etaB + q0^2 n).
double asymmetric_value_closed_form(int n, double q0, double etaB);

// Efficiency where the closed-form value crosses zero: 1/(n q0^2).
double asymmetric_threshold(int n, double q0);

// Qubit settings for the CH test: A1=(-u,p1), A2=(v,p2), B1=(u,p1),
// B2=(-v,p2) with u=sqrt(1-p1^2), v=sqrt(1-p2^2).
std::pair<MeasurementSettings, MeasurementSettings> ch_settings(double p1, double p2);

// Parameters of the four-setting ququart construction. The two-dimensional
// tail vectors must satisfy |p1|=|q1| and |p2|=|q2|; the assembled 4-vectors
// are renormalized, so u, v need not make them exactly unit-norm.
struct QuquartParams {
    double u = 0.0;
    double v = 0.0;
    std::array<double, 2> p1{}, p2{}, q1{}, q2{};
};

std::pair<MeasurementSettings, MeasurementSettings> ququart_settings(const QuquartParams& params);

// Published optimum of the ququart construction for the maximally entangled
// state (u, v derived from the tail norms).
QuquartParams ququart_maxent_params();

// Small-epsilon ququart family: u = sqrt(3/8)(sqrt(5)-1) eps, v = 1/2,
// p1 = q1 = (0,1), p2 = (delta, 1/sqrt2), q2 = (-delta, 1/sqrt2) with
// delta = (3/4)^{1/4} sqrt(eps).
QuquartParams ququart_small_epsilon_params(double epsilon);

// A construction bundles everything needed to evaluate one named Bell test:
// the raw expression, its detection scheme kind, the state and measurements.
struct Construction {
    std::string name;
    BellExpression expr;
    DetectionScheme::Kind schemeKind = DetectionScheme::Kind::None;
    SchmidtState state;
    MeasurementSettings settingsA;
    MeasurementSettings settingsB;
};

// Named registry addressable from the CLI. Accepted names:
//   inn22(N,q0)            asymmetric I_NN22 construction at optimal epsilon
//   ch-eberhard-maxent     CH, maximally entangled qubits, u=sin(pi/16), v=sin(3pi/16)
//   ch-eberhard-partial(eps)  CH, partially entangled qubits, u=0, v=sqrt(eps)
//   i4422-maxent           ququart optimum for the maximally entangled state
//   i4422-smalleps(eps)    small-epsilon ququart family
// Parenthesized arguments may be omitted when defaults are supplied.
Construction lookup_construction(const std::string& spec,
                                 std::optional<double> n = std::nullopt,
                                 std::optional<double> q0 = std::nullopt,
                                 std::optional<double> epsilon = std::nullopt);

std::vector<std::string> construction_names();

}  // namespace detloop
