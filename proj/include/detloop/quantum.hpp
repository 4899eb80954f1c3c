#pragma once

#include <utility>
#include <vector>

#include "detloop/bell.hpp"

namespace detloop {

// Bipartite pure state sum_k lambda[k] |k>|k> with real nonnegative Schmidt
// coefficients, optionally mixed with white noise of weight p:
//   rho = (1-p) |psi><psi| + p I/dim^2.
struct SchmidtState {
    int dim = 0;
    std::vector<double> lambda;
    double noise = 0.0;
};

// One real unit vector per setting; vector v defines the rank-1 projector
// |v><v| for outcome +1, its complement for outcome -1.
struct MeasurementSettings {
    int dim = 0;
    std::vector<std::vector<double>> vectors;

    int count() const { return static_cast<int>(vectors.size()); }
};

// State family with lambda[k] = sqrt((1-eps^2)/(n-1)) for k < n and
// lambda[n-1] = eps. eps = 0 is maximally entangled on the first n-1 levels;
// eps = 1 is the product state |n>|n>.
SchmidtState schmidt_from_epsilon(int n, double epsilon, double noise = 0.0);

// Exact click probabilities of the state under the given projective
// measurements. Pure part: P(A_x,B_y) = (sum_k lambda_k a_x[k] b_y[k])^2,
// P(A_x) = sum_k lambda_k^2 a_x[k]^2. The white-noise part contributes
// p/dim^2 to joints and p/dim to marginals.
CorrelationTable correlation_table(const SchmidtState& state,
                                   const MeasurementSettings& settingsA,
                                   const MeasurementSettings& settingsB);

// Same table for the I_NN22 construction at (epsilon, q0), with the entries
// covered by the closed-form probability block written from their formulas
// instead of the tensor rule. Cross-validation target for correlation_table.
CorrelationTable closed_form_table(int n, double epsilon, double q0);

}  // namespace detloop
