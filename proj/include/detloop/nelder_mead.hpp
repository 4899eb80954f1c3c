#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace detloop {

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
};

// Downhill simplex minimization (reflection 1, expansion 2, contraction 1/2,
// shrink 1/2). Stops when both the value spread and the simplex diameter fall
// below the tolerances, or after maxIterations. Deterministic for a given
// start point and step.
inline NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                                    std::span<const double> start, double step, int maxIterations,
                                    double xTolerance, double fTolerance) {
    const size_t n = start.size();
    std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(start.begin(), start.end()));
    for (size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
    std::vector<double> values(n + 1);
    for (size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

    std::vector<size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    int iter = 0;
    for (; iter < maxIterations; ++iter) {
        for (size_t i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return values[a] < values[b]; });
        const size_t best = order[0], worst = order[n], second = order[n - 1];

        double diameter = 0.0;
        for (size_t i = 0; i < n; ++i) {
            diameter = std::max(diameter, std::abs(simplex[worst][i] - simplex[best][i]));
        }
        if (values[worst] - values[best] < fTolerance && diameter < xTolerance) break;

        for (size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (size_t j = 0; j <= n; ++j) {
                if (j != worst) sum += simplex[j][i];
            }
            centroid[i] = sum / static_cast<double>(n);
        }

        for (size_t i = 0; i < n; ++i) trial[i] = centroid[i] + (centroid[i] - simplex[worst][i]);
        const double reflected = f(trial);

        if (reflected < values[best]) {
            for (size_t i = 0; i < n; ++i) trial2[i] = centroid[i] + 2.0 * (trial[i] - centroid[i]);
            const double expanded = f(trial2);
            if (expanded < reflected) {
                simplex[worst] = trial2;
                values[worst] = expanded;
            } else {
                simplex[worst] = trial;
                values[worst] = reflected;
            }
        } else if (reflected < values[second]) {
            simplex[worst] = trial;
            values[worst] = reflected;
        } else {
            const bool outside = reflected < values[worst];
            const std::vector<double>& toward = outside ? trial : simplex[worst];
            for (size_t i = 0; i < n; ++i) trial2[i] = centroid[i] + 0.5 * (toward[i] - centroid[i]);
            const double contracted = f(trial2);
            if (contracted < (outside ? reflected : values[worst])) {
                simplex[worst] = trial2;
                values[worst] = contracted;
            } else {
                for (size_t j = 0; j <= n; ++j) {
                    if (j == best) continue;
                    for (size_t i = 0; i < n; ++i) {
                        simplex[j][i] = simplex[best][i] + 0.5 * (simplex[j][i] - simplex[best][i]);
                    }
                    values[j] = f(simplex[j]);
                }
            }
        }
    }

    size_t bestIdx = 0;
    for (size_t i = 1; i <= n; ++i) {
        if (values[i] < values[bestIdx]) bestIdx = i;
    }
    return {simplex[bestIdx], values[bestIdx], iter};
}

}  // namespace detloop
