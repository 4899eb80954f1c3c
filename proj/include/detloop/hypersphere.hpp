#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace detloop {

// Unit vector in R^d from d-1 unconstrained angles:
//   v[0] = cos t0, v[1] = sin t0 cos t1, ..., v[d-1] = sin t0 ... sin t_{d-2}.
inline void unit_vector_from_angles(std::span<const double> angles, std::span<double> out) {
    double running = 1.0;
    const size_t d = out.size();
    for (size_t i = 0; i + 1 < d; ++i) {
        out[i] = running * std::cos(angles[i]);
        running *= std::sin(angles[i]);
    }
    out[d - 1] = running;
}

inline std::vector<double> unit_vector_from_angles(std::span<const double> angles) {
    std::vector<double> v(angles.size() + 1);
    unit_vector_from_angles(angles, v);
    return v;
}

// Inverse of unit_vector_from_angles for unit-norm input: angles[i] is the
// polar angle of v[i] against the norm of the remaining tail.
inline std::vector<double> angles_from_unit_vector(std::span<const double> v) {
    const size_t d = v.size();
    std::vector<double> angles(d - 1);
    for (size_t i = 0; i + 2 < d; ++i) {
        double tail = 0.0;
        for (size_t k = i + 1; k < d; ++k) tail += v[k] * v[k];
        angles[i] = std::atan2(std::sqrt(tail), v[i]);
    }
    angles[d - 2] = std::atan2(v[d - 1], v[d - 2]);
    return angles;
}

}  // namespace detloop
