#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "detloop/constructions.hpp"
#include "detloop/quantum.hpp"

using namespace detloop;

namespace {

MeasurementSettings random_settings(std::mt19937& rng, int dim, int count) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    MeasurementSettings s{dim, {}};
    for (int i = 0; i < count; ++i) {
        std::vector<double> v(dim);
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (double& c : v) {
                c = gauss(rng);
                norm2 += c * c;
            }
        } while (norm2 < 1e-12);
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& c : v) c *= inv;
        s.vectors.push_back(std::move(v));
    }
    return s;
}

SchmidtState random_state(std::mt19937& rng, int dim, double noise) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    SchmidtState s{dim, std::vector<double>(dim), noise};
    double norm2 = 0.0;
    for (double& l : s.lambda) {
        l = unit(rng);
        norm2 += l * l;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& l : s.lambda) l *= inv;
    return s;
}

}  // namespace

TEST_CASE("schmidt_from_epsilon families") {
    const SchmidtState maxentQubits = schmidt_from_epsilon(2, 1.0 / std::sqrt(2.0));
    CHECK(maxentQubits.lambda[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(maxentQubits.lambda[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

    const SchmidtState maxentQuquarts = schmidt_from_epsilon(4, 0.5);
    for (double l : maxentQuquarts.lambda) CHECK(l == doctest::Approx(0.5).epsilon(1e-15));

    const SchmidtState product = schmidt_from_epsilon(3, 1.0);
    CHECK(product.lambda == std::vector<double>{0.0, 0.0, 1.0});

    double norm2 = 0.0;
    for (double l : schmidt_from_epsilon(5, 0.37).lambda) norm2 += l * l;
    CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(schmidt_from_epsilon(1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(schmidt_from_epsilon(3, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(schmidt_from_epsilon(3, 0.5, -0.1), std::invalid_argument);
}

TEST_CASE("correlation_table on the asymmetric construction") {
    const int n = 3;
    const double q0 = std::sqrt(0.9);
    const double eps = optimal_epsilon(n, q0);
    const auto [a, b] = asymmetric_settings(n, q0);
    const CorrelationTable t = correlation_table(schmidt_from_epsilon(n, eps), a, b);

    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < x; ++y) {
            CHECK(std::abs(t.at(x, y)) < 1e-12);
        }
    }
    CHECK(t.margA[0] == doctest::Approx(eps * eps).epsilon(1e-12));
}

TEST_CASE("product state marginals") {
    const int n = 3;
    const auto [a, b] = asymmetric_settings(n, 0.8);
    const CorrelationTable t = correlation_table(schmidt_from_epsilon(n, 1.0), a, b);
    // first setting projects onto the occupied level
    CHECK(t.margA[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("tensor rule rejects bad inputs") {
    const SchmidtState s = schmidt_from_epsilon(3, 0.4);
    MeasurementSettings wrongDim{2, {{1.0, 0.0}}};
    CHECK_THROWS_AS(correlation_table(s, wrongDim, wrongDim), std::invalid_argument);

    MeasurementSettings notUnit{3, {{1.0, 1.0, 0.0}}};
    MeasurementSettings ok{3, {{1.0, 0.0, 0.0}}};
    CHECK_THROWS_AS(correlation_table(s, notUnit, ok), std::invalid_argument);
}

TEST_CASE("closed-form block values") {
    const double eps = std::sqrt(0.1 / 3.7);
    const double q0 = std::sqrt(0.9);
    const CorrelationTable t = closed_form_table(3, eps, q0);
    CHECK(t.margA[0] == doctest::Approx(0.027027).epsilon(1e-5));
    for (int y = 0; y < 3; ++y) CHECK(t.at(0, y) == doctest::Approx(0.0243243).epsilon(1e-5));

    const CorrelationTable full = closed_form_table(3, 0.6, 1.0);
    for (int y = 1; y < 3; ++y) CHECK(full.margB[y] == doctest::Approx(0.36).epsilon(1e-12));

    const CorrelationTable zero = closed_form_table(4, 0.0, 0.5);
    CHECK(zero.margA[0] == 0.0);
    for (int y = 0; y < 4; ++y) CHECK(zero.at(0, y) == 0.0);

    CHECK_THROWS_AS(closed_form_table(3, -0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(closed_form_table(3, 0.1, 1.5), std::invalid_argument);
}

TEST_CASE("closed form agrees with the tensor rule") {
    std::mt19937 rng(20260808);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n = 2; n <= 6; ++n) {
        for (int trial = 0; trial < 20; ++trial) {
            const double eps = unit(rng);
            const double q0 = unit(rng);
            const CorrelationTable closed = closed_form_table(n, eps, q0);
            const auto [a, b] = asymmetric_settings(n, q0);
            const CorrelationTable tensor =
                correlation_table(schmidt_from_epsilon(n, eps), a, b);
            for (int x = 0; x < n; ++x) {
                CHECK(closed.margA[x] == doctest::Approx(tensor.margA[x]).epsilon(1e-12));
                for (int y = 0; y < n; ++y) {
                    CHECK(closed.at(x, y) == doctest::Approx(tensor.at(x, y)).epsilon(1e-12));
                }
            }
            for (int y = 0; y < n; ++y) {
                CHECK(closed.margB[y] == doctest::Approx(tensor.margB[y]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("four-outcome distributions are normalized") {
    std::mt19937 rng(1618);
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 2 + trial % 4;
        const SchmidtState state = random_state(rng, dim, (trial % 5) * 0.02);
        const MeasurementSettings a = random_settings(rng, dim, 2 + trial % 3);
        const MeasurementSettings b = random_settings(rng, dim, 2 + (trial / 3) % 3);
        const CorrelationTable t = correlation_table(state, a, b);
        for (int x = 0; x < t.nA; ++x) {
            for (int y = 0; y < t.nB; ++y) {
                const double pp = t.at(x, y);
                const double pm = t.margA[x] - pp;
                const double mp = t.margB[y] - pp;
                const double mm = 1.0 - t.margA[x] - t.margB[y] + pp;
                CHECK(pp >= -1e-12);
                CHECK(pm >= -1e-12);
                CHECK(mp >= -1e-12);
                CHECK(mm >= -1e-12);
                CHECK(pp + pm + mp + mm == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("white noise mixes linearly") {
    std::mt19937 rng(2718);
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 2 + trial % 3;
        SchmidtState state = random_state(rng, dim, 0.0);
        const MeasurementSettings a = random_settings(rng, dim, 2);
        const MeasurementSettings b = random_settings(rng, dim, 3);
        const CorrelationTable pure = correlation_table(state, a, b);
        const double p = (trial % 10 + 1) * 0.07;
        state.noise = p;
        const CorrelationTable noisy = correlation_table(state, a, b);
        for (int x = 0; x < 2; ++x) {
            CHECK(noisy.margA[x] ==
                  doctest::Approx((1 - p) * pure.margA[x] + p / dim).epsilon(1e-12));
            for (int y = 0; y < 3; ++y) {
                CHECK(noisy.at(x, y) ==
                      doctest::Approx((1 - p) * pure.at(x, y) + p / (dim * dim)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("simultaneous basis permutation leaves the table unchanged") {
    std::mt19937 rng(161803);
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 2 + trial % 4;
        const SchmidtState state = random_state(rng, dim, 0.03 * (trial % 3));
        const MeasurementSettings a = random_settings(rng, dim, 2);
        const MeasurementSettings b = random_settings(rng, dim, 2);
        const CorrelationTable before = correlation_table(state, a, b);

        std::vector<int> perm(dim);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);

        SchmidtState pstate = state;
        MeasurementSettings pa = a, pb = b;
        for (int k = 0; k < dim; ++k) {
            pstate.lambda[k] = state.lambda[perm[k]];
            for (int i = 0; i < 2; ++i) {
                pa.vectors[i][k] = a.vectors[i][perm[k]];
                pb.vectors[i][k] = b.vectors[i][perm[k]];
            }
        }
        const CorrelationTable after = correlation_table(pstate, pa, pb);
        for (size_t i = 0; i < before.joint.size(); ++i) {
            CHECK(after.joint[i] == doctest::Approx(before.joint[i]).epsilon(1e-12));
        }
        for (int x = 0; x < 2; ++x) {
            CHECK(after.margA[x] == doctest::Approx(before.margA[x]).epsilon(1e-12));
        }
    }
}

TEST_CASE("quantum tables satisfy no-signaling sanity") {
    std::mt19937 rng(7919);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = 2 + trial % 3;
        const SchmidtState state = random_state(rng, dim, 0.0);
        const MeasurementSettings a = random_settings(rng, dim, 3);
        const MeasurementSettings b = random_settings(rng, dim, 3);
        const CorrelationTable t = correlation_table(state, a, b);
        for (int x = 0; x < 3; ++x) {
            for (int y = 0; y < 3; ++y) {
                CHECK(t.at(x, y) <= std::min(t.margA[x], t.margB[y]) + 1e-12);
                CHECK(t.margA[x] + t.margB[y] - t.at(x, y) <= 1.0 + 1e-12);
            }
        }
    }
}
