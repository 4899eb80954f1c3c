#include <doctest.h>

#include <cmath>
#include <random>

#include "detloop/bell.hpp"
#include "detloop/json_io.hpp"

using namespace detloop;

namespace {

// Independent enumeration over all 2^(nA+nB) strategies, with the same
// (outA, outB), +1 < -1 tie-break as the library contract.
bool lex_less(const DeterministicStrategy& a, const DeterministicStrategy& b) {
    auto rank = [](int o) { return o == +1 ? 0 : 1; };
    for (size_t i = 0; i < a.outA.size(); ++i) {
        if (a.outA[i] != b.outA[i]) return rank(a.outA[i]) < rank(b.outA[i]);
    }
    for (size_t i = 0; i < a.outB.size(); ++i) {
        if (a.outB[i] != b.outB[i]) return rank(a.outB[i]) < rank(b.outB[i]);
    }
    return false;
}

LocalBoundResult brute_force_bound(const BellExpression& expr) {
    LocalBoundResult best;
    bool found = false;
    DeterministicStrategy s;
    s.outA.assign(expr.nA, +1);
    s.outB.assign(expr.nB, +1);
    for (uint64_t maskA = 0; maskA < (uint64_t{1} << expr.nA); ++maskA) {
        for (int x = 0; x < expr.nA; ++x) s.outA[x] = (maskA >> x) & 1 ? -1 : +1;
        for (uint64_t maskB = 0; maskB < (uint64_t{1} << expr.nB); ++maskB) {
            for (int y = 0; y < expr.nB; ++y) s.outB[y] = (maskB >> y) & 1 ? -1 : +1;
            const double v = evaluate(expr, deterministic_table(s));
            if (!found || v > best.value || (v == best.value && lex_less(s, best.strategy))) {
                found = true;
                best.value = v;
                best.strategy = s;
            }
        }
    }
    return best;
}

BellExpression random_expression(std::mt19937& rng, int nA, int nB) {
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    BellExpression e(nA, nB);
    for (double& c : e.cJoint) c = coeff(rng);
    for (double& c : e.cA) c = coeff(rng);
    for (double& c : e.cB) c = coeff(rng);
    return e;
}

CorrelationTable random_table(std::mt19937& rng, int nA, int nB) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    CorrelationTable t(nA, nB);
    for (double& v : t.joint) v = unit(rng);
    for (double& v : t.margA) v = unit(rng);
    for (double& v : t.margB) v = unit(rng);
    return t;
}

CorrelationTable constant_table(int nA, int nB, double value) {
    CorrelationTable t(nA, nB);
    for (double& v : t.joint) v = value;
    for (double& v : t.margA) v = value;
    for (double& v : t.margB) v = value;
    return t;
}

}  // namespace

TEST_CASE("inn22 coefficient layout") {
    const BellExpression e2 = build_inn22(2);
    CHECK(e2.cA == std::vector<double>{-1.0, 0.0});
    CHECK(e2.cB == std::vector<double>{0.0, -1.0});
    CHECK(e2.cJoint == std::vector<double>{1.0, 1.0, -1.0, 1.0});

    const BellExpression e3 = build_inn22(3);
    CHECK(e3.cA == std::vector<double>{-1.0, 0.0, 0.0});
    CHECK(e3.cB == std::vector<double>{0.0, -1.0, -1.0});
    CHECK(e3.cJoint == std::vector<double>{1, 1, 1, -1, 1, 0, -1, -1, 1});

    CHECK_THROWS_AS(build_inn22(1), std::invalid_argument);
}

TEST_CASE("evaluate on reference tables") {
    const BellExpression i3322 = build_inn22(3);
    CHECK(evaluate(i3322, constant_table(3, 3, 0.0)) == 0.0);
    CHECK(evaluate(i3322, constant_table(3, 3, 1.0)) == -1.0);

    const BellExpression ch = build_ch();
    CHECK(evaluate(ch, constant_table(2, 2, 1.0)) == 0.0);

    CHECK_THROWS_AS(evaluate(i3322, constant_table(2, 2, 0.0)), std::invalid_argument);
}

TEST_CASE("local bounds of the named inequalities are zero") {
    for (int n = 2; n <= 5; ++n) {
        const auto [value, strategy] = local_bound(build_inn22(n));
        CHECK(value == 0.0);
        CHECK(evaluate(build_inn22(n), deterministic_table(strategy)) == 0.0);
    }
    CHECK(local_bound(build_ch()).value == 0.0);
    CHECK(local_bound(build_i4422()).value == 0.0);
}

TEST_CASE("local bound of a single positive joint coefficient") {
    BellExpression e(2, 2);
    e.cj(0, 0) = 1.0;
    const auto [value, strategy] = local_bound(e);
    CHECK(value == 1.0);
    CHECK(strategy.outA == std::vector<int>{1, 1});
    CHECK(strategy.outB == std::vector<int>{1, 1});
}

TEST_CASE("local bound matches brute force with tie-break") {
    std::mt19937 rng(314159);
    std::uniform_int_distribution<int> size(1, 3);
    for (int trial = 0; trial < 60; ++trial) {
        BellExpression e = random_expression(rng, size(rng), size(rng));
        if (trial % 3 == 0) {
            // integer coefficients make value ties common, exercising the tie-break
            for (double& c : e.cJoint) c = std::round(c);
            for (double& c : e.cA) c = std::round(c);
            for (double& c : e.cB) c = std::round(c);
        }
        const LocalBoundResult expected = brute_force_bound(e);
        const LocalBoundResult got = local_bound(e);
        CHECK(got.value == doctest::Approx(expected.value).epsilon(1e-14));
        CHECK(got.strategy == expected.strategy);
        CHECK(evaluate(e, deterministic_table(got.strategy)) == got.value);
    }
}

TEST_CASE("no deterministic table exceeds the local bound") {
    std::mt19937 rng(271828);
    for (int trial = 0; trial < 20; ++trial) {
        const BellExpression e = random_expression(rng, 3, 3);
        const double bound = local_bound(e).value;
        DeterministicStrategy s;
        s.outA.assign(3, +1);
        s.outB.assign(3, +1);
        for (uint64_t mask = 0; mask < 64; ++mask) {
            for (int x = 0; x < 3; ++x) s.outA[x] = (mask >> x) & 1 ? -1 : +1;
            for (int y = 0; y < 3; ++y) s.outB[y] = (mask >> (3 + y)) & 1 ? -1 : +1;
            CHECK(evaluate(e, deterministic_table(s)) <= bound + 1e-12);
        }
    }
}

TEST_CASE("local bound rejects oversized scenarios") {
    CHECK_THROWS_AS(local_bound(BellExpression(21, 2)), ScenarioTooLarge);
    CHECK_THROWS_AS(local_bound(BellExpression(2, 21)), ScenarioTooLarge);
}

TEST_CASE("deterministic tables have product structure") {
    DeterministicStrategy allPlus{{1, 1}, {1, 1}};
    CorrelationTable t = deterministic_table(allPlus);
    CHECK(t.joint == std::vector<double>{1, 1, 1, 1});
    CHECK(t.margA == std::vector<double>{1, 1});

    DeterministicStrategy allMinus{{-1, -1}, {-1, -1}};
    t = deterministic_table(allMinus);
    CHECK(t.joint == std::vector<double>{0, 0, 0, 0});

    DeterministicStrategy mixed{{1, -1}, {-1, 1}};
    t = deterministic_table(mixed);
    CHECK(t.joint == std::vector<double>{0, 1, 0, 0});
    CHECK(t.margA == std::vector<double>{1, 0});
    CHECK(t.margB == std::vector<double>{0, 1});
}

TEST_CASE("apply_detection scales the right entries") {
    CorrelationTable t(2, 2);
    t.at(1, 1) = 1.0;
    t.margA[1] = 1.0;
    t.margB[1] = 1.0;

    const CorrelationTable sym = apply_detection(t, DetectionScheme::symmetric(0.5));
    CHECK(sym.at(1, 1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sym.margA[1] == 0.5);
    CHECK(sym.margB[1] == 0.5);

    const CorrelationTable noop = apply_detection(t, DetectionScheme::asymmetric(1.0));
    CHECK(noop.joint == t.joint);
    CHECK(noop.margA == t.margA);
    CHECK(noop.margB == t.margB);

    CorrelationTable u(2, 2);
    u.margA[1] = 0.8;
    const CorrelationTable asym = apply_detection(u, DetectionScheme::asymmetric(0.5));
    CHECK(asym.margA[1] == 0.8);  // Alice's side is perfect
    CHECK(asym.margB[1] == 0.0);
}

TEST_CASE("modify_for_detection rescales marginal coefficients") {
    const double etaB = 0.4;
    const BellExpression asym = modify_for_detection(build_inn22(3), DetectionScheme::asymmetric(etaB));
    CHECK(asym.cA[0] == doctest::Approx(-1.0 / etaB).epsilon(1e-15));
    CHECK(asym.cB == build_inn22(3).cB);
    CHECK(asym.cJoint == build_inn22(3).cJoint);

    const double eta = 0.7;
    const BellExpression sym = modify_for_detection(build_ch(), DetectionScheme::symmetric(eta));
    CHECK(sym.cA[0] == doctest::Approx(-1.0 / eta).epsilon(1e-15));
    CHECK(sym.cB[0] == doctest::Approx(-1.0 / eta).epsilon(1e-15));

    const BellExpression same = modify_for_detection(build_ch(), DetectionScheme::none());
    CHECK(same.cA == build_ch().cA);

    BellExpression withConstant = build_ch();
    withConstant.constant = 1.0;
    CHECK_THROWS_AS(modify_for_detection(withConstant, DetectionScheme::symmetric(0.5)),
                    std::invalid_argument);
    CHECK_THROWS_AS(DetectionScheme::symmetric(0.0), std::invalid_argument);
}

TEST_CASE("detection duality identity") {
    std::mt19937 rng(8675309);
    std::uniform_real_distribution<double> eff(0.05, 1.0);
    for (int trial = 0; trial < 120; ++trial) {
        const int nA = 2 + trial % 3, nB = 2 + (trial / 3) % 3;
        const BellExpression e = random_expression(rng, nA, nB);
        const CorrelationTable t = random_table(rng, nA, nB);
        DetectionScheme s;
        switch (trial % 3) {
            case 0: s = DetectionScheme::none(); break;
            case 1: s = DetectionScheme::symmetric(eff(rng)); break;
            default: s = DetectionScheme::asymmetric(eff(rng)); break;
        }
        const double lhs = evaluate(modify_for_detection(e, s), t) * s.normalizer();
        const double rhs = evaluate(e, apply_detection(t, s));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("modified value is nondecreasing in the efficiency") {
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> eff(0.05, 1.0);
    const BellExpression exprs[] = {build_ch(), build_inn22(3), build_i4422()};
    for (int trial = 0; trial < 120; ++trial) {
        const BellExpression& e = exprs[trial % 3];
        const CorrelationTable t = random_table(rng, e.nA, e.nB);
        double lo = eff(rng), hi = eff(rng);
        if (lo > hi) std::swap(lo, hi);
        const bool symmetric = trial % 2 == 0;
        auto scheme = [&](double eta) {
            return symmetric ? DetectionScheme::symmetric(eta) : DetectionScheme::asymmetric(eta);
        };
        CHECK(evaluate(modify_for_detection(e, scheme(lo)), t) <=
              evaluate(modify_for_detection(e, scheme(hi)), t) + 1e-12);
    }
}

TEST_CASE("evaluate is linear in the table") {
    std::mt19937 rng(5551212);
    std::uniform_real_distribution<double> mix(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const BellExpression e = random_expression(rng, 3, 2);
        const CorrelationTable t1 = random_table(rng, 3, 2);
        const CorrelationTable t2 = random_table(rng, 3, 2);
        const double alpha = mix(rng);
        CorrelationTable blended(3, 2);
        for (size_t i = 0; i < blended.joint.size(); ++i) {
            blended.joint[i] = alpha * t1.joint[i] + (1 - alpha) * t2.joint[i];
        }
        for (int x = 0; x < 3; ++x) blended.margA[x] = alpha * t1.margA[x] + (1 - alpha) * t2.margA[x];
        for (int y = 0; y < 2; ++y) blended.margB[y] = alpha * t1.margB[y] + (1 - alpha) * t2.margB[y];
        CHECK(evaluate(e, blended) ==
              doctest::Approx(alpha * evaluate(e, t1) + (1 - alpha) * evaluate(e, t2)).epsilon(1e-12));
    }
}

TEST_CASE("ch blocks and i4422 assembly") {
    const BellExpression block = build_ch_sub(1, 2, 1, 2);
    CHECK(evaluate(block, constant_table(4, 4, 0.0)) == 0.0);
    CHECK(evaluate(block, constant_table(4, 4, 1.0)) == 0.0);
    CHECK(block.cj(0, 0) == 1.0);
    CHECK(block.cj(1, 0) == 1.0);
    CHECK(block.cj(0, 1) == 1.0);
    CHECK(block.cj(1, 1) == -1.0);
    CHECK(block.cA[0] == -1.0);
    CHECK(block.cB[0] == -1.0);
    CHECK_THROWS_AS(build_ch_sub(0, 2, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_ch_sub(1, 2, 1, 5), std::invalid_argument);

    const BellExpression i4422 = build_i4422();
    CHECK(evaluate(i4422, constant_table(4, 4, 0.0)) == 0.0);
    CHECK(i4422.cA == std::vector<double>{-1, 0, -1, 0});
    CHECK(i4422.cB == std::vector<double>{-1, 0, -1, 0});

    const double eta = 0.63;
    const BellExpression modified = modify_for_detection(i4422, DetectionScheme::symmetric(eta));
    CHECK(modified.cA[0] == doctest::Approx(-1.0 / eta).epsilon(1e-15));
    CHECK(modified.cA[1] == 0.0);
    CHECK(modified.cJoint == i4422.cJoint);
}

TEST_CASE("expression and table JSON round-trip") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const BellExpression e = random_expression(rng, 2 + trial % 3, 2);
        const nlohmann::json je = e;
        const BellExpression back = je.get<BellExpression>();
        CHECK(back.cJoint == e.cJoint);
        CHECK(back.cA == e.cA);
        CHECK(back.cB == e.cB);
        CHECK(back.constant == e.constant);

        const CorrelationTable t = random_table(rng, 2, 2 + trial % 3);
        const nlohmann::json jt = t;
        const CorrelationTable tback = jt.get<CorrelationTable>();
        CHECK(tback.joint == t.joint);
        CHECK(tback.margA == t.margA);
        CHECK(tback.margB == t.margB);
    }
    CHECK_THROWS(nlohmann::json::parse(R"({"nA":2,"nB":2,"cJoint":[1],"cA":[0,0],"cB":[0,0],"constant":0})")
                     .get<BellExpression>());
}
