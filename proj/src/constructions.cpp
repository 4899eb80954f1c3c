#include "detloop/constructions.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace detloop {

namespace {

std::vector<double> ladder(int n, double first2, double second2) {
    // first2/second2 are the squared k=0 and k=1 entries; the shared recursion
    // multiplies squares by (1 - 1/(n-k)^2) from k=1 on.
    std::vector<double> out(n);
    out[0] = std::sqrt(first2);
    if (n >= 2) out[1] = std::sqrt(second2);
    double sq = second2;
    for (int k = 1; k + 1 < n; ++k) {
        const double f = 1.0 - 1.0 / (static_cast<double>(n - k) * (n - k));
        sq *= f;
        out[k + 1] = std::sqrt(sq);
    }
    return out;
}

double norm2d(const std::array<double, 2>& v) { return std::hypot(v[0], v[1]); }

std::vector<double> normalized(std::vector<double> v) {
    double norm2 = 0.0;
    for (double c : v) norm2 += c * c;
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& c : v) c *= inv;
    return v;
}

}  // namespace

RecursionCoefficients recursion_coefficients(int n, double q0) {
    if (n < 2) throw std::invalid_argument("recursion_coefficients requires n >= 2");
    if (q0 < 0.0 || q0 > 1.0) throw std::invalid_argument("q0 must lie in [0, 1]");
    RecursionCoefficients rc;
    rc.p = ladder(n, 1.0 / n, (n - 1.0) / n);
    rc.q = ladder(n, q0 * q0, 1.0 - q0 * q0);
    return rc;
}

std::pair<MeasurementSettings, MeasurementSettings> asymmetric_settings(int n, double q0) {
    const RecursionCoefficients rc = recursion_coefficients(n, q0);

    // Rows follow a shared staircase: coefficient c[0] at the last slot,
    // c[j]/(n-j) filling slots n-1-j, and the step entry at the front of the
    // staircase. Row sign rules differ only between the last row and the rest.
    auto staircase = [n](const std::vector<double>& c, int steps, double stepEntry) {
        std::vector<double> v(n, 0.0);
        v[n - 1] = c[0];
        for (int j = 1; j <= steps; ++j) v[n - 1 - j] = c[j] / (n - j);
        v[n - 2 - steps] = stepEntry;
        return v;
    };

    MeasurementSettings alice{n, {}};
    MeasurementSettings bob{n, {}};
    alice.vectors.reserve(n);
    bob.vectors.reserve(n);

    std::vector<double> a1(n, 0.0);
    a1[n - 1] = 1.0;
    alice.vectors.push_back(std::move(a1));
    for (int r = 1; r <= n - 2; ++r) {
        alice.vectors.push_back(staircase(rc.p, r, -rc.p[r + 1]));
    }
    {
        std::vector<double> last(n, 0.0);
        last[n - 1] = rc.p[0];
        for (int j = 1; j <= n - 2; ++j) last[n - 1 - j] = rc.p[j] / (n - j);
        last[0] = rc.p[n - 1];
        alice.vectors.push_back(std::move(last));
    }

    for (int r = 0; r <= n - 2; ++r) {
        bob.vectors.push_back(staircase(rc.q, r, -rc.q[r + 1]));
    }
    {
        std::vector<double> last(n, 0.0);
        last[n - 1] = rc.q[0];
        for (int j = 1; j <= n - 2; ++j) last[n - 1 - j] = rc.q[j] / (n - j);
        last[0] = rc.q[n - 1];
        bob.vectors.push_back(std::move(last));
    }
    return {std::move(alice), std::move(bob)};
}

double optimal_epsilon(int n, double q0) {
    if (n < 2) throw std::invalid_argument("optimal_epsilon requires n >= 2");
    if (q0 < 0.0 || q0 > 1.0) throw std::invalid_argument("q0 must lie in [0, 1]");
    const double q02 = q0 * q0;
    const double denom = 1.0 + ((n - 1.0) * (n - 1.0) - 1.0) * q02;
    return std::sqrt((1.0 - q02) / denom);
}

double asymmetric_value_closed_form(int n, double q0, double etaB) {
    if (!(etaB > 0.0) || etaB > 1.0) throw std::invalid_argument("etaB must lie in (0, 1]");
    const double eps = optimal_epsilon(n, q0);
    return eps * eps * (-1.0 / etaB + q0 * q0 * n);
}

double asymmetric_threshold(int n, double q0) {
    if (q0 <= 0.0) throw std::invalid_argument("asymmetric_threshold requires q0 > 0");
    return 1.0 / (n * q0 * q0);
}

std::pair<MeasurementSettings, MeasurementSettings> ch_settings(double p1, double p2) {
    if (std::abs(p1) > 1.0 || std::abs(p2) > 1.0) {
        throw std::invalid_argument("ch_settings requires p1, p2 in [-1, 1]");
    }
    const double u = std::sqrt(1.0 - p1 * p1);
    const double v = std::sqrt(1.0 - p2 * p2);
    MeasurementSettings alice{2, {{-u, p1}, {v, p2}}};
    MeasurementSettings bob{2, {{u, p1}, {-v, p2}}};
    return {std::move(alice), std::move(bob)};
}

std::pair<MeasurementSettings, MeasurementSettings> ququart_settings(const QuquartParams& params) {
    if (std::abs(norm2d(params.p1) - norm2d(params.q1)) > 1e-9 ||
        std::abs(norm2d(params.p2) - norm2d(params.q2)) > 1e-9) {
        throw std::invalid_argument("ququart_settings: tail vector norms |p_i| and |q_i| differ");
    }
    const double u = params.u, v = params.v;
    auto vec = [](double c0, double c1, const std::array<double, 2>& tail) {
        return normalized({c0, c1, tail[0], tail[1]});
    };
    MeasurementSettings alice{4,
                              {vec(-u, -u, params.p1), vec(-v, v, params.p2),
                               vec(u, u, params.p1), vec(v, -v, params.p2)}};
    MeasurementSettings bob{4,
                            {vec(-u, u, params.q1), vec(-v, -v, params.q2),
                             vec(u, -u, params.q1), vec(v, v, params.q2)}};
    return {std::move(alice), std::move(bob)};
}

QuquartParams ququart_maxent_params() {
    QuquartParams p;
    p.p1 = {0.9159, 0.0499};
    p.p2 = {0.5625, -0.3035};
    p.q1 = {0.9159, -0.0499};
    p.q2 = {0.5625, 0.3035};
    const double n1 = norm2d(p.p1);
    const double n2 = norm2d(p.p2);
    p.u = std::sqrt((1.0 - n1 * n1) / 2.0);
    p.v = std::sqrt((1.0 - n2 * n2) / 2.0);
    return p;
}

QuquartParams ququart_small_epsilon_params(double epsilon) {
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must lie in [0, 1]");
    QuquartParams p;
    p.u = std::sqrt(3.0 / 8.0) * (std::sqrt(5.0) - 1.0) * epsilon;
    p.v = 0.5;
    const double delta = std::pow(0.75, 0.25) * std::sqrt(epsilon);
    const double invRoot2 = 1.0 / std::numbers::sqrt2;
    p.p1 = {0.0, 1.0};
    p.q1 = {0.0, 1.0};
    p.p2 = {delta, invRoot2};
    p.q2 = {-delta, invRoot2};
    return p;
}

namespace {

struct ParsedSpec {
    std::string name;
    std::vector<double> args;
};

ParsedSpec parse_spec(const std::string& spec) {
    ParsedSpec out;
    const auto open = spec.find('(');
    if (open == std::string::npos) {
        out.name = spec;
        return out;
    }
    if (spec.back() != ')') throw std::invalid_argument("malformed construction spec: " + spec);
    out.name = spec.substr(0, open);
    std::stringstream args(spec.substr(open + 1, spec.size() - open - 2));
    std::string item;
    while (std::getline(args, item, ',')) {
        size_t pos = 0;
        const double value = std::stod(item, &pos);
        if (pos != item.find_last_not_of(" \t") + 1 && pos < item.size()) {
            throw std::invalid_argument("malformed construction argument: " + item);
        }
        out.args.push_back(value);
    }
    return out;
}

double pick(const std::vector<double>& args, size_t idx, std::optional<double> flag,
            std::optional<double> fallback, const char* what) {
    if (idx < args.size()) return args[idx];
    if (flag) return *flag;
    if (fallback) return *fallback;
    throw std::invalid_argument(std::string("missing construction parameter: ") + what);
}

}  // namespace

Construction lookup_construction(const std::string& spec, std::optional<double> n,
                                 std::optional<double> q0, std::optional<double> epsilon) {
    const ParsedSpec parsed = parse_spec(spec);
    Construction c;
    c.name = parsed.name;

    if (parsed.name == "inn22") {
        const int nn = static_cast<int>(pick(parsed.args, 0, n, 3.0, "n"));
        const double q = pick(parsed.args, 1, q0, std::sqrt(0.9), "q0");
        c.expr = build_inn22(nn);
        c.schemeKind = DetectionScheme::Kind::Asymmetric;
        c.state = schmidt_from_epsilon(nn, optimal_epsilon(nn, q));
        std::tie(c.settingsA, c.settingsB) = asymmetric_settings(nn, q);
        return c;
    }
    if (parsed.name == "ch-eberhard-maxent") {
        c.expr = build_ch();
        c.schemeKind = DetectionScheme::Kind::Symmetric;
        c.state = schmidt_from_epsilon(2, 1.0 / std::numbers::sqrt2);
        std::tie(c.settingsA, c.settingsB) =
            ch_settings(std::cos(std::numbers::pi / 16.0), std::cos(3.0 * std::numbers::pi / 16.0));
        return c;
    }
    if (parsed.name == "ch-eberhard-partial") {
        const double eps = pick(parsed.args, 0, epsilon, 1e-3, "epsilon");
        c.expr = build_ch();
        c.schemeKind = DetectionScheme::Kind::Symmetric;
        c.state = schmidt_from_epsilon(2, eps);
        std::tie(c.settingsA, c.settingsB) = ch_settings(1.0, std::sqrt(1.0 - eps));
        return c;
    }
    if (parsed.name == "i4422-maxent") {
        c.expr = build_i4422();
        c.schemeKind = DetectionScheme::Kind::Symmetric;
        c.state = schmidt_from_epsilon(4, 0.5);
        std::tie(c.settingsA, c.settingsB) = ququart_settings(ququart_maxent_params());
        return c;
    }
    if (parsed.name == "i4422-smalleps") {
        const double eps = pick(parsed.args, 0, epsilon, 1e-3, "epsilon");
        c.expr = build_i4422();
        c.schemeKind = DetectionScheme::Kind::Symmetric;
        c.state = schmidt_from_epsilon(4, eps);
        std::tie(c.settingsA, c.settingsB) = ququart_settings(ququart_small_epsilon_params(eps));
        return c;
    }
    throw std::invalid_argument("unknown construction: " + parsed.name);
}

std::vector<std::string> construction_names() {
    return {"inn22", "ch-eberhard-maxent", "ch-eberhard-partial", "i4422-maxent", "i4422-smalleps"};
}

}  // namespace detloop
