#include "detloop/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace detloop {

void to_json(nlohmann::json& j, const BellExpression& e) {
    j = nlohmann::json{{"nA", e.nA},         {"nB", e.nB}, {"cJoint", e.cJoint},
                       {"cA", e.cA},         {"cB", e.cB}, {"constant", e.constant}};
    if (e.localBound) j["localBound"] = *e.localBound;
}

void from_json(const nlohmann::json& j, BellExpression& e) {
    j.at("nA").get_to(e.nA);
    j.at("nB").get_to(e.nB);
    j.at("cJoint").get_to(e.cJoint);
    j.at("cA").get_to(e.cA);
    j.at("cB").get_to(e.cB);
    j.at("constant").get_to(e.constant);
    e.localBound.reset();
    if (j.contains("localBound")) e.localBound = j.at("localBound").get<double>();
    if (e.nA < 1 || e.nB < 1 ||
        e.cJoint.size() != static_cast<size_t>(e.nA) * e.nB ||
        e.cA.size() != static_cast<size_t>(e.nA) || e.cB.size() != static_cast<size_t>(e.nB)) {
        throw std::invalid_argument("BellExpression JSON has inconsistent dimensions");
    }
}

void to_json(nlohmann::json& j, const CorrelationTable& t) {
    j = nlohmann::json{
        {"nA", t.nA}, {"nB", t.nB}, {"joint", t.joint}, {"margA", t.margA}, {"margB", t.margB}};
}

void from_json(const nlohmann::json& j, CorrelationTable& t) {
    j.at("nA").get_to(t.nA);
    j.at("nB").get_to(t.nB);
    j.at("joint").get_to(t.joint);
    j.at("margA").get_to(t.margA);
    j.at("margB").get_to(t.margB);
    if (t.nA < 1 || t.nB < 1 ||
        t.joint.size() != static_cast<size_t>(t.nA) * t.nB ||
        t.margA.size() != static_cast<size_t>(t.nA) || t.margB.size() != static_cast<size_t>(t.nB)) {
        throw std::invalid_argument("CorrelationTable JSON has inconsistent dimensions");
    }
}

void to_json(nlohmann::json& j, const SchmidtState& s) {
    j = nlohmann::json{{"dim", s.dim}, {"lambda", s.lambda}, {"noise", s.noise}};
}

void from_json(const nlohmann::json& j, SchmidtState& s) {
    j.at("dim").get_to(s.dim);
    j.at("lambda").get_to(s.lambda);
    s.noise = j.value("noise", 0.0);
    if (s.dim < 1 || s.lambda.size() != static_cast<size_t>(s.dim)) {
        throw std::invalid_argument("SchmidtState JSON has inconsistent dimensions");
    }
}

void to_json(nlohmann::json& j, const MeasurementSettings& m) {
    j = nlohmann::json{{"dim", m.dim}, {"vectors", m.vectors}};
}

void from_json(const nlohmann::json& j, MeasurementSettings& m) {
    j.at("dim").get_to(m.dim);
    j.at("vectors").get_to(m.vectors);
    for (const auto& v : m.vectors) {
        if (v.size() != static_cast<size_t>(m.dim)) {
            throw std::invalid_argument("MeasurementSettings JSON has inconsistent dimensions");
        }
    }
}

void to_json(nlohmann::json& j, const DeterministicStrategy& s) {
    j = nlohmann::json{{"outA", s.outA}, {"outB", s.outB}};
}

void from_json(const nlohmann::json& j, DeterministicStrategy& s) {
    j.at("outA").get_to(s.outA);
    j.at("outB").get_to(s.outB);
    for (int o : s.outA) {
        if (o != 1 && o != -1) throw std::invalid_argument("strategy outputs must be +1 or -1");
    }
    for (int o : s.outB) {
        if (o != 1 && o != -1) throw std::invalid_argument("strategy outputs must be +1 or -1");
    }
}

void to_json(nlohmann::json& j, const ThresholdResult& r) {
    j = nlohmann::json{{"eta", r.eta},
                       {"value_at_eta", r.valueAtEta},
                       {"iterations", r.iterations},
                       {"state", r.state},
                       {"settingsA", r.settingsA},
                       {"settingsB", r.settingsB}};
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

void save_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace detloop
