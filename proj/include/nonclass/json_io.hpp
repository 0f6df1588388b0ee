#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nonclass/bochner.hpp"
#include "nonclass/errors.hpp"
#include "nonclass/homodyne.hpp"
#include "nonclass/states.hpp"

namespace nonclass {

namespace detail {

inline double require_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw validation_error(std::string("state spec: missing numeric field \"") +
                               key + "\"");
    return j[key].get<double>();
}

inline StateSpec parse_state_impl(const nlohmann::json& j, int depth) {
    if (depth > max_mixture_depth)
        throw validation_error("state spec: mixture nesting deeper than " +
                               std::to_string(max_mixture_depth));
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw validation_error("state spec: expected an object with a \"type\" string");
    const std::string type = j["type"].get<std::string>();

    if (type == "fock") {
        if (!j.contains("n") || !j["n"].is_number_integer())
            throw validation_error("state spec: \"fock\" requires integer \"n\"");
        const long long n = j["n"].get<long long>();
        if (n < 0) throw validation_error("state spec: \"fock\" requires n >= 0");
        return StateSpec::fock(static_cast<int>(n));
    }
    if (type == "coherent")
        return StateSpec::coherent(
            Complex(require_number(j, "re"), require_number(j, "im")));
    if (type == "thermal") {
        const double nbar = require_number(j, "nbar");
        if (nbar < 0.0) throw validation_error("state spec: \"thermal\" requires nbar >= 0");
        return StateSpec::thermal(nbar);
    }
    if (type == "mixture") {
        if (!j.contains("components") || !j["components"].is_array() ||
            j["components"].empty())
            throw validation_error(
                "state spec: \"mixture\" requires a nonempty \"components\" array");
        std::vector<Component> parts;
        for (const auto& entry : j["components"]) {
            if (!entry.is_object() || !entry.contains("state"))
                throw validation_error(
                    "state spec: mixture component needs \"weight\" and \"state\"");
            const double weight = require_number(entry, "weight");
            parts.push_back({weight, parse_state_impl(entry["state"], depth + 1)});
        }
        return StateSpec::mixture(std::move(parts));
    }
    throw validation_error("state spec: unknown type \"" + type + "\"");
}

} // namespace detail

inline StateSpec parse_state_spec(const nlohmann::json& j) {
    return detail::parse_state_impl(j, 1);
}

inline StateSpec parse_state_spec(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error(std::string("state spec: malformed JSON: ") + e.what());
    }
    return parse_state_spec(j);
}

// Point sets for the Bochner test: a JSON array of {"re": x, "im": y}.
inline std::vector<Complex> parse_points(const nlohmann::json& j) {
    if (!j.is_array() || j.empty())
        throw validation_error("points: expected a nonempty JSON array");
    std::vector<Complex> out;
    for (const auto& entry : j) {
        if (!entry.is_object())
            throw validation_error("points: entries must be {\"re\":..., \"im\":...}");
        out.emplace_back(detail::require_number(entry, "re"),
                         detail::require_number(entry, "im"));
    }
    return out;
}

inline std::vector<Complex> parse_points(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error(std::string("points: malformed JSON: ") + e.what());
    }
    return parse_points(j);
}

inline nlohmann::json to_json(Complex z) {
    return nlohmann::json{{"re", z.real()}, {"im", z.imag()}};
}

inline nlohmann::json to_json(const BochnerReport& report) {
    nlohmann::json points = nlohmann::json::array();
    for (Complex p : report.points) points.push_back(to_json(p));
    nlohmann::json matrix = nlohmann::json::array();
    for (int r = 0; r < report.matrix.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < report.matrix.cols(); ++c)
            row.push_back(to_json(report.matrix(r, c)));
        matrix.push_back(std::move(row));
    }
    return nlohmann::json{
        {"points", std::move(points)},
        {"matrix", std::move(matrix)},
        {"min_eigenvalue", report.min_eigenvalue},
        {"verdict", to_string(report.verdict)},
        {"worst_minor",
         {{"indices", report.worst_minor_indices},
          {"determinant", report.worst_minor_determinant}}},
    };
}

inline nlohmann::json to_json(const SeriesResult& series) {
    return nlohmann::json{
        {"value", series.value},
        {"terms_used", series.terms_used},
        {"ratio", series.ratio},
        {"converged", series.converged},
        {"truncation_bound", series.truncation_bound},
    };
}

inline nlohmann::json to_json(const ShotNoiseEstimate& est) {
    return nlohmann::json{
        {"estimate", est.estimate},
        {"std_error", est.std_error},
        {"shots", est.shots},
    };
}

} // namespace nonclass
