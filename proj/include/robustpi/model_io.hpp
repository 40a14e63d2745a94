#pragma once

#include "robustpi/model.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace robustpi {

/*
 * Model file format (JSON):
 *
 *   {
 *     "states": 2, "actions": 1, "discount": "1/2",
 *     "cost": ["1/1", "0/1"],
 *     "transitions": [
 *       {"state": 0, "action": 0, "successors": [1], "nominal": ["1/1"],
 *        "radius": "0/1", "norm": "l1"},
 *       ...
 *     ]
 *   }
 *
 * Every rational is a "num/den" string. A transition may carry an extra
 * "cost" entry, added to the state cost when that action is played; it is
 * written only when non-zero. Serialization is canonical: fixed key order,
 * transitions sorted by (state, action), lowest-terms rationals.
 */

namespace detail {

using ojson = nlohmann::ordered_json;

inline Rational rational_field(const ojson& node, const std::string& path) {
    if (!node.is_string())
        throw ModelError(path + ": expected a \"num/den\" string");
    try {
        return parse_rational(node.get<std::string>());
    } catch (const ModelError& e) {
        throw ModelError(path + ": " + e.what());
    }
}

inline std::size_t count_field(const ojson& node, const std::string& path) {
    if (!node.is_number_unsigned())
        throw ModelError(path + ": expected a non-negative integer");
    return node.get<std::size_t>();
}

inline const ojson& member(const ojson& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ModelError(path + ": missing field '" + key + "'");
    return *it;
}

} // namespace detail

/// Parses the model file text; throws ModelError with a location on failure.
/// The returned model is structurally complete but not yet validated.
inline Rmdp parse_model(const std::string& text) {
    using detail::ojson;
    ojson doc;
    try {
        doc = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ModelError("model file: top level must be an object");

    Rmdp model;
    const std::size_t n = detail::count_field(detail::member(doc, "states", "$"), "$.states");
    model.n_actions = detail::count_field(detail::member(doc, "actions", "$"), "$.actions");
    if (n == 0 || model.n_actions == 0)
        throw ModelError("$: states and actions must be positive");
    model.discount = detail::rational_field(detail::member(doc, "discount", "$"), "$.discount");

    const auto& cost = detail::member(doc, "cost", "$");
    if (!cost.is_array() || cost.size() != n)
        throw ModelError("$.cost: expected an array of " + std::to_string(n) + " rationals");
    for (std::size_t s = 0; s < n; ++s)
        model.cost.push_back(detail::rational_field(cost[s], "$.cost[" + std::to_string(s) + "]"));

    const auto& transitions = detail::member(doc, "transitions", "$");
    if (!transitions.is_array())
        throw ModelError("$.transitions: expected an array");
    model.rows.resize(n * model.n_actions);
    std::vector<bool> seen(model.rows.size(), false);
    std::vector<Rational> action_cost(model.rows.size(), Rational(0));
    bool any_action_cost = false;

    for (std::size_t k = 0; k < transitions.size(); ++k) {
        const std::string path = "$.transitions[" + std::to_string(k) + "]";
        const auto& t = transitions[k];
        if (!t.is_object())
            throw ModelError(path + ": expected an object");
        const std::size_t s = detail::count_field(detail::member(t, "state", path), path + ".state");
        const std::size_t a = detail::count_field(detail::member(t, "action", path), path + ".action");
        if (s >= n || a >= model.n_actions)
            throw ModelError(path + ": state/action index out of range");
        const std::size_t idx = model.index(s, a);
        if (seen[idx])
            throw ModelError(path + ": duplicate entry for (" + std::to_string(s) + "," +
                             std::to_string(a) + ")");
        seen[idx] = true;

        Row& row = model.rows[idx];
        const auto& succ = detail::member(t, "successors", path);
        if (!succ.is_array())
            throw ModelError(path + ".successors: expected an array");
        for (std::size_t j = 0; j < succ.size(); ++j)
            row.successors.push_back(
                detail::count_field(succ[j], path + ".successors[" + std::to_string(j) + "]"));
        const auto& nominal = detail::member(t, "nominal", path);
        if (!nominal.is_array())
            throw ModelError(path + ".nominal: expected an array");
        for (std::size_t j = 0; j < nominal.size(); ++j)
            row.uncertainty.nominal.push_back(
                detail::rational_field(nominal[j], path + ".nominal[" + std::to_string(j) + "]"));
        row.uncertainty.radius = detail::rational_field(detail::member(t, "radius", path), path + ".radius");
        const auto& norm = detail::member(t, "norm", path);
        if (!norm.is_string())
            throw ModelError(path + ".norm: expected a string");
        try {
            row.uncertainty.norm = parse_norm(norm.get<std::string>());
        } catch (const ModelError& e) {
            throw ModelError(path + ".norm: " + e.what());
        }
        if (auto it = t.find("cost"); it != t.end()) {
            action_cost[idx] = detail::rational_field(*it, path + ".cost");
            any_action_cost = any_action_cost || action_cost[idx] != 0;
        }
    }
    for (std::size_t idx = 0; idx < seen.size(); ++idx)
        if (!seen[idx])
            throw ModelError("$.transitions: no entry for (" + std::to_string(idx / model.n_actions) +
                             "," + std::to_string(idx % model.n_actions) + ")");
    if (any_action_cost)
        model.action_cost = std::move(action_cost);
    return model;
}

inline std::string serialize_model(const Rmdp& model) {
    using detail::ojson;
    ojson doc;
    doc["states"] = model.n_states();
    doc["actions"] = model.n_actions;
    doc["discount"] = to_string(model.discount);
    ojson cost = ojson::array();
    for (const auto& c : model.cost)
        cost.push_back(to_string(c));
    doc["cost"] = std::move(cost);
    ojson transitions = ojson::array();
    for (std::size_t s = 0; s < model.n_states(); ++s) {
        for (std::size_t a = 0; a < model.n_actions; ++a) {
            const Row& row = model.row(s, a);
            ojson t;
            t["state"] = s;
            t["action"] = a;
            t["successors"] = row.successors;
            ojson nominal = ojson::array();
            for (const auto& p : row.uncertainty.nominal)
                nominal.push_back(to_string(p));
            t["nominal"] = std::move(nominal);
            t["radius"] = to_string(row.uncertainty.radius);
            t["norm"] = to_string(row.uncertainty.norm);
            if (!model.action_cost.empty() && model.action_cost[model.index(s, a)] != 0)
                t["cost"] = to_string(model.action_cost[model.index(s, a)]);
            transitions.push_back(std::move(t));
        }
    }
    doc["transitions"] = std::move(transitions);
    return doc.dump(2) + "\n";
}

inline std::string serialize_model(const Rmc& chain) { return serialize_model(as_rmdp(chain)); }

/// Reads a one-action model file as a chain; action costs fold into state costs.
inline Rmc to_rmc(const Rmdp& model) {
    if (model.n_actions != 1)
        throw ModelError("expected a single-action model (actions: 1)");
    return induce_rmc(model, AgentPolicy(model.n_states(), 0));
}

inline Rmdp load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ModelError("cannot open model file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str());
}

} // namespace robustpi
