#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lossgain/core/errors.hpp"
#include "lossgain/core/polynomial.hpp"
#include "lossgain/registry.hpp"
#include "lossgain/system_model.hpp"
#include "lossgain/transforms.hpp"

namespace lossgain::io {

using nlohmann::json;

inline json matrix_to_json(const RealMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RealMatrix matrix_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) throw ParseError("expected a non-empty array of rows", 0, key);
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  RealMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ParseError("ragged matrix row " + std::to_string(r), 0, key);
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ParseError("matrix entry is not a number", 0, key);
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

inline json polynomial_to_json(const Polynomial& p) {
  json terms = json::array();
  for (const auto& [powers, c] : p.terms()) terms.push_back({{"coefficient", c}, {"powers", powers}});
  return {{"variables", p.variables()}, {"terms", std::move(terms)}};
}

inline Polynomial polynomial_from_json(const json& j, const std::string& key) {
  if (!j.contains("variables") || !j.contains("terms")) throw ParseError("polynomial needs variables and terms", 0, key);
  Polynomial p(j.at("variables").get<std::size_t>());
  for (const auto& t : j.at("terms")) p.add_term(t.at("coefficient").get<double>(), t.at("powers").get<std::vector<int>>());
  return p;
}

/**
 * @brief n, row-major matrices and named forms for the field map and potential.
 *
 * The named form is the zoo label with its parameters. Polynomial terms are
 * written too, so specs without a registry name still round-trip.
 */
inline json spec_to_json(const SystemSpec& spec) {
  json j;
  j["n"] = spec.n();
  j["mass_matrix"] = matrix_to_json(spec.mass_matrix());
  j["gauge_matrix"] = matrix_to_json(spec.gauge_matrix());
  const std::string form = spec.label().empty() ? "custom" : spec.label();
  j["field_map"] = {{"form", form}, {"parameters", spec.params()}};
  if (const auto* comps = spec.field_map().polynomial_components()) {
    json arr = json::array();
    for (const auto& c : *comps) arr.push_back(polynomial_to_json(c));
    j["field_map"]["polynomial"] = std::move(arr);
  }
  j["potential"] = {{"form", form}, {"parameters", spec.params()}};
  if (const auto* poly = spec.potential().polynomial_form()) j["potential"]["polynomial"] = polynomial_to_json(*poly);
  return j;
}

inline SystemSpec spec_from_json(const json& j) {
  for (const char* key : {"n", "mass_matrix", "gauge_matrix", "field_map", "potential"})
    if (!j.contains(key)) throw ParseError("missing key", 0, key);
  const auto n = j.at("n").get<std::size_t>();
  RealMatrix mass = matrix_from_json(j.at("mass_matrix"), "mass_matrix");
  RealMatrix gauge = matrix_from_json(j.at("gauge_matrix"), "gauge_matrix");
  if (mass.rows() != n) throw ParseError("mass_matrix does not match n", 0, "mass_matrix");
  const json& fm = j.at("field_map");
  const json& pot = j.at("potential");
  const std::string form = fm.value("form", std::string("custom"));
  const ParameterMap params = fm.value("parameters", ParameterMap{});
  if (fm.contains("polynomial") && pot.contains("polynomial")) {
    std::vector<Polynomial> comps;
    for (const auto& c : fm.at("polynomial")) comps.push_back(polynomial_from_json(c, "field_map"));
    if (comps.size() != n) throw ParseError("field_map has the wrong number of components", 0, "field_map");
    return SystemSpec(std::move(mass), std::move(gauge), FieldMap::polynomial(std::move(comps)),
                      Potential::polynomial(polynomial_from_json(pot.at("polynomial"), "potential")), form, params);
  }
  try {
    ModelInstance m = make_model(form, params);
    if (!m.spec) throw ParseError("model '" + form + "' has no Hamiltonian representation", 0, "field_map");
    return *m.spec;
  } catch (const ContractViolation& e) {
    throw ParseError(e.what(), 0, "field_map");
  }
}

inline json transform_to_json(const TransformReport& report) {
  return {{"region", report.region},
          {"eigenvalues", report.eigenvalues},
          {"rotation", matrix_to_json(report.rotation)},
          {"mass_diagonal", matrix_to_json(report.mass_diagonal)},
          {"scale", matrix_to_json(report.scale)},
          {"eta", matrix_to_json(report.eta)}};
}

}  // namespace lossgain::io
