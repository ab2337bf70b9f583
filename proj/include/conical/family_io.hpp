#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "conical/family.hpp"

namespace conical {

// Family files are JSON objects:
//   { "n": 2, "d": 2, "symmetry": "RealSymmetric", "name": "...",
//     "terms": [ { "row": 1, "col": 2, "re": 1.0, "im": 0.0, "kind": "monomial",
//                  "wavevector": [0, 0], "phase": 0.0, "exponents": [0, 1] } ] }
// Indices are 1-based. Omitted wavevector/exponents default to zero vectors,
// omitted im/phase to 0.

namespace detail {

template <typename T>
T required(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw SchemaError(where + "missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(where + "field '" + key + "' has the wrong type: " + e.what());
  }
}

template <typename T>
T optional_field(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(where + "field '" + key + "' has the wrong type: " + e.what());
  }
}

inline std::size_t one_based_index(const nlohmann::json& t, const char* key, const std::string& where) {
  const auto v = required<long long>(t, key, where);
  if (v < 1) throw SchemaError(where + "'" + key + "' must be >= 1 (indices are 1-based)");
  return static_cast<std::size_t>(v - 1);
}

}  // namespace detail

inline MatrixFamily family_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("family document must be a JSON object");
  const auto n = detail::required<long long>(doc, "n", "");
  const auto d = detail::required<long long>(doc, "d", "");
  if (n < 1 || d < 1) throw SchemaError("'n' and 'd' must be positive");
  const auto symmetry = symmetry_from_string(detail::required<std::string>(doc, "symmetry", ""));
  const auto name = detail::optional_field<std::string>(doc, "name", "", "");
  if (!doc.contains("terms") || !doc.at("terms").is_array()) throw SchemaError("'terms' must be an array");

  std::vector<TermSpec> terms;
  std::size_t k = 0;
  for (const auto& jt : doc.at("terms")) {
    const std::string where = "term " + std::to_string(k++) + ": ";
    if (!jt.is_object()) throw SchemaError(where + "must be an object");
    TermSpec t;
    t.row = detail::one_based_index(jt, "row", where);
    t.col = detail::one_based_index(jt, "col", where);
    t.coefficient = {detail::required<double>(jt, "re", where), detail::optional_field<double>(jt, "im", 0.0, where)};
    t.kind = term_kind_from_string(detail::required<std::string>(jt, "kind", where));
    t.phase = detail::optional_field<double>(jt, "phase", 0.0, where);
    t.wavevector = detail::optional_field<std::vector<int>>(jt, "wavevector", {}, where);
    const auto exps = detail::optional_field<std::vector<long long>>(jt, "exponents", {}, where);
    for (auto e : exps) {
      if (e < 0) throw SchemaError(where + "exponents must be nonnegative");
      t.exponents.push_back(static_cast<unsigned>(e));
    }
    terms.push_back(std::move(t));
  }
  return MatrixFamily::from_terms(static_cast<std::size_t>(n), static_cast<std::size_t>(d), symmetry,
                                  std::move(terms), name);
}

/// Parses a family-file document.
inline MatrixFamily load_family(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("family document is not valid JSON: ") + e.what());
  }
  return family_from_json(doc);
}

inline nlohmann::json family_to_json(const MatrixFamily& family) {
  nlohmann::json doc;
  doc["n"] = family.n();
  doc["d"] = family.d();
  doc["symmetry"] = std::string(to_string(family.symmetry()));
  doc["name"] = family.name();
  auto& terms = doc["terms"] = nlohmann::json::array();
  for (const auto& t : family.terms()) {
    terms.push_back({{"row", t.row + 1},
                     {"col", t.col + 1},
                     {"re", t.coefficient.real()},
                     {"im", t.coefficient.imag()},
                     {"kind", std::string(to_string(t.kind))},
                     {"wavevector", t.wavevector},
                     {"phase", t.phase},
                     {"exponents", t.exponents}});
  }
  return doc;
}

inline std::string serialize_family(const MatrixFamily& family) { return family_to_json(family).dump(2); }

}  // namespace conical
