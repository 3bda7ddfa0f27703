#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qclt/chain.hpp"
#include "qclt/error.hpp"

namespace qclt {

using json = nlohmann::ordered_json;

/// A parsed chain document:
///   {"states":[...], "Q":[[...]], "pi":[...]?, "observables":{"f":[...]}?}
/// An optional "meta" object is carried through untouched.
struct ChainDocument {
  FiniteChain chain;
  std::vector<std::pair<std::string, Vector>> observables;
  json meta;

  const Vector& observable(const std::string& name) const {
    for (const auto& [key, values] : observables)
      if (key == name) return values;
    throw Error(ErrorKind::BadArgument, "no observable named '" + name + "'");
  }
};

namespace detail {

inline std::string label_of(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return v.dump();
  throw Error(ErrorKind::BadDocument, "state labels must be strings/numbers");
}

inline Vector numeric_array(const json& v, const char* what) {
  if (!v.is_array()) {
    throw Error(ErrorKind::BadDocument, std::string(what) + " is not an array");
  }
  Vector out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) {
      throw Error(ErrorKind::BadDocument,
                  std::string(what) + " has a non-numeric entry");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace detail

inline ChainDocument load_chain(const json& doc,
                                double tol = kDefaultClassifyTol) {
  if (!doc.is_object()) {
    throw Error(ErrorKind::BadDocument, "chain document must be an object");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "states" && key != "Q" && key != "pi" && key != "observables" &&
        key != "meta") {
      throw Error(ErrorKind::BadDocument, "unknown key '" + key + "'");
    }
  }
  if (!doc.contains("Q")) throw Error(ErrorKind::BadDocument, "missing Q");

  const auto& q = doc.at("Q");
  if (!q.is_array()) throw Error(ErrorKind::BadDocument, "Q is not an array");
  std::vector<std::vector<double>> rows;
  for (const auto& r : q) rows.push_back(detail::numeric_array(r, "Q row"));
  for (const auto& r : rows) {
    if (r.size() != rows.size()) {
      throw Error(ErrorKind::DimensionMismatch, "Q must be square");
    }
  }
  Matrix kernel = Matrix::from_rows(rows);

  std::vector<std::string> labels;
  if (doc.contains("states")) {
    if (!doc.at("states").is_array()) {
      throw Error(ErrorKind::BadDocument, "states is not an array");
    }
    for (const auto& s : doc.at("states")) labels.push_back(detail::label_of(s));
  }
  std::optional<Vector> pi;
  if (doc.contains("pi")) pi = detail::numeric_array(doc.at("pi"), "pi");

  ChainDocument out{FiniteChain::create(std::move(labels), std::move(kernel),
                                        std::move(pi), tol),
                    {},
                    doc.contains("meta") ? doc.at("meta") : json::object()};
  if (doc.contains("observables")) {
    const auto& obs = doc.at("observables");
    if (!obs.is_object()) {
      throw Error(ErrorKind::BadDocument, "observables must be an object");
    }
    for (const auto& [name, values] : obs.items()) {
      Vector v = detail::numeric_array(values, "observable");
      if (v.size() != out.chain.size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "observable '" + name + "' length");
      }
      out.observables.emplace_back(name, std::move(v));
    }
  }
  return out;
}

inline ChainDocument load_chain_text(const std::string& text,
                                     double tol = kDefaultClassifyTol) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::BadDocument, e.what());
  }
  return load_chain(doc, tol);
}

inline ChainDocument load_chain_file(const std::string& path,
                                     double tol = kDefaultClassifyTol) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::BadDocument, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_chain_text(buf.str(), tol);
}

/// Serialises the kernel, π (always explicit) and observables.
inline json to_json(const FiniteChain& chain,
                    const std::vector<std::pair<std::string, Vector>>& obs,
                    const json& meta = json::object()) {
  json doc = json::object();
  doc["states"] = chain.labels();
  json q = json::array();
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto r = chain.kernel().row(i);
    q.push_back(Vector(r.begin(), r.end()));
  }
  doc["Q"] = std::move(q);
  doc["pi"] = chain.stationary();
  json o = json::object();
  for (const auto& [name, values] : obs) o[name] = values;
  doc["observables"] = std::move(o);
  if (!meta.empty()) doc["meta"] = meta;
  return doc;
}

}  // namespace qclt
