#pragma once

// JSON forms of frequency sets, trigonometric polynomials, distributions and
// code families.

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "thinset/codes.hpp"
#include "thinset/error.hpp"
#include "thinset/spectrum.hpp"
#include "thinset/subgauss.hpp"

namespace thinset::io {

using json = nlohmann::json;

/// Malformed input: unreadable file, bad JSON or a wrong shape.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error("InputError", what) {}
};

/// Inline JSON when the text starts with '[' or '{', otherwise a file path.
inline json load_json(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) return json::parse(text);
    std::ifstream in(text);
    if (!in) throw InputError("cannot open '" + text + "'");
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("invalid JSON in '" + text + "': " + e.what());
  }
}

/// A list of integers or of integer vectors.
inline FreqSet freqset_from_json(const json& j, const GroupSpec& group) {
  if (!j.is_array()) throw InputError("a frequency set is a JSON list");
  FreqSet out(group);
  for (const auto& item : j) {
    std::vector<std::int64_t> coords;
    if (item.is_number_integer()) {
      coords.push_back(item.get<std::int64_t>());
    } else if (item.is_array()) {
      for (const auto& c : item) {
        if (!c.is_number_integer()) throw InputError("frequency coordinates must be integers");
        coords.push_back(c.get<std::int64_t>());
      }
    } else {
      throw InputError("frequencies must be integers or integer lists");
    }
    if (static_cast<int>(coords.size()) != group.dimension())
      throw InputError("frequency has " + std::to_string(coords.size()) + " coordinates, group needs " +
                       std::to_string(group.dimension()));
    out.push_back(Element(std::move(coords)));
  }
  return out;
}

inline json to_json(const FreqSet& A) {
  json out = json::array();
  for (const auto& e : A) out.push_back(e.coords);
  return out;
}

/// {"group": "torus:M" or {"kind": ..., "M": ...}, "coeffs": [[freq, re, im], ...]}.
inline TrigPoly trigpoly_from_json(const json& j) {
  if (!j.is_object() || !j.contains("group") || !j.contains("coeffs"))
    throw InputError("a polynomial needs 'group' and 'coeffs'");
  GroupSpec g = GroupSpec::integers();
  const auto& gj = j.at("group");
  if (gj.is_string()) {
    g = GroupSpec::parse(gj.get<std::string>());
  } else if (gj.is_object() && gj.contains("kind") && gj.contains("M")) {
    g = GroupSpec::parse(gj.at("kind").get<std::string>() + ":" + std::to_string(gj.at("M").get<std::int64_t>()));
  } else {
    throw InputError("group must be a string or {\"kind\", \"M\"}");
  }
  TrigPoly p(g);
  for (const auto& c : j.at("coeffs")) {
    if (!c.is_array() || c.size() < 2 || c.size() > 3 || !c[0].is_number_integer())
      throw InputError("coefficients are [freq, re] or [freq, re, im]");
    p.add(c[0].get<std::int64_t>(), cplx(c[1].get<double>(), c.size() == 3 ? c[2].get<double>() : 0.0));
  }
  return p;
}

inline json to_json(const TrigPoly& p) {
  json coeffs = json::array();
  for (const auto& [k, c] : p.coefficients()) coeffs.push_back({k, c.real(), c.imag()});
  return {{"group", p.group().describe()}, {"coeffs", coeffs}};
}

/// Built-in names (rademacher, normal-quadrature[:nodes], uniform-circle[:M]),
/// or JSON: a list of samples, or {"values": [...], "weights": [...]}.
inline DiscreteDistribution distribution_from_spec(const std::string& spec) {
  auto suffix = [&](const std::string& name, int fallback) {
    if (spec.size() == name.size()) return fallback;
    try {
      return std::stoi(spec.substr(name.size() + 1));
    } catch (const std::exception&) {
      throw InputError("bad parameter in '" + spec + "'");
    }
  };
  if (spec == "rademacher") return rademacher();
  if (spec.rfind("normal-quadrature", 0) == 0) return normal_quadrature(suffix("normal-quadrature", 200));
  if (spec.rfind("uniform-circle", 0) == 0) return uniform_circle(suffix("uniform-circle", 4096));
  const json j = load_json(spec);
  try {
    if (j.is_array()) return empirical_distribution(j.get<std::vector<double>>());
    if (j.is_object() && j.contains("values")) {
      const auto v = j.at("values").get<std::vector<double>>();
      std::vector<double> w;
      if (j.contains("weights")) {
        w = j.at("weights").get<std::vector<double>>();
      } else {
        w.assign(v.size(), v.empty() ? 0.0 : 1.0 / static_cast<double>(v.size()));
      }
      return SampledFunction(std::vector<cplx>(v.begin(), v.end()), w);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("distribution values must be numbers: ") + e.what());
  }
  throw InputError("unrecognised distribution '" + spec + "'");
}

/// Words as sorted index lists.
inline json to_json(const CodeFamily& f) {
  json words = json::array();
  for (Word w : f.words) words.push_back(word_members(w));
  return {{"n", f.n}, {"m", f.m}, {"k", f.k}, {"maximal", f.maximal}, {"words", words}};
}

inline CodeFamily codefamily_from_json(const json& j) {
  try {
    CodeFamily f{j.at("n").get<int>(), j.at("m").get<int>(), j.at("k").get<int>(), {}, false};
    for (const auto& w : j.at("words")) f.words.push_back(word_from(w.get<std::vector<int>>()));
    return f;
  } catch (const json::exception& e) {
    throw InputError(std::string("a code family needs n, m, k and words: ") + e.what());
  }
}

}  // namespace thinset::io
