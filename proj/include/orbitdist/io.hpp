#pragma once

// JSON forms of the library types. Parsing is strict: any shape or type
// mismatch raises SchemaError.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "orbitdist/distances.hpp"
#include "orbitdist/errors.hpp"
#include "orbitdist/measures.hpp"
#include "orbitdist/razak.hpp"
#include "orbitdist/weyl_path.hpp"

namespace orbitdist::io {

using json = nlohmann::ordered_json;

namespace detail {

inline const json& field(const json& j, const char* name) {
  if (!j.is_object()) throw SchemaError("expected an object");
  const auto it = j.find(name);
  if (it == j.end()) throw SchemaError(std::string("missing field \"") + name + "\"");
  return *it;
}

inline double number(const json& j, const char* what) {
  if (!j.is_number()) throw SchemaError(std::string(what) + " must be a number");
  return j.get<double>();
}

inline std::size_t count(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw SchemaError(std::string(what) + " must be a non-negative integer");
  return j.get<std::size_t>();
}

}  // namespace detail

// {"dim": d, "entries": [[[re, im], ...], ...]}, row-major.
inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return {{"dim", m.rows()}, {"entries", std::move(rows)}};
}
inline json to_json(const Hermitian& h) { return to_json(h.matrix()); }
inline json to_json(const Unitary& u) { return to_json(u.matrix()); }

inline Matrix matrix_from_json(const json& j) {
  const std::size_t dim = detail::count(detail::field(j, "dim"), "dim");
  const json& entries = detail::field(j, "entries");
  if (!entries.is_array() || entries.size() != dim) throw SchemaError("entries must have dim rows");
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const json& row = entries[i];
    if (!row.is_array() || row.size() != dim) throw SchemaError("every row must have dim entries");
    for (std::size_t k = 0; k < dim; ++k) {
      const json& z = row[k];
      if (!z.is_array() || z.size() != 2) throw SchemaError("entries are [re, im] pairs");
      m(i, k) = complex(detail::number(z[0], "re"), detail::number(z[1], "im"));
    }
  }
  return m;
}

inline Hermitian hermitian_from_json(const json& j) { return Hermitian(matrix_from_json(j)); }
inline Unitary unitary_from_json(const json& j) { return Unitary(matrix_from_json(j)); }

inline json to_json(const AtomicMeasure& mu) {
  json atoms = json::array();
  for (const Atom& a : mu.atoms()) atoms.push_back({a.location, a.weight});
  return {{"atoms", std::move(atoms)}};
}

inline AtomicMeasure measure_from_json(const json& j) {
  const json& atoms = detail::field(j, "atoms");
  if (!atoms.is_array()) throw SchemaError("atoms must be an array");
  std::vector<Atom> out;
  for (const json& a : atoms) {
    if (!a.is_array() || a.size() != 2) throw SchemaError("atoms are [location, weight] pairs");
    out.push_back({detail::number(a[0], "location"), detail::number(a[1], "weight")});
  }
  return AtomicMeasure(std::move(out));
}

inline json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

inline json to_json(const DistanceReport& r) {
  return {{"delta", r.delta},
          {"d_w", r.d_w},
          {"d_p", optional_number(r.d_p)},
          {"d_u_upper", optional_number(r.d_u_upper)},
          {"d_u_lower", r.d_u_lower},
          {"witness", r.witness ? to_json(*r.witness) : json(nullptr)}};
}

inline json to_json(const RazakParams& p) {
  return {{"k", p.k}, {"n", p.n}, {"N", p.grid}, {"gamma", p.gamma}};
}

inline RazakParams params_from_json(const json& j) {
  RazakParams p;
  p.k = detail::count(detail::field(j, "k"), "k");
  p.n = detail::count(detail::field(j, "n"), "n");
  p.grid = detail::count(detail::field(j, "N"), "N");
  p.gamma = detail::number(detail::field(j, "gamma"), "gamma");
  p.validate();
  return p;
}

inline json to_json(const RazakElement& e) {
  json samples = json::array();
  for (const auto& s : e.samples) samples.push_back(to_json(s));
  return {{"params", to_json(e.params)}, {"c", to_json(e.c)}, {"samples", std::move(samples)}, {"lipschitz", e.lipschitz}};
}

inline RazakElement element_from_json(const json& j) {
  RazakElement e;
  e.params = params_from_json(detail::field(j, "params"));
  e.c = hermitian_from_json(detail::field(j, "c"));
  if (e.c.dim() != e.params.k) throw SchemaError("core c must be k x k");
  const json& samples = detail::field(j, "samples");
  if (!samples.is_array() || samples.size() != e.params.samples()) throw SchemaError("samples must hold N + 1 matrices");
  for (const json& s : samples) {
    e.samples.push_back(hermitian_from_json(s));
    if (e.samples.back().dim() != e.params.fiber_dim()) throw SchemaError("samples must be kn x kn");
  }
  e.lipschitz = detail::number(detail::field(j, "lipschitz"), "lipschitz");
  return e;
}

inline json to_json(const UnitizedUnitaryPath& w) {
  json samples = json::array();
  for (const auto& s : w.samples) samples.push_back(to_json(s));
  return {{"params", to_json(w.params)}, {"samples", std::move(samples)}};
}

inline UnitizedUnitaryPath unitary_path_from_json(const json& j) {
  UnitizedUnitaryPath w;
  w.params = params_from_json(detail::field(j, "params"));
  const json& samples = detail::field(j, "samples");
  if (!samples.is_array() || samples.size() != w.params.samples()) throw SchemaError("samples must hold N + 1 matrices");
  for (const json& s : samples) {
    w.samples.push_back(unitary_from_json(s));
    if (w.samples.back().dim() != w.params.fiber_dim()) throw SchemaError("samples must be kn x kn");
  }
  return w;
}

inline json to_json(const BuildCertificate& c) {
  return {{"sup_error", c.sup_error},
          {"r", c.r},
          {"epsilon", c.epsilon},
          {"unitarity_defect", c.unitarity_defect},
          {"membership_defect", c.membership_defect},
          {"continuity_constant", c.continuity_constant},
          {"refinement_count", c.refinement_count},
          {"pass", c.pass()},
          {"delta", c.delta},
          {"grid", c.grid},
          {"middle_residual", c.middle_residual},
          {"max_path_commutator", c.max_path_commutator},
          {"lipschitz_slack", c.lipschitz_slack}};
}

inline json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace orbitdist::io
