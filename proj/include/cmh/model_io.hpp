#pragma once

#include <json.hpp>

#include <string>
#include <variant>

#include "cmh/digraph.hpp"
#include "cmh/maxplus.hpp"
#include "cmh/mdp.hpp"
#include "cmh/model.hpp"
#include "cmh/polyhedra.hpp"

namespace cmh {

using Json = nlohmann::json;

inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

template <class S>
S scalar_from_json(const Json& j) {
  if constexpr (ScalarOps<S>::is_exact) {
    if (j.is_string()) return Rat::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rat(j.get<long long>());
    throw ValidationError("exact scalars must be strings like \"a/b\"");
  } else {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return Rat::parse(j.get<std::string>()).to_double();
    throw ValidationError("float scalars must be JSON numbers");
  }
}

template <class S>
Json scalar_json(const S& v) {
  if constexpr (ScalarOps<S>::is_exact)
    return v.str();
  else
    return v;
}

template <class S>
Vec<S> vec_from_json(const Json& j) {
  if (!j.is_array()) throw ValidationError("expected an array of scalars");
  Vec<S> v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = scalar_from_json<S>(j[i]);
  return v;
}

template <class S>
Json vec_json(const Vec<S>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(scalar_json(v[i]));
  return out;
}

template <class S>
MapModel<S> model_from_json(const Json& j) {
  MapModel<S> m;
  m.n = j.at("n").get<int>();
  if (j.contains("tol")) m.row_tol = scalar_from_json<S>(j.at("tol"));
  for (const auto& cj : j.at("coordinates")) {
    Coordinate<S> coord;
    const std::string kind = cj.at("kind").get<std::string>();
    if (kind == "max_affine") {
      coord.kind = CoordKind::MaxAffine;
      for (const auto& gj : cj.at("generators"))
        coord.gens.push_back({vec_from_json<S>(gj.at("p")), scalar_from_json<S>(gj.at("r"))});
    } else if (kind == "log_sum_exp") {
      coord.kind = CoordKind::LogSumExp;
      coord.weights = vec_from_json<S>(cj.at("weights"));
    } else {
      throw ValidationError("unknown coordinate kind '" + kind + "'");
    }
    m.coords.push_back(std::move(coord));
  }
  return m;
}

template <class S>
Json model_to_json(const MapModel<S>& m) {
  Json coords = Json::array();
  for (const auto& coord : m.coords) {
    Json cj;
    if (coord.kind == CoordKind::MaxAffine) {
      cj["kind"] = "max_affine";
      Json gens = Json::array();
      for (const auto& g : coord.gens) gens.push_back({{"p", vec_json(g.p)}, {"r", scalar_json(g.r)}});
      cj["generators"] = std::move(gens);
    } else {
      cj["kind"] = "log_sum_exp";
      cj["weights"] = vec_json(coord.weights);
    }
    coords.push_back(std::move(cj));
  }
  return Json{{"n", m.n}, {"mode", ScalarOps<S>::mode_name()}, {"coordinates", std::move(coords)}};
}

struct AnyModel {
  std::variant<MapModel<Rat>, MapModel<double>> model;

  bool is_exact() const { return std::holds_alternative<MapModel<Rat>>(model); }
};

inline AnyModel load_model_json(const Json& j, const std::string& mode_override = "") {
  std::string mode = j.value("mode", "exact");
  if (!mode_override.empty()) mode = mode_override;
  AnyModel out;
  if (mode == "exact") {
    const std::string file_mode = j.value("mode", "exact");
    if (file_mode == "float")
      throw ValidationError("cannot reinterpret a float-mode file as exact");
    out.model = model_from_json<Rat>(j);
  } else if (mode == "float") {
    const std::string file_mode = j.value("mode", "exact");
    if (file_mode == "exact")
      out.model = to_float(model_from_json<Rat>(j));
    else
      out.model = model_from_json<double>(j);
  } else {
    throw ValidationError("mode must be \"exact\" or \"float\"");
  }
  return out;
}

template <class S>
MdpModel<S> mdp_from_json(const Json& j) {
  MdpModel<S> mdp;
  for (const auto& s : j.at("states")) mdp.states.push_back(s.get<std::string>());
  mdp.actions.resize(mdp.states.size());
  const Json& actions = j.at("actions");
  for (std::size_t i = 0; i < mdp.states.size(); ++i) {
    if (!actions.contains(mdp.states[i]))
      throw ValidationError("mdp: no actions for state '" + mdp.states[i] + "'");
    for (const auto& aj : actions.at(mdp.states[i])) {
      MdpAction<S> a;
      a.name = aj.value("name", "");
      a.reward = scalar_from_json<S>(aj.at("reward"));
      a.transition = vec_from_json<S>(aj.at("transition"));
      mdp.actions[i].push_back(std::move(a));
    }
  }
  return mdp;
}

struct AnyMdp {
  std::variant<MdpModel<Rat>, MdpModel<double>> mdp;
};

inline AnyMdp load_mdp_json(const Json& j, const std::string& mode_override = "") {
  std::string mode = j.value("mode", "exact");
  if (!mode_override.empty()) mode = mode_override;
  AnyMdp out;
  if (mode == "exact")
    out.mdp = mdp_from_json<Rat>(j);
  else if (mode == "float")
    out.mdp = mdp_from_json<double>(j);
  else
    throw ValidationError("mode must be \"exact\" or \"float\"");
  return out;
}

template <class S>
MaxPlusMatrix<S> maxplus_from_json(const Json& j) {
  MaxPlusMatrix<S> m;
  const Json& entries = j.at("entries");
  m.n = static_cast<int>(entries.size());
  for (const auto& row : entries) {
    std::vector<std::optional<S>> r;
    for (const auto& e : row) {
      if (e.is_string() && (e.get<std::string>() == "-inf" || e.get<std::string>() == "-infinity"))
        r.push_back(std::nullopt);
      else
        r.push_back(scalar_from_json<S>(e));
    }
    m.a.push_back(std::move(r));
  }
  return m;
}

struct AnyMaxPlus {
  std::variant<MaxPlusMatrix<Rat>, MaxPlusMatrix<double>> matrix;
};

inline AnyMaxPlus load_maxplus_json(const Json& j, const std::string& mode_override = "") {
  std::string mode = j.value("mode", "exact");
  if (!mode_override.empty()) mode = mode_override;
  AnyMaxPlus out;
  if (mode == "exact")
    out.matrix = maxplus_from_json<Rat>(j);
  else if (mode == "float")
    out.matrix = maxplus_from_json<double>(j);
  else
    throw ValidationError("mode must be \"exact\" or \"float\"");
  return out;
}

inline Json digraph_json(const DiGraph& g) {
  Json nodes = Json::array();
  for (int v : g.nodes()) nodes.push_back(v);
  Json arcs = Json::array();
  for (const auto& [u, v] : g.arcs()) arcs.push_back(Json::array({u, v}));
  return Json{{"nodes", std::move(nodes)}, {"arcs", std::move(arcs)}};
}

inline Json polyhedron_json(const RationalPolyhedron& poly) {
  Json eq = Json::array(), ineq = Json::array();
  for (const auto& [a, b] : poly.equalities)
    eq.push_back(Json{{"a", vec_json(a)}, {"b", scalar_json(b)}});
  for (const auto& [a, b] : poly.inequalities)
    ineq.push_back(Json{{"a", vec_json(a)}, {"b", scalar_json(b)}});
  return Json{{"dim", poly.dim}, {"equalities", std::move(eq)}, {"inequalities", std::move(ineq)}};
}

inline Json classes_json(const std::vector<std::vector<int>>& classes) {
  Json out = Json::array();
  for (const auto& cls : classes) {
    Json c = Json::array();
    for (int v : cls) c.push_back(v);
    out.push_back(std::move(c));
  }
  return out;
}

/// Stable machine-readable wrapper shared by all CLI commands.
inline Json make_envelope(const std::string& command, const std::string& input_path,
                          const std::string& input_bytes, Json outputs, Json diagnostics) {
  if (!diagnostics.contains("warnings")) diagnostics["warnings"] = Json::array();
  return Json{{"command", command},
              {"inputs", Json{{"path", input_path}, {"digest", fnv1a_hex(input_bytes)}}},
              {"outputs", std::move(outputs)},
              {"diagnostics", std::move(diagnostics)}};
}

}  // namespace cmh
