// cmhmap: analysis toolkit for convex monotone homogeneous maps given as
// max-affine / log-sum-exp coordinate models, plus the MDP and max-plus
// front ends. Commands emit a stable JSON envelope on stdout.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "cmh/calculus.hpp"
#include "cmh/critical.hpp"
#include "cmh/markov.hpp"
#include "cmh/maxplus.hpp"
#include "cmh/mdp.hpp"
#include "cmh/model.hpp"
#include "cmh/model_io.hpp"
#include "cmh/polyhedra.hpp"
#include "cmh/spectral.hpp"

namespace {

using namespace cmh;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitCap = 4;

struct Options {
  std::string path;
  std::string mode_override;
  double tol = 1e-9;
  long long max_iter = 1000000;
  long long cap = 100000;
  std::string dot_path;
  bool json = true;
  std::string x0, v, x, z, lambda;
  long long c_bound = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class S>
Vec<S> parse_vector(const std::string& text, int n) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (static_cast<int>(parts.size()) != n)
    throw ValidationError("expected " + std::to_string(n) + " comma-separated scalars");
  Vec<S> out(n);
  for (int i = 0; i < n; ++i) {
    if constexpr (ScalarOps<S>::is_exact)
      out[i] = Rat::parse(parts[i]);
    else
      out[i] = std::stod(parts[i]);
  }
  return out;
}

template <class S>
S parse_scalar(const std::string& text) {
  if constexpr (ScalarOps<S>::is_exact)
    return Rat::parse(text);
  else
    return std::stod(text);
}

template <class S>
S active_tol(const Options& opt) {
  if constexpr (ScalarOps<S>::is_exact) {
    (void)opt;
    return Rat(0);
  } else {
    return opt.tol;
  }
}

template <class S>
S convergence_tol(const Options& opt) {
  if constexpr (ScalarOps<S>::is_exact)
    return Rat::from_double(opt.tol);
  else
    return opt.tol;
}

void emit(const Json& envelope, const Options& opt) {
  if (opt.json) {
    std::cout << envelope.dump(2) << "\n";
  } else {
    std::cout << envelope.at("command").get<std::string>() << ": "
              << envelope.at("outputs").dump() << "\n";
  }
}

void write_dot(const std::string& path, const std::string& dot) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  out << dot;
}

/// Eigenvalue default when no --lambda is given: f(v) - v must be constant.
template <class S>
S derive_lambda(const MapModel<S>& m, const Vec<S>& v, const S& tol) {
  Vec<S> fv = eval(m, v);
  S lambda = fv[0] - v[0];
  for (Eigen::Index i = 1; i < fv.size(); ++i)
    if (!ScalarOps<S>::eq(fv[i] - v[i], lambda, tol))
      throw EigenpairError("f(v) - v is not constant; pass --lambda explicitly");
  return lambda;
}

template <class S>
int run_validate(const MapModel<S>& m, const Options& opt, const std::string& bytes) {
  ValidationReport rep = validate_model(m);
  Json out{{"valid", rep.ok}};
  if (!rep.ok) {
    out["coordinate"] = rep.coordinate;
    if (rep.generator > 0) out["generator"] = rep.generator;
    out["message"] = rep.message;
  }
  emit(make_envelope("validate", opt.path, bytes, out,
                     Json{{"mode", ScalarOps<S>::mode_name()}}),
       opt);
  return rep.ok ? kExitOk : kExitValidation;
}

template <class S>
int run_spectrum(const MapModel<S>& m, const Options& opt, const std::string& bytes) {
  require_valid(m);
  Vec<S> x0;
  if (!opt.x0.empty()) x0 = parse_vector<S>(opt.x0, m.n);
  EigenResult<S> r = find_eigenvector(m, x0, convergence_tol<S>(opt), opt.max_iter);
  Json out{{"lambda", scalar_json(r.lambda)},
           {"v", vec_json(r.v)},
           {"residual", scalar_json(r.residual)},
           {"status", to_string(r.status)},
           {"bracket", Json::array({scalar_json(r.bracket_lo), scalar_json(r.bracket_hi)})}};
  Json diag{{"mode", ScalarOps<S>::mode_name()}, {"iterations", r.iterations}};
  if (homogeneity(m) == Homogeneity::Homogeneous) {
    // Existence hint: one critical class of the recession map certifies an
    // eigenvector; several prove nothing (reported as a diagnostic only).
    CriticalData rec = recession_critical_diagnostic(m);
    diag["recession_critical_classes"] = rec.class_count;
    diag["existence_certified"] = (rec.class_count == 1);
  }
  emit(make_envelope("spectrum", opt.path, bytes, out, diag), opt);
  return r.status == IterationStatus::Converged ? kExitOk : kExitNoConvergence;
}

template <class S>
int run_critical(const MapModel<S>& m, const Options& opt, const std::string& bytes) {
  require_valid(m);
  if (opt.v.empty()) throw EigenpairError("critical requires --v");
  Vec<S> v = parse_vector<S>(opt.v, m.n);
  S tol = active_tol<S>(opt);
  S lambda = opt.lambda.empty() ? derive_lambda(m, v, tol) : parse_scalar<S>(opt.lambda);
  CriticalData cd = critical_data(m, v, lambda, tol);
  Mat<S> witness = witness_matrix(m, v, lambda, tol);
  auto invariant = invariant_critical_classes(m, v, lambda, tol);

  Json witness_rows = Json::array();
  for (int i = 0; i < m.n; ++i) {
    Vec<S> prow = witness.row(i).transpose();
    witness_rows.push_back(vec_json(prow));
  }
  Json out{{"lambda", scalar_json(lambda)},
           {"graph", digraph_json(cd.graph)},
           {"classes", classes_json(cd.classes)},
           {"nodes", cd.nodes},
           {"cyclicity", cd.cyclicity},
           {"class_count", cd.class_count},
           {"invariant_classes", classes_json(invariant)},
           {"section", section(cd)},
           {"witness_matrix", std::move(witness_rows)}};
  if (!opt.dot_path.empty()) write_dot(opt.dot_path, to_dot(cd.graph, cd.classes, "Gc"));
  emit(make_envelope("critical", opt.path, bytes, out, Json{{"mode", ScalarOps<S>::mode_name()}}),
       opt);
  return kExitOk;
}

template <class S>
int run_orbit(const MapModel<S>& m, const Options& opt, const std::string& bytes) {
  require_valid(m);
  if (opt.x.empty()) throw EigenpairError("orbit requires --x");
  Vec<S> x = parse_vector<S>(opt.x, m.n);
  S tol = convergence_tol<S>(opt);

  S lambda;
  long long c = opt.c_bound;
  if (!opt.v.empty()) {
    Vec<S> v = parse_vector<S>(opt.v, m.n);
    lambda = opt.lambda.empty() ? derive_lambda(m, v, active_tol<S>(opt))
                                : parse_scalar<S>(opt.lambda);
    if (c <= 0) c = critical_data(m, v, lambda, active_tol<S>(opt)).cyclicity;
  } else if (!opt.lambda.empty() && c > 0) {
    lambda = parse_scalar<S>(opt.lambda);
  } else {
    throw EigenpairError(
        "orbit requires --v (to derive lambda and cyclicity) or --lambda with --c");
  }

  OrbitResult<S> orbit = periodic_limit(m, lambda, x, c, tol, opt.max_iter);
  Json points = Json::array();
  for (const auto& p : orbit.points) points.push_back(vec_json(p));
  Json out{{"lambda", scalar_json(lambda)},
           {"cyclicity_bound", c},
           {"period", orbit.period},
           {"points", std::move(points)},
           {"residual", scalar_json(orbit.residual)},
           {"status", to_string(orbit.status)}};
  emit(make_envelope("orbit", opt.path, bytes, out,
                     Json{{"mode", ScalarOps<S>::mode_name()}, {"iterations", orbit.iterations}}),
       opt);
  return orbit.status == IterationStatus::Converged ? kExitOk : kExitNoConvergence;
}

template <class S>
int run_project(const MapModel<S>& m, const Options& opt, const std::string& bytes) {
  require_valid(m);
  if (opt.z.empty()) throw EigenpairError("project requires --z");
  Vec<S> z = parse_vector<S>(opt.z, m.n);
  S lambda = opt.lambda.empty() ? ScalarOps<S>::zero() : parse_scalar<S>(opt.lambda);
  S tol = convergence_tol<S>(opt);
  S slack = active_tol<S>(opt);
  ProjectorResult<S> r = spectral_projector(m, lambda, z, tol, opt.max_iter, slack);
  Json out{{"lambda", scalar_json(lambda)},
           {"w", vec_json(r.w)},
           {"residual", scalar_json(r.residual)},
           {"status", to_string(r.status)}};
  emit(make_envelope("project", opt.path, bytes, out,
                     Json{{"mode", ScalarOps<S>::mode_name()}, {"iterations", r.iterations}}),
       opt);
  return r.status == IterationStatus::Converged ? kExitOk : kExitNoConvergence;
}

int run_eigenspace(const MapModel<Rat>& m, const Options& opt, const std::string& bytes) {
  require_valid(m);
  Vec<Rat> v = opt.v.empty() ? zero_vec<Rat>(m.n) : parse_vector<Rat>(opt.v, m.n);
  Rat lambda = opt.lambda.empty() ? derive_lambda(m, v, Rat(0)) : Rat::parse(opt.lambda);
  CriticalData cd = critical_data(m, v, lambda, Rat(0));
  auto cells = eigenspace_enumerate(m, lambda, opt.cap);
  int dim = eigenspace_dimension(m, lambda, cd, opt.cap);

  Json cell_json = Json::array();
  for (const auto& cell : cells) {
    cell_json.push_back(Json{{"selection", cell.selection},
                             {"polyhedron", polyhedron_json(cell.poly)},
                             {"witness", vec_json(cell.witness)}});
  }
  std::string verdict = dim == cd.class_count ? "= m(f)" : "< m(f)";
  Json out{{"lambda", scalar_json(lambda)},
           {"cells", std::move(cell_json)},
           {"dimension", dim},
           {"critical_class_count", cd.class_count},
           {"verdict", verdict}};
  emit(make_envelope("eigenspace", opt.path, bytes, out, Json{{"mode", "exact"}}), opt);
  return kExitOk;
}

template <class S>
int run_mdp(const MdpModel<S>& mdp, const Options& opt, const std::string& bytes) {
  require_valid(mdp);
  MapModel<S> m = mdp_to_map(mdp);
  Json out{{"states", mdp.n()}};
  Json action_counts = Json::array();
  for (const auto& acts : mdp.actions) action_counts.push_back(acts.size());
  out["actions_per_state"] = std::move(action_counts);
  out["lambda_brute_force"] = scalar_json(brute_force_lambda(mdp, opt.cap));

  if (!opt.v.empty()) {
    Vec<S> v = parse_vector<S>(opt.v, mdp.n());
    S tol = active_tol<S>(opt);
    S lambda = opt.lambda.empty() ? derive_lambda(m, v, tol) : parse_scalar<S>(opt.lambda);
    auto report = optimal_class_check(mdp, lambda, v, tol);
    Json certs = Json::array();
    for (const auto& cert : report.certificates) {
      certs.push_back(Json{{"class", cert.critical_class},
                           {"final_for_policy", cert.final_for_policy},
                           {"class_value", scalar_json(cert.class_value)},
                           {"optimal", cert.value_matches}});
    }
    out["optimal_class_check"] = Json{{"lambda", scalar_json(lambda)},
                                      {"certificates", std::move(certs)},
                                      {"all_certified", report.all_certified},
                                      {"converse_ok", report.converse_ok},
                                      {"policies_sampled", report.policies_sampled}};
  }
  emit(make_envelope("mdp", opt.path, bytes, out, Json{{"mode", ScalarOps<S>::mode_name()}}), opt);
  return kExitOk;
}

template <class S>
int run_maxplus(const MaxPlusMatrix<S>& a, const Options& opt, const std::string& bytes) {
  require_valid(a);
  Json out{{"n", a.n}, {"rho", scalar_json(maxplus_rho(a))}};
  DiGraph g = maxplus_graph(a);
  bool irreducible = strong_components(g).size() == 1;
  out["irreducible"] = irreducible;
  if (irreducible) {
    auto e = maxplus_eigen(a);
    out["lambda"] = scalar_json(e.rho);
    out["v"] = vec_json(e.v);
    DiGraph sat = saturation_graph(a, e.rho, e.v, active_tol<S>(opt));
    DiGraph crit = maxplus_critical(a, e.rho, e.v, active_tol<S>(opt));
    out["saturation"] = digraph_json(sat);
    out["critical"] = digraph_json(crit);
    if (!opt.dot_path.empty())
      write_dot(opt.dot_path, to_dot(crit, strong_components(crit), "GcA"));
  }
  emit(make_envelope("maxplus", opt.path, bytes, out, Json{{"mode", ScalarOps<S>::mode_name()}}),
       opt);
  return kExitOk;
}

int dispatch(const std::string& command, const Options& opt) {
  const std::string bytes = read_file(opt.path);
  Json j = Json::parse(bytes);

  if (command == "mdp") {
    AnyMdp any = load_mdp_json(j, opt.mode_override);
    return std::visit([&](const auto& mdp) { return run_mdp(mdp, opt, bytes); }, any.mdp);
  }
  if (command == "maxplus") {
    AnyMaxPlus any = load_maxplus_json(j, opt.mode_override);
    return std::visit([&](const auto& a) { return run_maxplus(a, opt, bytes); }, any.matrix);
  }
  if (command == "eigenspace") {
    AnyModel any = load_model_json(j, opt.mode_override);
    if (!any.is_exact())
      throw ValidationError("eigenspace enumeration requires an exact-mode model");
    return run_eigenspace(std::get<MapModel<Rat>>(any.model), opt, bytes);
  }

  AnyModel any = load_model_json(j, opt.mode_override);
  return std::visit(
      [&](const auto& m) {
        if (command == "validate") return run_validate(m, opt, bytes);
        if (command == "spectrum") return run_spectrum(m, opt, bytes);
        if (command == "critical") return run_critical(m, opt, bytes);
        if (command == "orbit") return run_orbit(m, opt, bytes);
        if (command == "project") return run_project(m, opt, bytes);
        throw Error("unknown command");
      },
      any.model);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analysis of convex monotone homogeneous maps"};
  app.require_subcommand(1);

  Options opt;
  std::string command;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("file", opt.path, "input JSON file")->required();
    sub->add_option("--mode", opt.mode_override, "override arithmetic mode (exact|float)");
    sub->add_option("--tol", opt.tol, "tolerance (default 1e-9)");
    sub->add_option("--max-iter", opt.max_iter, "iteration budget (default 1e6)");
    sub->add_option("--cap", opt.cap, "enumeration cap (default 1e5)");
    sub->add_option("--dot", opt.dot_path, "write a DOT rendering to this path");
    sub->add_flag("--json,!--no-json", opt.json, "machine-readable output (default on)");
    sub->final_callback([&command, sub] { command = sub->get_name(); });
  };

  add_common(app.add_subcommand("validate", "check model invariants"));
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalue bounds and eigenvector search");
  add_common(spectrum);
  spectrum->add_option("--x0", opt.x0, "start vector (comma-separated)");
  auto* critical = app.add_subcommand("critical", "critical graph, classes, cyclicity, witness");
  add_common(critical);
  critical->add_option("--v", opt.v, "eigenvector (comma-separated)");
  critical->add_option("--lambda", opt.lambda, "eigenvalue (default: derived from --v)");
  auto* orbit = app.add_subcommand("orbit", "periodic-orbit limit of f - lambda");
  add_common(orbit);
  orbit->add_option("--x", opt.x, "start vector");
  orbit->add_option("--v", opt.v, "eigenvector used to derive lambda and cyclicity");
  orbit->add_option("--lambda", opt.lambda, "eigenvalue");
  orbit->add_option("--c", opt.c_bound, "cyclicity upper bound");
  auto* project = app.add_subcommand("project", "spectral projector from a super-eigenvector");
  add_common(project);
  project->add_option("--z", opt.z, "super-eigenvector (f(z) <= lambda + z)");
  project->add_option("--lambda", opt.lambda, "eigenvalue (default 0)");
  auto* eigenspace = app.add_subcommand("eigenspace", "exact eigenspace cells and dimension");
  add_common(eigenspace);
  eigenspace->add_option("--v", opt.v, "eigenvector (default: the zero vector)");
  eigenspace->add_option("--lambda", opt.lambda, "eigenvalue (default: derived)");
  auto* mdp = app.add_subcommand("mdp", "Markov control model analysis");
  add_common(mdp);
  mdp->add_option("--v", opt.v, "bias vector for the optimality check");
  mdp->add_option("--lambda", opt.lambda, "optimal mean reward");
  auto* maxplus = app.add_subcommand("maxplus", "max-plus spectral analysis");
  add_common(maxplus);

  CLI11_PARSE(app, argc, argv);

  try {
    return dispatch(command, opt);
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const EigenpairError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  }
}
