#pragma once

#include <random>
#include <string>
#include <vector>

#include "cmh/critical.hpp"
#include "cmh/markov.hpp"
#include "cmh/model.hpp"

namespace cmh {

template <class S>
struct MdpAction {
  std::string name;
  S reward = ScalarOps<S>::zero();
  Vec<S> transition;
};

/// Finite-state finite-action Markov control model. State i's coordinate of
/// the dynamic programming operator is max over actions of r + P.x.
template <class S>
struct MdpModel {
  std::vector<std::string> states;
  std::vector<std::vector<MdpAction<S>>> actions;  // per state, nonempty

  int n() const { return static_cast<int>(states.size()); }
};

template <class S>
void require_valid(const MdpModel<S>& mdp) {
  const int n = mdp.n();
  if (n == 0) throw ValidationError("mdp: no states");
  if (static_cast<int>(mdp.actions.size()) != n)
    throw ValidationError("mdp: action table does not match state count");
  for (int i = 0; i < n; ++i) {
    if (mdp.actions[i].empty())
      throw ValidationError("mdp: state '" + mdp.states[i] + "' has no actions");
    for (const auto& a : mdp.actions[i]) {
      if (a.transition.size() != n)
        throw ValidationError("mdp: transition row length mismatch in state '" + mdp.states[i] + "'");
      S sum = ScalarOps<S>::zero();
      for (Eigen::Index j = 0; j < a.transition.size(); ++j) {
        if (a.transition[j] < ScalarOps<S>::zero())
          throw ValidationError("mdp: negative transition probability");
        sum += a.transition[j];
      }
      if (!ScalarOps<S>::eq(sum, ScalarOps<S>::one(), ScalarOps<S>::default_tol()))
        throw ValidationError("mdp: non-stochastic transition row in state '" + mdp.states[i] + "'");
    }
  }
}

/// Dynamic programming operator of the model: one max-affine generator per
/// action.
template <class S>
MapModel<S> mdp_to_map(const MdpModel<S>& mdp) {
  require_valid(mdp);
  MapModel<S> m;
  m.n = mdp.n();
  m.coords.resize(m.n);
  for (int i = 0; i < m.n; ++i)
    for (const auto& a : mdp.actions[i]) m.coords[i].gens.push_back({a.transition, a.reward});
  return m;
}

using DeterministicPolicy = std::vector<int>;  // action index per state

template <class S>
using RandomizedPolicy = std::vector<Vec<S>>;  // convex weights over actions, per state

template <class S>
struct PolicyAnalysis {
  Mat<S> p;                                   // P^pi
  Vec<S> r;                                   // r^pi
  std::vector<std::vector<int>> final_classes;
  std::vector<S> class_values;                // m_F . r_F per final class
  Vec<S> mean;                                // mu^pi
};

template <class S>
PolicyAnalysis<S> policy_analysis(const MdpModel<S>& mdp, const RandomizedPolicy<S>& policy) {
  require_valid(mdp);
  const int n = mdp.n();
  if (static_cast<int>(policy.size()) != n)
    throw PreconditionError("policy_analysis: policy length mismatch");
  PolicyAnalysis<S> out;
  out.p.setConstant(n, n, ScalarOps<S>::zero());
  out.r = zero_vec<S>(n);
  for (int i = 0; i < n; ++i) {
    const auto& weights = policy[i];
    if (weights.size() != static_cast<Eigen::Index>(mdp.actions[i].size()))
      throw PreconditionError("policy_analysis: weight row length mismatch");
    S sum = ScalarOps<S>::zero();
    for (Eigen::Index a = 0; a < weights.size(); ++a) {
      if (weights[a] < ScalarOps<S>::zero())
        throw PreconditionError("policy_analysis: negative policy weight");
      sum += weights[a];
      out.r[i] += weights[a] * mdp.actions[i][a].reward;
      for (int j = 0; j < n; ++j) out.p(i, j) += weights[a] * mdp.actions[i][a].transition[j];
    }
    if (!ScalarOps<S>::eq(sum, ScalarOps<S>::one(), ScalarOps<S>::default_tol()))
      throw PreconditionError("policy_analysis: weights must sum to 1");
  }
  out.final_classes = final_classes_of_matrix(out.p);
  for (const auto& cls : out.final_classes) {
    Vec<S> m = invariant_measure(out.p, cls);
    S value = ScalarOps<S>::zero();
    for (std::size_t k = 0; k < cls.size(); ++k) value += m[k] * out.r[cls[k] - 1];
    out.class_values.push_back(value);
  }
  out.mean = mean_reward(out.p, out.r);
  return out;
}

template <class S>
PolicyAnalysis<S> policy_analysis(const MdpModel<S>& mdp, const DeterministicPolicy& policy) {
  RandomizedPolicy<S> randomized;
  for (int i = 0; i < mdp.n(); ++i) {
    if (policy[i] < 0 || policy[i] >= static_cast<int>(mdp.actions[i].size()))
      throw PreconditionError("policy_analysis: action index out of range");
    Vec<S> w = zero_vec<S>(static_cast<Eigen::Index>(mdp.actions[i].size()));
    w[policy[i]] = ScalarOps<S>::one();
    randomized.push_back(std::move(w));
  }
  return policy_analysis(mdp, randomized);
}

/// Optimal mean reward over all deterministic stationary policies and
/// initial states; equals the map's eigenvalue whenever an eigenvector
/// exists.
template <class S>
S brute_force_lambda(const MdpModel<S>& mdp, long long cap = 100000) {
  require_valid(mdp);
  long long total = 1;
  for (const auto& acts : mdp.actions) {
    total *= static_cast<long long>(acts.size());
    if (total > cap) throw CapExceeded("brute_force_lambda: policy count exceeds cap");
  }
  const int n = mdp.n();
  DeterministicPolicy policy(n, 0);
  bool first = true;
  S best = ScalarOps<S>::zero();
  while (true) {
    PolicyAnalysis<S> pa = policy_analysis<S>(mdp, policy);
    for (int i = 0; i < n; ++i)
      if (first || best < pa.mean[i]) {
        best = pa.mean[i];
        first = false;
      }
    int i = 0;
    for (; i < n; ++i) {
      if (++policy[i] < static_cast<int>(mdp.actions[i].size())) break;
      policy[i] = 0;
    }
    if (i == n) break;
  }
  return best;
}

template <class S>
struct ClassCertificate {
  std::vector<int> critical_class;
  bool final_for_policy = false;
  bool value_matches = false;
  S class_value = ScalarOps<S>::zero();
  RandomizedPolicy<S> policy;
};

template <class S>
struct OptimalClassReport {
  std::vector<ClassCertificate<S>> certificates;  // one per critical class
  bool all_certified = false;
  long long policies_sampled = 0;
  bool converse_ok = true;  // every sampled optimal final class sits inside a critical class
  std::vector<std::vector<int>> converse_violations;
};

/// Optimality check of the critical classes (the stochastic-control reading
/// of the critical graph). Direction (a): every critical class C carries a
/// randomized policy on active actions making C final with class value
/// lambda; built from the witness-matrix averaging. Direction (b): sampled
/// randomized policies over active actions must not exhibit an optimal final
/// class outside the critical classes.
template <class S>
OptimalClassReport<S> optimal_class_check(const MdpModel<S>& mdp, const S& lambda,
                                          const Vec<S>& v, const S& tol,
                                          long long enumerate_limit = 1024,
                                          int sample_count = 256, unsigned seed = 20240901) {
  require_valid(mdp);
  MapModel<S> map = mdp_to_map(mdp);
  require_eigenpair(map, lambda, v, tol);
  CriticalData cd = critical_data(map, v, lambda, tol);

  const int n = mdp.n();
  std::vector<std::vector<int>> active(n);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < static_cast<int>(mdp.actions[i].size()); ++a) {
      S value = mdp.actions[i][a].transition.dot(v) + mdp.actions[i][a].reward;
      if (ScalarOps<S>::eq(value, lambda + v[i], tol)) active[i].push_back(a);
    }
    if (active[i].empty()) throw Error("optimal_class_check: state with empty active set");
  }

  OptimalClassReport<S> report;
  report.all_certified = true;

  for (const auto& cls : cd.classes) {
    std::set<int> members(cls.begin(), cls.end());
    ClassCertificate<S> cert;
    cert.critical_class = cls;
    RandomizedPolicy<S> policy(n);
    bool buildable = true;
    for (int i = 0; i < n; ++i) {
      Vec<S> w = zero_vec<S>(static_cast<Eigen::Index>(mdp.actions[i].size()));
      if (members.count(i + 1)) {
        std::vector<int> supported;
        for (int a : active[i]) {
          bool inside = true;
          const Vec<S>& row = mdp.actions[i][a].transition;
          for (Eigen::Index j = 0; j < row.size(); ++j)
            if (ScalarOps<S>::zero() < row[j] && !members.count(static_cast<int>(j) + 1)) {
              inside = false;
              break;
            }
          if (inside) supported.push_back(a);
        }
        if (supported.empty()) {
          buildable = false;
          break;
        }
        for (int a : supported) w[a] = ScalarOps<S>::one() / S(static_cast<int>(supported.size()));
      } else {
        w[active[i].front()] = ScalarOps<S>::one();
      }
      policy[i] = std::move(w);
    }
    if (buildable) {
      PolicyAnalysis<S> pa = policy_analysis(mdp, policy);
      std::vector<int> sorted = cls;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t k = 0; k < pa.final_classes.size(); ++k) {
        if (pa.final_classes[k] == sorted) {
          cert.final_for_policy = true;
          cert.class_value = pa.class_values[k];
          cert.value_matches = ScalarOps<S>::eq(cert.class_value, lambda, tol);
          break;
        }
      }
      cert.policy = policy;
    }
    if (!(cert.final_for_policy && cert.value_matches)) report.all_certified = false;
    report.certificates.push_back(std::move(cert));
  }

  // Converse sampling over uniform mixtures of nonempty active subsets.
  long long total = 1;
  bool enumerable = true;
  for (int i = 0; i < n; ++i) {
    total *= (1LL << active[i].size()) - 1;
    if (total > enumerate_limit) {
      enumerable = false;
      break;
    }
  }

  auto check_policy = [&](const std::vector<unsigned>& masks) {
    RandomizedPolicy<S> policy(n);
    for (int i = 0; i < n; ++i) {
      Vec<S> w = zero_vec<S>(static_cast<Eigen::Index>(mdp.actions[i].size()));
      int count = 0;
      for (std::size_t k = 0; k < active[i].size(); ++k)
        if (masks[i] & (1u << k)) ++count;
      for (std::size_t k = 0; k < active[i].size(); ++k)
        if (masks[i] & (1u << k)) w[active[i][k]] = ScalarOps<S>::one() / S(count);
      policy[i] = std::move(w);
    }
    PolicyAnalysis<S> pa = policy_analysis(mdp, policy);
    ++report.policies_sampled;
    for (std::size_t k = 0; k < pa.final_classes.size(); ++k) {
      if (!ScalarOps<S>::eq(pa.class_values[k], lambda, tol)) continue;
      bool inside_some = false;
      for (const auto& cls : cd.classes) {
        std::set<int> members(cls.begin(), cls.end());
        bool subset = true;
        for (int u : pa.final_classes[k])
          if (!members.count(u)) {
            subset = false;
            break;
          }
        if (subset) {
          inside_some = true;
          break;
        }
      }
      if (!inside_some) {
        report.converse_ok = false;
        report.converse_violations.push_back(pa.final_classes[k]);
      }
    }
  };

  if (enumerable) {
    std::vector<unsigned> masks(n, 1);
    while (true) {
      check_policy(masks);
      int i = 0;
      for (; i < n; ++i) {
        if (++masks[i] < (1u << active[i].size())) break;
        masks[i] = 1;
      }
      if (i == n) break;
    }
  } else {
    std::mt19937_64 rng(seed);
    for (int s = 0; s < sample_count; ++s) {
      std::vector<unsigned> masks(n);
      for (int i = 0; i < n; ++i) {
        unsigned limit = (1u << active[i].size()) - 1;
        masks[i] = 1u + static_cast<unsigned>(rng() % limit);
      }
      check_policy(masks);
    }
  }
  return report;
}

}  // namespace cmh
