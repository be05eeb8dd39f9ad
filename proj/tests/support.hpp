#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "finetype/hierarchy.hpp"
#include "finetype/rng.hpp"
#include "finetype/tape.hpp"
#include "finetype/tensor.hpp"

namespace testsupport {

using finetype::Rng;
using finetype::Tape;
using finetype::Tensor;
using finetype::Var;

using ParamMap = std::map<std::string, finetype::Tensor>;

// Builds the scalar under test on a fresh tape from the given parameter
// values. The builder is responsible for binding each entry via tape.param
// (or tape.input, for values excluded from the check).
using GraphBuilder = std::function<Var(Tape&, const ParamMap&)>;

struct FdReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

inline double forward_value(const GraphBuilder& build, const ParamMap& params) {
  Tape tape;
  Var out = build(tape, params);
  return tape.value(out).data[0];
}

// Central-difference comparison against the tape's reverse pass, every entry
// of every parameter.
inline FdReport fd_check(const ParamMap& params, const GraphBuilder& build, double eps = 1e-5) {
  Tape tape;
  Var out = build(tape, params);
  finetype::GradientMap analytic = tape.backward(out);

  FdReport report;
  for (const auto& [name, g] : analytic) {
    const Tensor& base = params.at(name);
    for (std::size_t i = 0; i < base.size(); ++i) {
      ParamMap perturbed = params;
      perturbed[name].data[i] = base.data[i] + eps;
      const double hi = forward_value(build, perturbed);
      perturbed[name].data[i] = base.data[i] - eps;
      const double lo = forward_value(build, perturbed);
      const double fd = (hi - lo) / (2.0 * eps);
      const double rel = std::abs(g.data[i] - fd) / std::max(1e-8, std::abs(fd));
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = name;
        report.worst_index = i;
        report.analytic = g.data[i];
        report.numeric = fd;
      }
    }
  }
  return report;
}

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

// Random label-path set (tree closed under ancestors) with at most max_nodes
// nodes and depth at most 3.
inline std::vector<std::string> random_label_paths(Rng& rng, std::size_t max_nodes) {
  std::vector<std::string> paths;
  const std::size_t target = 1 + rng.uniform_index(max_nodes);
  for (std::size_t i = 0; paths.size() < target && i < target; ++i) {
    std::vector<const std::string*> extendable;
    for (const std::string& p : paths) {
      if (finetype::TypeHierarchy::path_depth(p) < 3) extendable.push_back(&p);
    }
    if (extendable.empty() || rng.bernoulli(0.4)) {
      paths.push_back("/r" + std::to_string(i));
    } else {
      std::string base = *extendable[rng.uniform_index(extendable.size())];
      paths.push_back(base + "/c" + std::to_string(i));
    }
  }
  return paths;
}

// The chain condition stated pairwise: every pair of labels must be
// comparable under the ancestor-or-equal relation.
inline bool brute_force_chain(const std::vector<std::string>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (!finetype::TypeHierarchy::is_ancestor_or_equal(labels[i], labels[j]) &&
          !finetype::TypeHierarchy::is_ancestor_or_equal(labels[j], labels[i])) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace testsupport
