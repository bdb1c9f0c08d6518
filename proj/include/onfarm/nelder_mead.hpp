#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <vector>

namespace onfarm {

struct NelderMeadOptions {
  int max_iterations = 500;
  double diameter_tol = 1e-6;  // max pairwise vertex distance
  double initial_step = 0.5;   // per-coordinate offset of the initial simplex
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> best_trace;  // best objective after each iteration
};

// Derivative-free downhill simplex minimization with the standard
// reflection/expansion/contraction/shrink coefficients (1, 2, 0.5, 0.5).
// Stops when the simplex diameter drops below diameter_tol or after
// max_iterations, whichever comes first. The best vertex is never
// replaced by a worse one, so best_trace is non-increasing.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& start,
                                    const NelderMeadOptions& opts = {}) {
  const int dim = static_cast<int>(start.size());
  const int m = dim + 1;  // vertex count

  std::vector<Eigen::VectorXd> vertex(m, start);
  std::vector<double> value(m);
  for (int i = 0; i < dim; ++i) vertex[i + 1](i) += opts.initial_step;
  for (int i = 0; i < m; ++i) value[i] = f(vertex[i]);

  std::vector<int> order(m);
  auto sort_vertices = [&] {
    for (int i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return value[a] < value[b]; });
  };
  auto diameter = [&] {
    double d = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) d = std::max(d, (vertex[i] - vertex[j]).norm());
    return d;
  };

  NelderMeadResult result;
  result.best_trace.reserve(opts.max_iterations);

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    sort_vertices();
    if (diameter() < opts.diameter_tol) {
      result.converged = true;
      break;
    }

    const int best = order[0];
    const int second_worst = order[m - 2];
    const int worst = order[m - 1];

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < m - 1; ++i) centroid += vertex[order[i]];
    centroid /= dim;

    const Eigen::VectorXd reflected = centroid + (centroid - vertex[worst]);
    const double f_reflected = f(reflected);

    if (f_reflected < value[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - vertex[worst]);
      const double f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        vertex[worst] = expanded;
        value[worst] = f_expanded;
      } else {
        vertex[worst] = reflected;
        value[worst] = f_reflected;
      }
    } else if (f_reflected < value[second_worst]) {
      vertex[worst] = reflected;
      value[worst] = f_reflected;
    } else {
      const bool outside = f_reflected < value[worst];
      const Eigen::VectorXd& toward = outside ? reflected : vertex[worst];
      const Eigen::VectorXd contracted = centroid + 0.5 * (toward - centroid);
      const double f_contracted = f(contracted);
      if (f_contracted < (outside ? f_reflected : value[worst])) {
        vertex[worst] = contracted;
        value[worst] = f_contracted;
      } else {
        for (int i = 0; i < m; ++i) {
          if (i == best) continue;
          vertex[i] = vertex[best] + 0.5 * (vertex[i] - vertex[best]);
          value[i] = f(vertex[i]);
        }
      }
    }

    result.best_trace.push_back(*std::min_element(value.begin(), value.end()));
  }

  sort_vertices();
  result.x = vertex[order[0]];
  result.value = value[order[0]];
  result.iterations = iter;
  return result;
}

}  // namespace onfarm
