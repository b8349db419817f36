#pragma once

#include <functional>

namespace jsqa {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // Kronrod-Gauss difference summed over intervals
  int intervals = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_intervals = 4000;
};

/// Globally adaptive 15-point Gauss-Kronrod rule. Either endpoint may be
/// infinite; such ranges are mapped onto a finite one by x = a + t/(1-t)
/// (or its mirror) before integration.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& options = {});

}  // namespace jsqa
