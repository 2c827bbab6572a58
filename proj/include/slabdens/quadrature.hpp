#pragma once

#include <functional>
#include <vector>

namespace slabdens {

/// Composite Simpson rule on [a, b] with a fixed odd node count.
double simpson(const std::function<double(double)>& f, double a, double b, int nodes);

/// Adaptive Simpson integration to an absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b, double tol);

/// Adaptive integration of a piecewise-smooth function: the domain is
/// split at the given breakpoints first, then each smooth piece is
/// integrated adaptively with a tolerance proportional to its length.
double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& breakpoints, double tol);

}  // namespace slabdens
