#include "slabdens/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slabdens {

namespace {

struct SimpsonPanel {
  double a, b;
  double fa, fm, fb;
  double estimate;
};

SimpsonPanel make_panel(const std::function<double(double)>& f, double a, double b,
                        double fa, double fb) {
  SimpsonPanel p;
  p.a = a;
  p.b = b;
  p.fa = fa;
  p.fb = fb;
  p.fm = f(0.5 * (a + b));
  p.estimate = (b - a) / 6.0 * (fa + 4.0 * p.fm + fb);
  return p;
}

double adaptive(const std::function<double(double)>& f, const SimpsonPanel& p, double tol,
                int depth) {
  const double m = 0.5 * (p.a + p.b);
  SimpsonPanel left = make_panel(f, p.a, m, p.fa, p.fm);
  SimpsonPanel right = make_panel(f, m, p.b, p.fm, p.fb);
  const double refined = left.estimate + right.estimate;
  const double err = refined - p.estimate;
  if (depth <= 0 || std::abs(err) <= 15.0 * tol) {
    return refined + err / 15.0;
  }
  return adaptive(f, left, 0.5 * tol, depth - 1) + adaptive(f, right, 0.5 * tol, depth - 1);
}

}  // namespace

double simpson(const std::function<double(double)>& f, double a, double b, int nodes) {
  if (nodes < 3 || nodes % 2 == 0) {
    throw std::invalid_argument("simpson: node count must be odd and >= 3");
  }
  const int panels = nodes - 1;
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) {
    sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  SimpsonPanel whole = make_panel(f, a, b, fa, fb);
  return adaptive(f, whole, std::max(tol, 1e-300), 48);
}

double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& breakpoints, double tol) {
  std::vector<double> cuts;
  cuts.push_back(a);
  for (double t : breakpoints) {
    if (t > a && t < b) cuts.push_back(t);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const double total = b - a;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (len <= 0.0) continue;
    sum += integrate(f, cuts[i], cuts[i + 1], tol * len / total);
  }
  return sum;
}

}  // namespace slabdens
