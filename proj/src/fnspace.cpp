#include "slabdens/fnspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <variant>

#include "slabdens/errors.hpp"
#include "slabdens/quadrature.hpp"

namespace slabdens {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kGramNodes = 4097;  // 2^12 + 1 composite Simpson nodes

double gauss_gauss(const GaussianAtom& a, const GaussianAtom& b) {
  const double s = a.gamma + b.gamma;
  const double d = a.center - b.center;
  return std::sqrt(kPi / s) * std::exp(-a.gamma * b.gamma * d * d / s);
}

double gauss_indicator(const GaussianAtom& a, const IndicatorAtom& b) {
  const double r = std::sqrt(a.gamma);
  return 0.5 * std::sqrt(kPi / a.gamma) *
         (std::erf(r * (b.hi - a.center)) - std::erf(r * (b.lo - a.center)));
}

double indicator_overlap(const IndicatorAtom& a, const IndicatorAtom& b) {
  return std::max(0.0, std::min(a.hi, b.hi) - std::max(a.lo, b.lo));
}

void require_index(const BasisFamily& family, int k) {
  if (k < 0 || k >= family.size()) throw std::out_of_range("basis index out of range");
}

}  // namespace

GramMatrix::GramMatrix(Eigen::MatrixXd entries, GramSource source, std::uint64_t family_id)
    : entries_(std::move(entries)), source_(source), family_id_(family_id) {
  if (entries_.rows() != entries_.cols()) throw std::invalid_argument("gram matrix must be square");
}

std::optional<double> analytic_inner(const BasisFamily& family, int i, int k) {
  require_index(family, i);
  require_index(family, k);
  if (family.rule() == InnerProductRule::orthogonal)
    return i == k ? std::optional<double>(family.norm_sq(i)) : std::optional<double>(0.0);
  const BasisAtom& a = family.atom(i);
  const BasisAtom& b = family.atom(k);
  if (const auto* ga = std::get_if<GaussianAtom>(&a)) {
    if (const auto* gb = std::get_if<GaussianAtom>(&b)) return gauss_gauss(*ga, *gb);
    if (const auto* ib = std::get_if<IndicatorAtom>(&b)) return gauss_indicator(*ga, *ib);
  }
  if (const auto* ia = std::get_if<IndicatorAtom>(&a)) {
    if (const auto* gb = std::get_if<GaussianAtom>(&b)) return gauss_indicator(*gb, *ia);
    if (const auto* ib = std::get_if<IndicatorAtom>(&b)) return indicator_overlap(*ia, *ib);
  }
  return std::nullopt;
}

namespace {

double quadrature_inner(const BasisFamily& family, int i, int k) {
  const Interval w = family.support();
  return simpson([&](double x) { return family.eval(i, x) * family.eval(k, x); }, w.lo, w.hi,
                 kGramNodes);
}

double inner_entry(const BasisFamily& family, int i, int k, bool* analytic) {
  if (auto v = analytic_inner(family, i, k)) return *v;
  if (analytic) *analytic = false;
  return quadrature_inner(family, i, k);
}

}  // namespace

void gram_column(const BasisFamily& family, int k, Eigen::VectorXd& out) {
  require_index(family, k);
  const int m = family.size();
  out.resize(m);
  if (family.rule() == InnerProductRule::orthogonal) {
    out.setZero();
    out[k] = family.norm_sq(k);
    return;
  }
  for (int i = 0; i < m; ++i) out[i] = inner_entry(family, i, k, nullptr);
}

GramMatrix gram(const BasisFamily& family) {
  const int m = family.size();
  Eigen::MatrixXd g(m, m);
  bool analytic = true;
  if (family.rule() == InnerProductRule::orthogonal) {
    g.setZero();
    for (int k = 0; k < m; ++k) g(k, k) = family.norm_sq(k);
  } else {
    for (int k = 0; k < m; ++k)
      for (int i = 0; i <= k; ++i) {
        const double v = inner_entry(family, i, k, &analytic);
        g(i, k) = v;
        g(k, i) = v;
      }
  }
  if (m <= 2048) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, g.trace());
    if (es.eigenvalues().minCoeff() < -1e-9 * scale)
      throw Error("gram matrix is not positive semidefinite");
  }
  return GramMatrix(std::move(g), analytic ? GramSource::analytic : GramSource::quadrature,
                    family.id());
}

const GramMatrix& gram_cached(const std::shared_ptr<const BasisFamily>& family) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::unique_ptr<GramMatrix>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(family->id());
  if (it == cache.end())
    it = cache.emplace(family->id(), std::make_unique<GramMatrix>(gram(*family))).first;
  return *it->second;
}

SpanElement::SpanElement(std::shared_ptr<const BasisFamily> family, Eigen::VectorXd coefficients)
    : family_(std::move(family)), coefficients_(std::move(coefficients)) {
  if (!family_) throw std::invalid_argument("span element requires a family");
  if (coefficients_.size() != family_->size())
    throw std::invalid_argument("coefficient count does not match family size");
}

SpanElement SpanElement::zero(std::shared_ptr<const BasisFamily> family) {
  const int m = family ? family->size() : 0;
  return SpanElement(std::move(family), Eigen::VectorXd::Zero(m));
}

double SpanElement::evaluate(double x) const {
  double s = 0.0;
  for (int k = 0; k < coefficients_.size(); ++k)
    if (coefficients_[k] != 0.0) s += coefficients_[k] * family_->eval(k, x);
  return s;
}

namespace {

void require_same_family(const SpanElement& a, const SpanElement& b) {
  if (!a.family().compatible_with(b.family()))
    throw FamilyMismatch("span elements belong to different basis families");
}

}  // namespace

double dist2(const SpanElement& g, const SpanElement& h) {
  require_same_family(g, h);
  const Eigen::VectorXd d = g.coefficients() - h.coefficients();
  const BasisFamily& fam = g.family();
  const int m = fam.size();
  if (fam.rule() == InnerProductRule::orthogonal) {
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += fam.norm_sq(k) * d[k] * d[k];
    return s;
  }
  if (m <= 2048) {
    const GramMatrix& gm = gram_cached(g.family_ptr());
    return d.dot(gm.matrix() * d);
  }
  // Large non-orthogonal family: accumulate column by column over the
  // nonzero entries instead of materializing the Gram matrix.
  double s = 0.0;
  Eigen::VectorXd col;
  for (int k = 0; k < m; ++k) {
    if (d[k] == 0.0) continue;
    gram_column(fam, k, col);
    s += d[k] * col.dot(d);
  }
  return std::max(0.0, s);
}

double dist2_to_density(const SpanElement& g, const Density& density, double tol) {
  const Interval w = g.family().support();
  std::vector<double> breaks = density.breakpoints();
  breaks.push_back(0.0);
  breaks.push_back(1.0);
  for (int k = 0; k < g.coefficients().size(); ++k) {
    if (g.coefficients()[k] == 0.0) continue;
    for (double b : g.family().breakpoints(k)) breaks.push_back(b);
  }
  auto integrand = [&](double x) {
    const double r = g.evaluate(x) - density.pdf(x);
    return r * r;
  };
  return integrate_piecewise(integrand, w.lo, w.hi, breaks, tol);
}

namespace {

double inner_with_basis(const SpanElement& g, int k, Eigen::VectorXd& scratch) {
  const BasisFamily& fam = g.family();
  if (fam.rule() == InnerProductRule::orthogonal)
    return g.coefficients()[k] * fam.norm_sq(k);
  gram_column(fam, k, scratch);
  return scratch.dot(g.coefficients());
}

double slab_excess(double t, double halfwidth) {
  if (t > halfwidth) return t - halfwidth;
  if (t < -halfwidth) return t + halfwidth;
  return 0.0;
}

}  // namespace

SpanElement project_slab(const SpanElement& g, const Slab& slab) {
  require_index(g.family(), slab.k);
  if (slab.halfwidth < 0.0) throw std::invalid_argument("slab halfwidth must be nonnegative");
  Eigen::VectorXd scratch;
  const double dk = g.family().norm_sq(slab.k);
  const double t = inner_with_basis(g, slab.k, scratch) / dk - slab.center;
  const double excess = slab_excess(t, slab.halfwidth);
  if (excess == 0.0) return g;
  SpanElement out = g;
  out.coefficients()[slab.k] -= excess;
  return out;
}

SpanElement successive_projections(const std::vector<Slab>& slabs, const SpanElement& start,
                                   int passes) {
  if (passes < 1) throw std::invalid_argument("passes must be at least 1");
  SpanElement g = start;
  for (int p = 0; p < passes; ++p)
    for (const Slab& s : slabs) g = project_slab(g, s);
  return g;
}

SpanElement project_intersection(const std::vector<Slab>& slabs, const SpanElement& start,
                                 const ProjectionOptions& options) {
  const BasisFamily& fam = start.family();
  for (const Slab& s : slabs) {
    require_index(fam, s.k);
    if (s.halfwidth < 0.0) throw std::invalid_argument("slab halfwidth must be nonnegative");
  }
  if (slabs.empty()) return start;

  const int m = fam.size();
  const bool orthogonal = fam.rule() == InnerProductRule::orthogonal;
  Eigen::VectorXd gamma = start.coefficients();
  std::vector<double> corrections(slabs.size(), 0.0);

  // Columns of the Gram matrix for every index a slab (or the start) touches.
  std::unordered_map<int, Eigen::VectorXd> columns;
  auto column = [&](int k) -> const Eigen::VectorXd& {
    auto it = columns.find(k);
    if (it == columns.end()) {
      Eigen::VectorXd c;
      gram_column(fam, k, c);
      it = columns.emplace(k, std::move(c)).first;
    }
    return it->second;
  };

  Eigen::VectorXd w;  // w = G gamma, maintained incrementally
  if (orthogonal) {
    w.resize(m);
    for (int k = 0; k < m; ++k) w[k] = gamma[k] * fam.norm_sq(k);
  } else {
    w = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < m; ++k)
      if (gamma[k] != 0.0) w += gamma[k] * column(k);
  }
  auto shift = [&](int k, double delta) {
    gamma[k] += delta;
    if (orthogonal)
      w[k] += delta * fam.norm_sq(k);
    else
      w += delta * column(k);
  };

  auto max_violation = [&]() {
    double v = 0.0;
    for (const Slab& s : slabs)
      v = std::max(v, std::abs(w[s.k] / fam.norm_sq(s.k) - s.center) - s.halfwidth);
    return v;
  };

  Eigen::VectorXd gamma_prev, w_prev;
  double violation = max_violation();
  for (int cycle = 0; cycle < options.max_cycles; ++cycle) {
    gamma_prev = gamma;
    w_prev = w;
    for (std::size_t j = 0; j < slabs.size(); ++j) {
      const Slab& s = slabs[j];
      if (corrections[j] != 0.0) shift(s.k, corrections[j]);
      const double t = w[s.k] / fam.norm_sq(s.k) - s.center;
      const double excess = slab_excess(t, s.halfwidth);
      if (excess != 0.0) shift(s.k, -excess);
      corrections[j] = excess;
    }
    const double disp = (gamma - gamma_prev).dot(w - w_prev);
    violation = max_violation();
    if (std::abs(disp) <= options.tol && violation <= options.feasibility_tol) break;
  }

  if (violation > options.feasibility_tol)
    throw NoConvergence("intersection projection failed the feasibility certificate (violation " +
                        std::to_string(violation) + "); the slabs may have empty intersection");
  return SpanElement(start.family_ptr(), std::move(gamma));
}

SpanElement project_cap(const SpanElement& g, double c) {
  if (!g.family().orthonormal())
    throw CapRequiresOrthonormal("coefficient cap is defined on orthonormal families only");
  if (!(c > 0.0)) throw std::invalid_argument("cap level must be positive");
  const double root = std::sqrt(c);
  SpanElement out = g;
  for (int k = 0; k < out.coefficients().size(); ++k)
    out.coefficients()[k] = std::min(out.coefficients()[k], root);
  return out;
}

}  // namespace slabdens
