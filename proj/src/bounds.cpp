#include "slabdens/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "slabdens/errors.hpp"

namespace slabdens {

namespace {

void require_level(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidLevel("confidence level must lie in (0,1)");
}

void require_index(const BasisFamily& family, int k) {
  if (k < 0 || k >= family.size()) throw std::out_of_range("basis index out of range");
}

CoefficientEstimate summarize(const BasisFamily& family, int k, const std::vector<double>& values,
                              DetailPolicy policy) {
  const long n = static_cast<long>(values.size());
  if (n < 1) throw std::invalid_argument("coefficient estimate needs at least one observation");
  double sum = 0.0, sum_sq = 0.0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
  }
  CoefficientEstimate est;
  est.k = k;
  est.n = n;
  const double mean = sum / static_cast<double>(n);
  est.alpha_hat = mean / family.norm_sq(k);
  est.sum_sq = sum_sq / static_cast<double>(n);
  est.v_hat = std::max(0.0, est.sum_sq - mean * mean);
  if (policy == DetailPolicy::automatic) {
    if (family.ternary(k)) {
      TernaryCounts c;
      for (double v : values) {
        if (v > 0.5)
          ++c.n_plus;
        else if (v < -0.5)
          ++c.n_minus;
        else
          ++c.n_zero;
      }
      est.detail = c;
    } else {
      est.detail = values;
    }
  }
  return est;
}

}  // namespace

CoefficientEstimate estimate_coefficient(const Sample& sample, const BasisFamily& family, int k,
                                         DetailPolicy policy) {
  require_index(family, k);
  std::vector<double> values;
  values.reserve(sample.points.size());
  for (double x : sample.points) values.push_back(family.eval(k, x));
  return summarize(family, k, values, policy);
}

CoefficientEstimate estimate_coefficient_loo(const Sample& sample, const BasisFamily& family,
                                             int k, DetailPolicy policy) {
  require_index(family, k);
  const std::optional<int> anchor = family.anchor(k);
  if (!anchor) throw FamilyMismatch("leave-one-out estimate needs a data-anchored entry");
  if (sample.n() < 2) throw std::invalid_argument("leave-one-out needs at least two observations");
  std::vector<double> values;
  values.reserve(sample.points.size() - 1);
  for (std::size_t i = 0; i < sample.points.size(); ++i)
    if (static_cast<int>(i) != *anchor) values.push_back(family.eval(k, sample.points[i]));
  return summarize(family, k, values, policy);
}

double beta_theorem1(const CoefficientEstimate& est, const BasisFamily& family,
                     const HpCertificate& cert, double eps, long m_effective) {
  require_level(eps);
  if (m_effective < 1) throw std::invalid_argument("m_effective must be at least 1");
  const double n = static_cast<double>(est.n);
  const double log_term = 1.0 + std::log(2.0 * static_cast<double>(m_effective) / eps);
  return (4.0 * log_term / n) * (est.sum_sq / family.norm_sq(est.k) + cert.C(est.k));
}

ConfidenceInterval theorem1_interval(const CoefficientEstimate& est, const BasisFamily& family,
                                     const HpCertificate& cert, double eps, long m_effective) {
  const double beta = beta_theorem1(est, family, cert, eps, m_effective);
  const double rho = std::sqrt(beta / family.norm_sq(est.k));
  return ConfidenceInterval{est.alpha_hat - rho, est.alpha_hat + rho, false};
}

namespace {

// (1/n) sum_i log(1 - s b f_k(X_i)) with s = +1 (minus side) or -1 (plus side).
double log_moment(const CoefficientEstimate& est, double b, bool minus_side) {
  const double n = static_cast<double>(est.n);
  if (est.has_counts()) {
    const TernaryCounts& c = est.counts();
    const double lm = std::log1p(-b);
    const double lp = std::log1p(b);
    return minus_side ? (static_cast<double>(c.n_plus) * lm + static_cast<double>(c.n_minus) * lp) / n
                      : (static_cast<double>(c.n_plus) * lp + static_cast<double>(c.n_minus) * lm) / n;
  }
  if (!est.has_values())
    throw std::logic_error("log-moment bound needs raw values or ternary counts");
  double s = 0.0;
  for (double f : est.values()) {
    const double arg = minus_side ? -b * f : b * f;
    if (arg <= -1.0) throw InvalidBeta("beta pushes a log-moment argument out of domain");
    s += std::log1p(arg);
  }
  return s / n;
}

// Ternary rewrite of the same two sums from the value counts.
double log_moment_ternary(const TernaryCounts& c, long n_total, double b, bool minus_side) {
  const double n = static_cast<double>(n_total);
  const double psi_sq = static_cast<double>(c.n_plus + c.n_minus) / n;
  const double psi_bar = static_cast<double>(c.n_plus - c.n_minus) / n;
  const double even = 0.5 * psi_sq * std::log1p(-b * b);
  const double odd = 0.5 * psi_bar * (std::log1p(b) - std::log1p(-b));
  return minus_side ? even - odd : even + odd;
}

struct ImprovedInputs {
  double n = 0.0;        // observations
  double norm_sq = 0.0;  // D_k
  double cd = 0.0;       // C_k D_k
  std::function<double(double, bool)> log_moment;  // (b, minus_side)
};

ConfidenceInterval improved_core(const ImprovedInputs& in, double eps, double beta1, double beta2,
                                 double union_count) {
  require_level(eps);
  const double beta_max = in.n / std::sqrt(in.cd);
  if (!(beta1 > 0.0 && beta1 < beta_max) || !(beta2 > 0.0 && beta2 < beta_max))
    throw InvalidBeta("beta must lie in (0, N/sqrt(C_k D_k))");
  const double level = std::log(2.0 * union_count / eps) / in.n;
  const double s_plus = in.log_moment(beta1 / in.n, false);
  const double s_minus = in.log_moment(beta2 / in.n, true);
  ConfidenceInterval out;
  out.lower = (in.n * std::exp(s_plus - level) - in.n) / (in.norm_sq * beta1);
  out.upper = (in.n - in.n * std::exp(s_minus - level)) / (in.norm_sq * beta2);
  return out;
}

ConfidenceInterval grid_core(const ImprovedInputs& in, double eps, double a, double union_count,
                             bool* empty_grid) {
  require_level(eps);
  if (!(a > 1.0)) throw std::invalid_argument("grid base must exceed 1");
  const double log_span = std::log(in.n) - 0.5 * std::log(in.cd);
  const int l_max = static_cast<int>(std::floor(log_span / std::log(a))) - 1;
  const double eps_adj = eps * std::log(a) / log_span;
  if (l_max < 0 || !(eps_adj > 0.0 && eps_adj < 1.0)) {
    if (empty_grid) *empty_grid = true;
    return ConfidenceInterval{};
  }
  ConfidenceInterval best;
  bool first = true;
  for (int l = 0; l <= l_max; ++l) {
    const double beta = std::pow(a, l);
    const ConfidenceInterval iv = improved_core(in, eps_adj, beta, beta, union_count);
    if (first) {
      best = iv;
      first = false;
    } else {
      best.lower = std::max(best.lower, iv.lower);
      best.upper = std::min(best.upper, iv.upper);
    }
  }
  return best;
}

ImprovedInputs inputs_from_estimate(const CoefficientEstimate& est, const BasisFamily& family,
                                    const HpCertificate& cert, bool ternary_rewrite) {
  ImprovedInputs in;
  in.n = static_cast<double>(est.n);
  in.norm_sq = family.norm_sq(est.k);
  in.cd = cert.C(est.k) * in.norm_sq;
  if (ternary_rewrite) {
    if (!est.has_counts())
      throw FamilyMismatch("ternary closed form needs a {-1,0,1}-valued basis entry");
    const TernaryCounts c = est.counts();
    const long n = est.n;
    in.log_moment = [c, n](double b, bool minus) { return log_moment_ternary(c, n, b, minus); };
  } else {
    in.log_moment = [&est](double b, bool minus) { return log_moment(est, b, minus); };
  }
  return in;
}

}  // namespace

ConfidenceInterval alpha_bounds_improved(const CoefficientEstimate& est, const BasisFamily& family,
                                         const HpCertificate& cert, double eps, double beta1,
                                         double beta2, long m_effective) {
  require_index(family, est.k);
  if (m_effective < 1) throw std::invalid_argument("m_effective must be at least 1");
  const ImprovedInputs in = inputs_from_estimate(est, family, cert, false);
  return improved_core(in, eps, beta1, beta2, static_cast<double>(m_effective));
}

ConfidenceInterval alpha_bounds_grid(const CoefficientEstimate& est, const BasisFamily& family,
                                     const HpCertificate& cert, double eps, double a,
                                     long m_effective) {
  require_index(family, est.k);
  if (m_effective < 1) throw std::invalid_argument("m_effective must be at least 1");
  const ImprovedInputs in = inputs_from_estimate(est, family, cert, false);
  bool empty = false;
  ConfidenceInterval iv = grid_core(in, eps, a, static_cast<double>(m_effective), &empty);
  if (empty) {
    iv = theorem1_interval(est, family, cert, eps, m_effective);
    iv.fallback = true;
  }
  return iv;
}

namespace {

// Lower confidence bound for a Bernoulli mean p at level eps_total,
// from the closed-form optimization of the binomial log-moment bound.
double binomial_lower(double p_hat, double q_pow, double /*n*/) {
  const double spread = std::max(0.0, 1.0 / q_pow - 1.0);
  return p_hat * q_pow - std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat) * spread));
}

}  // namespace

double alpha_lower_histogram(const CoefficientEstimate& est, double lambda_cell, double eps,
                             long m_effective, long n) {
  require_level(eps);
  if (!(lambda_cell > 0.0)) throw std::invalid_argument("cell length must be positive");
  if (n < 2) throw std::invalid_argument("closed-form histogram bound needs n >= 2");
  const double p_hat = std::clamp(est.alpha_hat * lambda_cell, 0.0, 1.0);
  const double log_span = std::log(static_cast<double>(n)) - 0.5 * std::log(lambda_cell);
  const double eps_adj = eps * std::log(2.0) / log_span;
  const double q_pow =
      std::pow(eps_adj / (2.0 * static_cast<double>(m_effective)), 1.0 / static_cast<double>(n));
  return binomial_lower(p_hat, q_pow, static_cast<double>(n)) / lambda_cell;
}

ConfidenceInterval alpha_bounds_histogram(const CoefficientEstimate& est, const BasisFamily& family,
                                          double eps, long m_effective) {
  require_index(family, est.k);
  const double lambda = family.norm_sq(est.k);
  ConfidenceInterval iv;
  iv.lower = alpha_lower_histogram(est, lambda, eps, m_effective, est.n);
  // Upper side: identical construction applied to the complement indicator.
  const double p_hat = std::clamp(est.alpha_hat * lambda, 0.0, 1.0);
  const double log_span = std::log(static_cast<double>(est.n)) - 0.5 * std::log(lambda);
  const double eps_adj = eps * std::log(2.0) / log_span;
  const double q_pow = std::pow(eps_adj / (2.0 * static_cast<double>(m_effective)),
                                1.0 / static_cast<double>(est.n));
  const double comp_lower = binomial_lower(1.0 - p_hat, q_pow, static_cast<double>(est.n));
  iv.upper = (1.0 - comp_lower) / lambda;
  return iv;
}

ConfidenceInterval alpha_bounds_haar(const CoefficientEstimate& est, const BasisFamily& family,
                                     const HpCertificate& cert, double eps, double a,
                                     long m_effective) {
  require_index(family, est.k);
  if (m_effective < 1) throw std::invalid_argument("m_effective must be at least 1");
  const ImprovedInputs in = inputs_from_estimate(est, family, cert, true);
  bool empty = false;
  ConfidenceInterval iv = grid_core(in, eps, a, static_cast<double>(m_effective), &empty);
  if (empty) {
    iv = theorem1_interval(est, family, cert, eps, m_effective);
    iv.fallback = true;
  }
  return iv;
}

ConfidenceInterval alpha_bounds_loo(const Sample& sample, const BasisFamily& family,
                                    const HpCertificate& cert, int k, double eps, double a,
                                    long m_prime, bool union_all) {
  require_index(family, k);
  if (m_prime < 1) throw std::invalid_argument("m_prime must be at least 1");
  const CoefficientEstimate est = estimate_coefficient_loo(sample, family, k);
  const double union_count =
      union_all ? static_cast<double>(m_prime) * static_cast<double>(sample.n()) : 1.0;
  const ImprovedInputs in = inputs_from_estimate(est, family, cert, false);
  bool empty = false;
  ConfidenceInterval iv = grid_core(in, eps, a, union_count, &empty);
  if (empty) {
    const double beta =
        (4.0 * (1.0 + std::log(2.0 * union_count / eps)) / static_cast<double>(est.n)) *
        (est.sum_sq / family.norm_sq(k) + cert.C(k));
    const double rho = std::sqrt(beta / family.norm_sq(k));
    iv = ConfidenceInterval{est.alpha_hat - rho, est.alpha_hat + rho, true};
  }
  return iv;
}

ConfidenceInterval asymptotic_interval(const CoefficientEstimate& est, double eps,
                                       long m_effective, double norm_sq, bool literal) {
  require_level(eps);
  if (m_effective < 1) throw std::invalid_argument("m_effective must be at least 1");
  const double n = static_cast<double>(est.n);
  const double log_term = std::log(2.0 * static_cast<double>(m_effective) / eps);
  const double halfwidth = literal
                               ? std::sqrt(log_term * est.v_hat / n)
                               : std::sqrt(2.0 * est.v_hat * log_term / n) / norm_sq;
  return ConfidenceInterval{est.alpha_hat - halfwidth, est.alpha_hat + halfwidth, false};
}

std::string to_string(UnionBound u) { return u == UnionBound::all_m ? "all" : "individual"; }

std::string to_string(const IntervalMethod& method) {
  switch (method.kind) {
    case IntervalMethod::Kind::theorem1: return "theorem1";
    case IntervalMethod::Kind::improved_grid: return "improved-grid";
    case IntervalMethod::Kind::histogram_closed: return "histogram";
    case IntervalMethod::Kind::haar_closed: return "haar";
    case IntervalMethod::Kind::asymptotic:
      return method.literal ? "asymptotic-literal" : "asymptotic-corrected";
    case IntervalMethod::Kind::leave_one_out: return "loo";
  }
  throw std::logic_error("unknown interval method");
}

IntervalMethod interval_method_from_string(const std::string& method,
                                           const std::string& union_bound) {
  IntervalMethod m;
  if (method == "theorem1")
    m.kind = IntervalMethod::Kind::theorem1;
  else if (method == "improved-grid")
    m.kind = IntervalMethod::Kind::improved_grid;
  else if (method == "histogram")
    m.kind = IntervalMethod::Kind::histogram_closed;
  else if (method == "haar")
    m.kind = IntervalMethod::Kind::haar_closed;
  else if (method == "asymptotic-literal") {
    m.kind = IntervalMethod::Kind::asymptotic;
    m.literal = true;
  } else if (method == "asymptotic-corrected") {
    m.kind = IntervalMethod::Kind::asymptotic;
    m.literal = false;
  } else if (method == "loo")
    m.kind = IntervalMethod::Kind::leave_one_out;
  else
    throw std::invalid_argument("unknown interval method: " + method);
  if (union_bound == "all")
    m.union_bound = UnionBound::all_m;
  else if (union_bound == "individual")
    m.union_bound = UnionBound::individual;
  else
    throw std::invalid_argument("unknown union bound: " + union_bound);
  return m;
}

ConfidenceInterval interval_for(const Sample& sample, const FamilyWithCertificate& fwc, int k,
                                const IntervalMethod& method, double eps,
                                SlabDiagnostics* diagnostics) {
  const BasisFamily& family = *fwc.family;
  require_index(family, k);
  const long m_eff =
      method.union_bound == UnionBound::all_m ? static_cast<long>(family.size()) : 1;
  ConfidenceInterval iv;
  CoefficientEstimate est;
  switch (method.kind) {
    case IntervalMethod::Kind::theorem1:
      est = estimate_coefficient(sample, family, k, DetailPolicy::none);
      iv = theorem1_interval(est, family, fwc.certificate, eps, m_eff);
      break;
    case IntervalMethod::Kind::improved_grid:
      est = estimate_coefficient(sample, family, k);
      iv = alpha_bounds_grid(est, family, fwc.certificate, eps, method.grid_base, m_eff);
      break;
    case IntervalMethod::Kind::histogram_closed:
      if (!std::holds_alternative<IndicatorAtom>(family.atom(k)))
        throw FamilyMismatch("histogram closed form needs an indicator entry");
      est = estimate_coefficient(sample, family, k, DetailPolicy::none);
      iv = alpha_bounds_histogram(est, family, eps, m_eff);
      break;
    case IntervalMethod::Kind::haar_closed:
      est = estimate_coefficient(sample, family, k);
      iv = alpha_bounds_haar(est, family, fwc.certificate, eps, method.grid_base, m_eff);
      break;
    case IntervalMethod::Kind::asymptotic:
      est = estimate_coefficient(sample, family, k, DetailPolicy::none);
      iv = asymptotic_interval(est, eps, m_eff, family.norm_sq(k), method.literal);
      break;
    case IntervalMethod::Kind::leave_one_out: {
      if (!family.anchor(k))
        throw FamilyMismatch("leave-one-out intervals need a data-anchored family");
      const long m_prime =
          std::max<long>(1, static_cast<long>(family.size()) / static_cast<long>(sample.n()));
      iv = alpha_bounds_loo(sample, family, fwc.certificate, k, eps, method.grid_base, m_prime,
                            method.union_bound == UnionBound::all_m);
      break;
    }
  }
  if (diagnostics && iv.fallback) ++diagnostics->fallbacks;
  if (iv.lower > iv.upper) {
    // Degenerate interval (tiny-N asymptotics); widen to the theorem1 slab.
    est = estimate_coefficient(sample, family, k, DetailPolicy::none);
    iv = theorem1_interval(est, family, fwc.certificate, eps, m_eff);
    iv.fallback = true;
    if (diagnostics) ++diagnostics->widened;
  }
  return iv;
}

std::vector<Slab> build_slabs(const Sample& sample, const FamilyWithCertificate& fwc,
                              const IntervalMethod& method, double eps,
                              SlabDiagnostics* diagnostics) {
  std::vector<Slab> slabs;
  const int m = fwc.family->size();
  slabs.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const ConfidenceInterval iv = interval_for(sample, fwc, k, method, eps, diagnostics);
    slabs.push_back(Slab{k, iv.center(), std::max(0.0, 0.5 * iv.width())});
  }
  return slabs;
}

}  // namespace slabdens
