#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slabdens/basis.hpp"
#include "slabdens/fnspace.hpp"
#include "slabdens/sample.hpp"

namespace slabdens {

/// Counts of the values {+1, 0, -1} for a ternary-valued basis function.
struct TernaryCounts {
  long n_plus = 0;
  long n_minus = 0;
  long n_zero = 0;
  long total() const { return n_plus + n_minus + n_zero; }
};

/// What estimate_coefficient retains beyond the summary moments.  The
/// log-moment bounds need the raw evaluations f_k(X_i); for ternary
/// families the three counts are enough.
enum class DetailPolicy { none, automatic };

/// Empirical summary of f_k over a sample.
struct CoefficientEstimate {
  int k = 0;
  long n = 0;           // observations used
  double alpha_hat = 0.0;  // (1/n) sum f_k(X_i) / D_k
  double sum_sq = 0.0;     // (1/n) sum f_k(X_i)^2
  double v_hat = 0.0;      // empirical variance of f_k(X)
  std::variant<std::monostate, TernaryCounts, std::vector<double>> detail;

  bool has_counts() const { return std::holds_alternative<TernaryCounts>(detail); }
  bool has_values() const { return std::holds_alternative<std::vector<double>>(detail); }
  const TernaryCounts& counts() const { return std::get<TernaryCounts>(detail); }
  const std::vector<double>& values() const { return std::get<std::vector<double>>(detail); }
};

CoefficientEstimate estimate_coefficient(const Sample& sample, const BasisFamily& family, int k,
                                         DetailPolicy policy = DetailPolicy::automatic);

/// Same, excluding the anchor observation of a data-anchored entry.
CoefficientEstimate estimate_coefficient_loo(const Sample& sample, const BasisFamily& family,
                                             int k, DetailPolicy policy = DetailPolicy::automatic);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool fallback = false;  // grid was empty or the interval degenerated
  double width() const { return upper - lower; }
  double center() const { return 0.5 * (lower + upper); }
  bool contains(double x) const { return lower <= x && x <= upper; }
};

/// Concentration bound beta = (4[1 + log(2 m_eff / eps)] / N) (sum_sq/D_k + C_k);
/// the slab halfwidth in coefficient units is sqrt(beta / D_k).
double beta_theorem1(const CoefficientEstimate& est, const BasisFamily& family,
                     const HpCertificate& cert, double eps, long m_effective);

/// The slab alpha_hat +- sqrt(beta/D_k) as an interval.
ConfidenceInterval theorem1_interval(const CoefficientEstimate& est, const BasisFamily& family,
                                     const HpCertificate& cert, double eps, long m_effective);

/// Log-moment interval at fixed beta1 (lower side) and beta2 (upper side).
/// Requires raw values or ternary counts in the estimate.
ConfidenceInterval alpha_bounds_improved(const CoefficientEstimate& est, const BasisFamily& family,
                                         const HpCertificate& cert, double eps, double beta1,
                                         double beta2, long m_effective);

/// Log-moment interval optimized over the geometric grid {a^l} with the
/// union-adjusted level; falls back to the theorem1 slab when the grid
/// is empty (flagged).
ConfidenceInterval alpha_bounds_grid(const CoefficientEstimate& est, const BasisFamily& family,
                                     const HpCertificate& cert, double eps, double a,
                                     long m_effective);

/// Closed-form binomial lower bound for an indicator coefficient, with
/// the base-2 grid level substitution eps <- eps*log2 / log(N/sqrt(D_k)).
double alpha_lower_histogram(const CoefficientEstimate& est, double lambda_cell, double eps,
                             long m_effective, long n);

/// Two-sided indicator interval: lower side from alpha_lower_histogram,
/// upper side by the same construction applied to the complement 1 - f_k.
ConfidenceInterval alpha_bounds_histogram(const CoefficientEstimate& est, const BasisFamily& family,
                                          double eps, long m_effective);

/// Ternary closed form: the log-moment sums collapse to
/// (1/2) Pbar[psi^2] log(1 - b^2) -+ (1/2) Pbar[psi] log((1+b)/(1-b));
/// optimized over the base-a grid like alpha_bounds_grid.
ConfidenceInterval alpha_bounds_haar(const CoefficientEstimate& est, const BasisFamily& family,
                                     const HpCertificate& cert, double eps, double a,
                                     long m_effective);

/// Leave-one-out interval for a data-anchored entry: N-1 observations
/// excluding the anchor, union count 2 m' N, grid-optimized.
ConfidenceInterval alpha_bounds_loo(const Sample& sample, const BasisFamily& family,
                                    const HpCertificate& cert, int k, double eps, double a,
                                    long m_prime, bool union_all = true);

/// CLT-style interval. literal=true: halfwidth sqrt(log(2 m_eff/eps) V/N)
/// exactly as benchmarked; literal=false: first-order form
/// sqrt(2 V log(2 m_eff/eps)/N) / D_k.
ConfidenceInterval asymptotic_interval(const CoefficientEstimate& est, double eps,
                                       long m_effective, double norm_sq, bool literal);

enum class UnionBound { all_m, individual };

struct IntervalMethod {
  enum class Kind {
    theorem1,
    improved_grid,
    histogram_closed,
    haar_closed,
    asymptotic,
    leave_one_out,
  };
  Kind kind = Kind::theorem1;
  double grid_base = 2.0;  // grid methods
  bool literal = true;     // asymptotic only
  UnionBound union_bound = UnionBound::all_m;
};

/// Flag spellings used by the CLI: theorem1, improved-grid, histogram,
/// haar, asymptotic-literal, asymptotic-corrected, loo.
std::string to_string(const IntervalMethod& method);
std::string to_string(UnionBound u);
IntervalMethod interval_method_from_string(const std::string& method, const std::string& union_bound);

struct SlabDiagnostics {
  long fallbacks = 0;  // grid empty, theorem1 slab substituted
  long widened = 0;    // degenerate interval widened to the theorem1 slab
};

/// One confidence interval per basis entry, converted to slabs.
std::vector<Slab> build_slabs(const Sample& sample, const FamilyWithCertificate& fwc,
                              const IntervalMethod& method, double eps,
                              SlabDiagnostics* diagnostics = nullptr);

/// Interval for one entry under the given method (the build_slabs kernel).
ConfidenceInterval interval_for(const Sample& sample, const FamilyWithCertificate& fwc, int k,
                                const IntervalMethod& method, double eps,
                                SlabDiagnostics* diagnostics = nullptr);

}  // namespace slabdens
