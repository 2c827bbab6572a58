#include "slabdens/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "slabdens/errors.hpp"

namespace slabdens {

namespace {

double slab_excess(double t, double halfwidth) {
  if (t > halfwidth) return t - halfwidth;
  if (t < -halfwidth) return t + halfwidth;
  return 0.0;
}

void validate_config(const EstimatorConfig& config, long n) {
  if (!(config.eps > 0.0 && config.eps < 1.0))
    throw InvalidLevel("confidence level must lie in (0,1)");
  if (config.kappa_stop < 0.0 ||
      (config.kappa_stop > 0.0 && config.kappa_stop > 1.0 / static_cast<double>(n)))
    throw std::invalid_argument("kappa_stop must lie in (0, 1/N]");
  if (config.max_iter < 0) throw std::invalid_argument("max_iter must be nonnegative");
}

}  // namespace

FitResult fit_greedy_slabs(const std::vector<Slab>& slabs,
                           const std::shared_ptr<const BasisFamily>& family,
                           const EstimatorConfig& config, long sample_size) {
  const BasisFamily& fam = *family;
  const int m = fam.size();
  const bool orthogonal = fam.rule() == InnerProductRule::orthogonal;
  const double kappa = config.kappa_stop > 0.0 ? config.kappa_stop
                                               : 0.5 / static_cast<double>(sample_size);
  const long max_iter = config.max_iter > 0 ? config.max_iter : 50L * m;

  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);  // w = G gamma
  Eigen::VectorXd col;

  FitResult out{SpanElement::zero(family), GreedyTrace{}, SlabDiagnostics{}};
  GreedyTrace& trace = out.trace;
  for (long step = 0;; ++step) {
    double best_gain = 0.0, best_excess = 0.0;
    int best = -1;
    for (std::size_t j = 0; j < slabs.size(); ++j) {
      const Slab& s = slabs[j];
      const double dk = fam.norm_sq(s.k);
      const double excess = slab_excess(w[s.k] / dk - s.center, s.halfwidth);
      const double gain = dk * excess * excess;
      if (gain > best_gain) {
        best_gain = gain;
        best_excess = excess;
        best = static_cast<int>(j);
      }
    }
    trace.final_max_gain = best_gain;
    if (best < 0 || best_gain <= kappa) break;
    if (step >= max_iter) {
      trace.hit_max_iter = true;
      break;
    }
    const int k = slabs[static_cast<std::size_t>(best)].k;
    gamma[k] -= best_excess;
    if (orthogonal) {
      w[k] -= best_excess * fam.norm_sq(k);
    } else {
      gram_column(fam, k, col);
      w -= best_excess * col;
    }
    trace.steps.push_back(GreedyStep{step, k, best_gain});
  }
  trace.n_s = static_cast<long>(trace.steps.size());
  out.estimate = SpanElement(family, std::move(gamma));
  return out;
}

FitResult fit_greedy(const Sample& sample, const FamilyWithCertificate& fwc,
                     const EstimatorConfig& config) {
  validate_config(config, sample.n());
  SlabDiagnostics diag;
  const std::vector<Slab> slabs = build_slabs(sample, fwc, config.method, config.eps, &diag);
  FitResult out = fit_greedy_slabs(slabs, fwc.family, config, sample.n());
  out.diagnostics = diag;
  return out;
}

SpanElement fit_intersection(const Sample& sample, const FamilyWithCertificate& fwc,
                             const EstimatorConfig& config) {
  validate_config(config, sample.n());
  const std::vector<Slab> slabs = build_slabs(sample, fwc, config.method, config.eps);
  return project_intersection(slabs, SpanElement::zero(fwc.family));
}

SpanElement dual_solve(const std::vector<Slab>& slabs, const GramMatrix& gram,
                       const std::shared_ptr<const BasisFamily>& family) {
  const int m = family->size();
  if (gram.size() != m) throw FamilyMismatch("gram matrix does not match the family");
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram.matrix(), Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, gram.matrix().trace());
    if (es.eigenvalues().minCoeff() < -1e-9 * scale)
      throw DualIllPosed("gram matrix is not positive semidefinite");
  }
  const std::size_t s = slabs.size();
  // Reduced Gram over the slab indices.
  Eigen::MatrixXd g(s, s);
  Eigen::VectorXd lin(s), pen(s), diag(s);
  for (std::size_t j = 0; j < s; ++j) {
    const Slab& sj = slabs[j];
    const double dj = family->norm_sq(sj.k);
    lin[static_cast<int>(j)] = sj.center * dj;
    pen[static_cast<int>(j)] = sj.halfwidth * dj;
    diag[static_cast<int>(j)] = gram(sj.k, sj.k);
    for (std::size_t i = 0; i < s; ++i)
      g(static_cast<int>(j), static_cast<int>(i)) = gram(sj.k, slabs[i].k);
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(s);
  const long max_sweeps = 100000;
  bool converged = false;
  for (long sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      const int jj = static_cast<int>(j);
      if (diag[jj] <= 0.0) throw DualIllPosed("gram diagonal entry is not positive");
      const double r = g.row(jj).dot(x) - diag[jj] * x[jj];
      const double target = lin[jj] - r;
      const double soft = std::copysign(std::max(0.0, std::abs(target) - pen[jj]), target);
      const double next = soft / diag[jj];
      max_change = std::max(max_change, std::abs(next - x[jj]));
      x[jj] = next;
    }
    converged = max_change < 1e-10;
  }
  if (!converged) throw NoConvergence("dual coordinate ascent did not converge");
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(m);
  for (std::size_t j = 0; j < s; ++j) gamma[slabs[j].k] += x[static_cast<int>(j)];
  return SpanElement(family, std::move(gamma));
}

SpanElement soft_threshold(const Sample& sample, const FamilyWithCertificate& fwc,
                           const EstimatorConfig& config) {
  validate_config(config, sample.n());
  const BasisFamily& fam = *fwc.family;
  if (fam.rule() != InnerProductRule::orthogonal)
    throw OrthogonalityRequired("soft threshold needs an orthogonal family");
  const std::vector<Slab> slabs = build_slabs(sample, fwc, config.method, config.eps);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(fam.size());
  for (const Slab& s : slabs) {
    const double lo = s.center - s.halfwidth;
    const double hi = s.center + s.halfwidth;
    gamma[s.k] = lo > 0.0 ? lo : (hi < 0.0 ? hi : 0.0);
  }
  SpanElement out(fwc.family, std::move(gamma));
  if (config.cap_c) out = project_cap(out, *config.cap_c);
  return out;
}

SpanElement hard_threshold_baseline(const Sample& sample, int resolution_J, double kappa_thr,
                                    bool level_scaled_threshold) {
  if (resolution_J < 1) throw InvalidLevel("resolution exponent J must be at least 1");
  if (kappa_thr < 0.0) throw std::invalid_argument("threshold multiplier must be nonnegative");
  const FamilyWithCertificate fwc = haar_family(resolution_J - 1);
  const BasisFamily& fam = *fwc.family;
  const double n = static_cast<double>(sample.n());
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(fam.size());
  for (int k = 0; k < fam.size(); ++k) {
    const CoefficientEstimate est = estimate_coefficient(sample, fam, k, DetailPolicy::none);
    const int j = std::get<HaarAtom>(fam.atom(k)).level;
    bool keep = j <= 0;  // father and level 0: threshold sqrt(0/N) is vacuous
    if (!keep) {
      const double scale = level_scaled_threshold ? static_cast<double>(j) * std::pow(2.0, j)
                                                  : static_cast<double>(j);
      keep = std::abs(est.alpha_hat) >= kappa_thr * std::sqrt(scale / n);
    }
    if (keep) gamma[k] = est.alpha_hat;
  }
  return SpanElement(fwc.family, std::move(gamma));
}

SpanElement fit_multiple_kernel(const Sample& sample, const std::vector<double>& gammas,
                                const EstimatorConfig& config) {
  if (sample.n() < 1) throw std::invalid_argument("kernel estimator needs at least one point");
  const FamilyWithCertificate fwc =
      gaussian_kernel_family(static_cast<int>(sample.n()), gammas, true);
  EstimatorConfig cfg = config;
  if (cfg.method.kind != IntervalMethod::Kind::asymptotic) {
    cfg.method = IntervalMethod{};
    cfg.method.kind = IntervalMethod::Kind::asymptotic;
    cfg.method.literal = true;
    cfg.method.union_bound = UnionBound::individual;
  }
  return fit_greedy(sample, fwc, cfg).estimate;
}

}  // namespace slabdens
