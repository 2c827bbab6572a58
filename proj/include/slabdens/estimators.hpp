#pragma once

#include <optional>
#include <vector>

#include "slabdens/bounds.hpp"
#include "slabdens/fnspace.hpp"
#include "slabdens/sample.hpp"

namespace slabdens {

struct EstimatorConfig {
  IntervalMethod method;
  double eps = 0.1;
  double kappa_stop = 0.0;  // 0 -> default 1/(2N)
  long max_iter = 0;        // 0 -> default 50*m
  std::optional<double> cap_c;
};

struct GreedyStep {
  long n = 0;       // step number, starting at 0
  int k = 0;        // chosen slab
  double gain = 0;  // dist2(g_{n+1}, g_n) = D_k (|t|-rho)_+^2
};

struct GreedyTrace {
  std::vector<GreedyStep> steps;
  long n_s = 0;                // stopping step = number of steps taken
  bool hit_max_iter = false;   // stopped by the iteration cap, gain still above kappa
  double final_max_gain = 0.0; // max gain at the stopping decision
};

struct FitResult {
  SpanElement estimate;
  GreedyTrace trace;
  SlabDiagnostics diagnostics;
};

/// Greedy successive projection: from 0, repeatedly project onto the slab
/// with the largest displacement until the best gain drops to kappa_stop.
FitResult fit_greedy(const Sample& sample, const FamilyWithCertificate& fwc,
                     const EstimatorConfig& config);

/// Same algorithm on prebuilt slabs (shared by the CLI and benchmarks).
FitResult fit_greedy_slabs(const std::vector<Slab>& slabs,
                           const std::shared_ptr<const BasisFamily>& family,
                           const EstimatorConfig& config, long sample_size);

/// Projection of 0 onto the intersection of all m slabs.
SpanElement fit_intersection(const Sample& sample, const FamilyWithCertificate& fwc,
                             const EstimatorConfig& config);

/// Dual of the intersection projection: coordinate ascent on
/// -g'Gg + 2 sum g_k c_k D_k - 2 sum |g_k| rho_k D_k.
SpanElement dual_solve(const std::vector<Slab>& slabs, const GramMatrix& gram,
                       const std::shared_ptr<const BasisFamily>& family);

/// Orthogonal fast path: clip 0 into every slab coordinate-wise; equals
/// sign(c_k)(|c_k|-rho_k)_+ for symmetric slabs.  Applies the cap when set.
SpanElement soft_threshold(const Sample& sample, const FamilyWithCertificate& fwc,
                           const EstimatorConfig& config);

/// Classical keep-or-kill wavelet baseline on the dyadic Haar family of
/// resolution 2^J: keep |alpha_hat_{j,k}| >= kappa_thr sqrt(j/N); the
/// father and level-0 coefficients are always kept.
SpanElement hard_threshold_baseline(const Sample& sample, int resolution_J, double kappa_thr,
                                    bool level_scaled_threshold = false);

/// Kernel-grid estimator: Gaussian entries at i/N for each bandwidth plus
/// the constant, individual CLT slabs, greedy fit.
SpanElement fit_multiple_kernel(const Sample& sample, const std::vector<double>& gammas,
                                const EstimatorConfig& config);

}  // namespace slabdens
