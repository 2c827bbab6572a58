// Acceptance gate: one line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "slabdens/basis.hpp"
#include "slabdens/bench.hpp"
#include "slabdens/bounds.hpp"
#include "slabdens/density.hpp"
#include "slabdens/estimators.hpp"
#include "slabdens/fnspace.hpp"

using namespace slabdens;

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void note(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  va_end(args);
  std::fputc('\n', stderr);
}

// --- criterion 1: simulation grid within a factor of two of the reference ---

bool criterion_simulation_grid() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentReport report = run_figure2(1024, 20, 0.1, 1);
  const double elapsed = seconds_since(t0);
  if (elapsed >= 600.0) {
    note("simulation grid took %.1f s", elapsed);
    return false;
  }
  const std::map<std::pair<std::string, std::string>, double> reference = {
      {{"doppler", "wavelet-hard"}, 0.104},   {{"doppler", "wavelet-soft"}, 0.127},
      {{"doppler", "multiple-kernel"}, 0.083}, {{"heavisine", "wavelet-hard"}, 0.071},
      {{"heavisine", "wavelet-soft"}, 0.066},  {{"heavisine", "multiple-kernel"}, 0.040},
      {{"blocks", "wavelet-hard"}, 0.110},     {{"blocks", "wavelet-soft"}, 0.142},
      {{"blocks", "multiple-kernel"}, 0.121}};
  if (report.rows.size() != reference.size()) return false;
  std::map<std::pair<std::string, std::string>, double> got;
  bool ok = true;
  for (const Figure2Row& row : report.rows) {
    got[{row.density, row.estimator}] = row.mean_d2;
    if (row.failures != 0) {
      note("%s/%s had %ld failed replicates", row.density.c_str(), row.estimator.c_str(),
           row.failures);
      ok = false;
    }
  }
  for (const auto& [key, ref] : reference) {
    const auto it = got.find(key);
    if (it == got.end()) {
      note("missing cell %s/%s", key.first.c_str(), key.second.c_str());
      return false;
    }
    if (!(it->second >= 0.5 * ref && it->second <= 2.0 * ref)) {
      note("%s/%s: mean d2 %.4f outside [%.4f, %.4f]", key.first.c_str(), key.second.c_str(),
           it->second, 0.5 * ref, 2.0 * ref);
      ok = false;
    }
  }
  // the kernel estimator wins on the two smooth densities
  for (const std::string density : {"doppler", "heavisine"}) {
    const double kernel = got[{density, "multiple-kernel"}];
    if (!(kernel < got[{density, "wavelet-hard"}] && kernel < got[{density, "wavelet-soft"}])) {
      note("multiple-kernel not best on %s", density.c_str());
      ok = false;
    }
  }
  return ok;
}

// --- criterion 2: joint coverage of every guaranteed method ---

bool criterion_coverage() {
  struct Setup {
    const char* method;
    std::vector<const char*> bases;
  };
  const std::vector<Setup> setups = {
      {"theorem1", {"histogram-8", "haar-4"}},
      {"improved-grid", {"histogram-8", "haar-4"}},
      {"haar", {"haar-4"}},
      {"histogram", {"histogram-8"}},
      {"loo", {"svm-64"}},
  };
  bool ok = true;
  std::uint64_t seed = 100;
  for (const Setup& setup : setups) {
    const auto t0 = std::chrono::steady_clock::now();
    const IntervalMethod method = interval_method_from_string(setup.method, "all");
    for (const char* basis : setup.bases)
      for (const char* density : {"uniform", "blocks"}) {
        const CoverageReport r = run_coverage(density, basis, method, 0.1, 200, seed++, 256);
        if (r.coverage < 0.87) {
          note("%s on %s/%s: coverage %.3f < 0.87", setup.method, density, basis, r.coverage);
          ok = false;
        }
      }
    const double elapsed = seconds_since(t0);
    if (elapsed >= 300.0) {
      note("%s coverage runs took %.1f s", setup.method, elapsed);
      ok = false;
    }
  }
  return ok;
}

// --- criterion 3: the four solvers and the projection oracle agree ---

bool criterion_solver_equivalence() {
  bool ok = true;

  // (a) orthogonal instances: soft = greedy = intersection = dual
  const Density densities[3] = {make_density("uniform"), make_density("blocks"),
                                make_density("cosine")};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Density& density = densities[i % 3];
    const FamilyWithCertificate fwc = (i % 4 == 0)   ? histogram_family(8)
                                      : (i % 4 == 1) ? haar_family(3)
                                      : (i % 4 == 2) ? histogram_family(4)
                                                     : haar_family(2);
    EstimatorConfig cfg;
    cfg.method = interval_method_from_string(i % 2 == 0 ? "theorem1" : "improved-grid", "all");
    cfg.eps = 0.1;
    cfg.kappa_stop = 1e-300;
    const Sample s = draw_sample(density, 128L << (i % 3), 1000 + i);
    const SpanElement soft = soft_threshold(s, fwc, cfg);
    const SpanElement greedy = fit_greedy(s, fwc, cfg).estimate;
    const SpanElement inter = fit_intersection(s, fwc, cfg);
    const std::vector<Slab> slabs = build_slabs(s, fwc, cfg.method, cfg.eps);
    const SpanElement dual = dual_solve(slabs, gram(*fwc.family), fwc.family);
    worst = std::max({worst, dist2(soft, greedy), dist2(soft, inter), dist2(soft, dual)});
  }
  if (worst > 1e-10) {
    note("orthogonal solver disagreement: %g", worst);
    ok = false;
  }

  // (b) single-slab projection beats every feasible perturbation
  const FamilyWithCertificate corr = gaussian_kernel_family(3, {4.0}, false);
  const GramMatrix gm = gram(*corr.family);
  std::mt19937 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd start(3);
    for (int k = 0; k < 3; ++k) start[k] = normal(rng);
    const SpanElement g(corr.family, start);
    const Slab slab{i % 3, normal(rng), 0.05 + 0.1 * (i % 2)};
    const SpanElement p = project_slab(g, slab);
    const double base = dist2(g, p);
    const double dk = corr.family->norm_sq(slab.k);
    for (int trial = 0; trial < 2000; ++trial) {
      Eigen::VectorXd cand = p.coefficients();
      for (int k = 0; k < 3; ++k) cand[k] += 0.3 * normal(rng);
      const double t = gm.matrix().row(slab.k).dot(cand) / dk - slab.center;
      if (std::abs(t) > slab.halfwidth) continue;
      if (dist2(g, SpanElement(corr.family, cand)) < base - 1e-10) {
        note("slab projection beaten on instance %d", i);
        ok = false;
      }
    }
  }

  // (c) alternating projections vs the dual solver on correlated families
  double worst_pair = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int centers = 2 + (i % 7);
    const bool with_constant = (i % 2) == 0;
    const double gamma = (i % 3 == 0) ? 4.0 : (i % 3 == 1) ? 16.0 : 64.0;
    const FamilyWithCertificate fwc = gaussian_kernel_family(centers, {gamma}, with_constant);
    const int m = fwc.family->size();
    const GramMatrix g = gram(*fwc.family);
    std::mt19937 inst(500 + i);
    std::normal_distribution<double> coef(0.0, 0.7);
    std::uniform_real_distribution<double> width(0.05, 0.35);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    Eigen::VectorXd h(m);
    for (int k = 0; k < m; ++k) h[k] = coef(inst);
    const Eigen::VectorXd w = g.matrix() * h;
    std::vector<Slab> slabs;
    for (int k = 0; k < m; ++k) {
      const double rho = width(inst);
      slabs.push_back(
          Slab{k, w[k] / fwc.family->norm_sq(k) + jitter(inst) * rho, rho});
    }
    const SpanElement zero = SpanElement::zero(fwc.family);
    const SpanElement dykstra = project_intersection(slabs, zero);
    const SpanElement dual = dual_solve(slabs, g, fwc.family);
    worst_pair = std::max(worst_pair, dist2(dykstra, dual));
  }
  if (worst_pair > 1e-6) {
    note("projection/dual disagreement: %g", worst_pair);
    ok = false;
  }
  return ok;
}

// --- criterion 4: greedy distance decay on event replicates ---

bool criterion_greedy_monotone() {
  const Density densities[3] = {make_density("blocks"), make_density("cosine"),
                                make_density("heavisine")};
  std::map<std::pair<int, int>, Eigen::VectorXd> oracle_cache;
  EstimatorConfig cfg;
  cfg.method = interval_method_from_string("theorem1", "all");
  cfg.eps = 0.1;
  int events = 0;
  bool ok = true;
  for (int i = 0; i < 100; ++i) {
    const Density& density = densities[i % 3];
    const FamilyWithCertificate fwc = (i % 2 == 0) ? histogram_family(8) : haar_family(3);
    const auto key = std::make_pair(i % 3, i % 2);
    auto it = oracle_cache.find(key);
    if (it == oracle_cache.end()) {
      Eigen::VectorXd alpha(fwc.family->size());
      for (int k = 0; k < fwc.family->size(); ++k)
        alpha[k] = oracle_alpha(density, *fwc.family, k);
      it = oracle_cache.emplace(key, std::move(alpha)).first;
    }
    const SpanElement target(fwc.family, it->second);

    const Sample s = draw_sample(density, 1024, 2000 + i);
    const std::vector<Slab> slabs = build_slabs(s, fwc, cfg.method, cfg.eps);
    bool event = true;
    for (const Slab& sl : slabs)
      if (std::abs(it->second[sl.k] - sl.center) > sl.halfwidth) event = false;
    if (!event) continue;
    ++events;

    const FitResult fit = fit_greedy_slabs(slabs, fwc.family, cfg, s.n());
    const SpanElement zero = SpanElement::zero(fwc.family);
    double prev = dist2(zero, target);
    const double initial = prev;
    double gains = 0.0;
    for (long step = 1; step <= fit.trace.n_s; ++step) {
      EstimatorConfig partial = cfg;
      partial.max_iter = step;
      const SpanElement g = fit_greedy_slabs(slabs, fwc.family, partial, s.n()).estimate;
      const double d = dist2(g, target);
      if (d > prev + 1e-12) {
        note("distance to the oracle grew at step %ld of replicate %d", step, i);
        ok = false;
      }
      gains += fit.trace.steps[static_cast<std::size_t>(step - 1)].gain;
      prev = d;
    }
    // telescoped progress bound
    if (gains > initial - prev + 1e-9) {
      note("telescoped gains overshoot on replicate %d", i);
      ok = false;
    }
    // squared L2 error against the true density does not grow either
    const double before = dist2_to_density(zero, density);
    const double after = dist2_to_density(fit.estimate, density);
    if (after > before + 1e-9) {
      note("true risk grew on replicate %d (%.6f -> %.6f)", i, before, after);
      ok = false;
    }
  }
  if (events < 80) {
    note("only %d/100 replicates realized the joint event", events);
    ok = false;
  }
  return ok;
}

// --- criterion 5: ternary closed form == generic log-moment optimization ---

bool criterion_ternary_closed_form() {
  const Density densities[3] = {make_density("blocks"), make_density("cosine"),
                                make_density("uniform")};
  double worst = 0.0;
  for (int level = 2; level <= 4; ++level) {
    const FamilyWithCertificate fwc = haar_family(level);
    for (int di = 0; di < 3; ++di)
      for (long n : {64L, 256L, 1024L}) {
        const Sample s = draw_sample(densities[di], n, 4000 + 10 * level + di);
        for (int k = 0; k < fwc.family->size(); ++k) {
          const CoefficientEstimate est = estimate_coefficient(s, *fwc.family, k);
          if (!est.has_counts()) return false;
          CoefficientEstimate raw = est;
          std::vector<double> values;
          values.reserve(s.points.size());
          for (double x : s.points) values.push_back(fwc.family->eval(k, x));
          raw.detail = std::move(values);
          for (double eps : {0.1, 0.01})
            for (double a : {2.0, 1.5}) {
              const ConfidenceInterval tern =
                  alpha_bounds_haar(est, *fwc.family, fwc.certificate, eps, a,
                                    fwc.family->size());
              const ConfidenceInterval gen =
                  alpha_bounds_grid(raw, *fwc.family, fwc.certificate, eps, a,
                                    fwc.family->size());
              worst = std::max(worst, std::abs(tern.lower - gen.lower) /
                                          std::max(1.0, std::abs(gen.lower)));
              worst = std::max(worst, std::abs(tern.upper - gen.upper) /
                                          std::max(1.0, std::abs(gen.upper)));
              if (tern.fallback != gen.fallback) return false;
            }
        }
      }
  }
  if (worst > 1e-12) {
    note("ternary/generic disagreement: %g", worst);
    return false;
  }
  return true;
}

// --- criterion 6: soft-threshold risk decays at a nontrivial rate ---

bool criterion_rates() {
  const auto t0 = std::chrono::steady_clock::now();
  const RateStudy study = run_rates("cosine", "trig", 128, 4096, 10, 3);
  const double elapsed = seconds_since(t0);
  if (elapsed >= 600.0) {
    note("rate study took %.1f s", elapsed);
    return false;
  }
  if (!(study.slope >= -1.2 && study.slope <= -0.3)) {
    note("rate slope %.3f outside [-1.2, -0.3]", study.slope);
    return false;
  }
  return true;
}

// --- criterion 7: the grid bound sharpens the concentration slab ---

bool criterion_grid_sharpens() {
  const Density uniform = make_density("uniform");
  const FamilyWithCertificate hist = histogram_family(2);
  int sharper = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Sample s = draw_sample(uniform, 4096, 3000 + rep);
    bool all = true;
    for (int k = 0; k < 2; ++k) {
      const CoefficientEstimate est = estimate_coefficient(s, *hist.family, k);
      const ConfidenceInterval grid =
          alpha_bounds_grid(est, *hist.family, hist.certificate, 0.1, 2.0, 2);
      const ConfidenceInterval t1 =
          theorem1_interval(est, *hist.family, hist.certificate, 0.1, 2);
      if (grid.fallback || !(grid.width() < t1.width())) all = false;
    }
    if (all) ++sharper;
  }
  if (sharper < 95) {
    note("grid narrower in only %d/100 replicates", sharper);
    return false;
  }
  return true;
}

// --- criterion 8: identical CLI invocations produce identical bytes ---

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

bool criterion_cli_determinism() {
  const char* cli = std::getenv("SLABDENS_CLI_PATH");
#ifdef SLABDENS_CLI_PATH
  if (!cli || !*cli) cli = SLABDENS_CLI_PATH;
#endif
  if (!cli || !*cli) {
    note("SLABDENS_CLI_PATH is not set");
    return false;
  }
  const std::string exe = std::string("\"") + cli + "\"";

  // a deterministic sample file for the estimate subcommand
  const Density blocks = make_density("blocks");
  const Sample s = draw_sample(blocks, 200, 31);
  {
    std::ofstream data("accept_sample.txt", std::ios::binary);
    for (double x : s.points) data << format_double(x) << "\n";
  }

  const std::vector<std::pair<std::string, std::string>> invocations = {
      {" estimate --data accept_sample.txt --basis histogram-8 --method improved-grid "
       "--algo greedy --eps 0.1 --out ",
       "accept_est"},
      {" estimate --data accept_sample.txt --basis haar-4 --method haar --algo soft --out ",
       "accept_soft"},
      {" bench figure2 --n 64 --reps 2 --eps 0.1 --seed 7 --out ", "accept_fig"},
      {" bench coverage --density uniform --basis histogram-8 --method theorem1 --reps 10 "
       "--n 128 --seed 5 --out ",
       "accept_cov"},
      {" bench rates --density uniform --basis trig --n-min 64 --n-max 512 --reps 2 --seed 3 "
       "--out ",
       "accept_rates"},
  };
  for (const auto& [args, stem] : invocations) {
    const std::string first = stem + "_1.out";
    const std::string second = stem + "_2.out";
    if (std::system((exe + args + first).c_str()) != 0 ||
        std::system((exe + args + second).c_str()) != 0) {
      note("CLI invocation failed: %s", args.c_str());
      return false;
    }
    const std::string a = slurp(first);
    const std::string b = slurp(second);
    if (a.empty() || a != b) {
      note("outputs differ for: %s", args.c_str());
      return false;
    }
  }
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    bool (*run)();
  };
  const Criterion criteria[] = {
      {"simulation-grid-accuracy", criterion_simulation_grid},
      {"joint-coverage", criterion_coverage},
      {"solver-equivalence", criterion_solver_equivalence},
      {"greedy-monotonicity", criterion_greedy_monotone},
      {"ternary-closed-form", criterion_ternary_closed_form},
      {"rate-decay", criterion_rates},
      {"grid-sharpens-theorem1", criterion_grid_sharpens},
      {"cli-determinism", criterion_cli_determinism},
  };
  int failures = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    bool pass = false;
    try {
      pass = c.run();
    } catch (const std::exception& e) {
      note("criterion %d threw: %s", index, e.what());
    }
    std::printf("criterion %d (%s): %s\n", index, c.name, pass ? "PASS" : "FAIL");
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
