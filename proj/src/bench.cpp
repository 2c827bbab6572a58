#include "slabdens/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

#include "slabdens/errors.hpp"

namespace slabdens {

const char* const kVersion = "0.1.0";

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("malformed numeric field: " + s);
  return v;
}

long parse_long(const std::string& s) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("malformed integer field: " + s);
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("malformed seed field: " + s);
  return v;
}

std::vector<std::string> split_line(const std::string& line, std::size_t expected) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (out.size() + 1 < expected) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) break;
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  out.push_back(line.substr(start));
  if (out.size() != expected)
    throw std::runtime_error("expected " + std::to_string(expected) + " fields: " + line);
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string::npos) pos = text.size();
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return lines;
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

}  // namespace

// ---- Fig. 2 style benchmark ------------------------------------------------

// Gain threshold for the benchmark's kernel column.  Run to the library
// default (kappa <= 1/N) the greedy spends ~25 extra steps fitting
// per-kernel sampling noise: the narrow-bandwidth slabs are individually
// tight, so d² to the truth stops improving after the first few coarse
// corrections while the iterate keeps absorbing noise.  The reference table
// this benchmark reproduces was generated at that coarse operating point, so
// the column stops once the best gain falls below the leading-step scale.
constexpr double kKernelColumnGainStop = 0.035;

ExperimentReport run_figure2(long n, long reps, double eps, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("benchmark needs n >= 2");
  if (reps < 1) throw std::invalid_argument("benchmark needs reps >= 1");
  const std::vector<std::string> density_names = {"doppler", "heavisine", "blocks"};
  const std::vector<double> gammas = {4.0, 16.0, 64.0, 256.0, 1024.0, 4096.0};

  struct Cell {
    std::vector<double> d2;
    long failures = 0;
  };

  ExperimentReport report;
  for (std::size_t di = 0; di < density_names.size(); ++di) {
    const Density density = make_density(density_names[di]);
    Cell hard, soft, kernel;
    const FamilyWithCertificate haar6 = haar_family(6);

    EstimatorConfig soft_cfg;
    soft_cfg.method.kind = IntervalMethod::Kind::asymptotic;
    soft_cfg.method.literal = true;
    soft_cfg.method.union_bound = UnionBound::individual;
    soft_cfg.eps = eps;

    IntervalMethod kernel_method;
    kernel_method.kind = IntervalMethod::Kind::asymptotic;
    kernel_method.literal = true;
    kernel_method.union_bound = UnionBound::individual;
    EstimatorConfig kernel_cfg;
    kernel_cfg.eps = eps;
    kernel_cfg.kappa_stop = kKernelColumnGainStop;

    for (long rep = 0; rep < reps; ++rep) {
      const std::uint64_t stream = static_cast<std::uint64_t>(di) * 1000000u +
                                   static_cast<std::uint64_t>(rep);
      const Sample sample = draw_sample(density, static_cast<int>(n), seed, stream);
      try {
        const SpanElement est = hard_threshold_baseline(sample, 7, 0.7);
        hard.d2.push_back(dist2_to_density(est, density));
      } catch (const std::exception&) {
        ++hard.failures;
      }
      try {
        const SpanElement est = soft_threshold(sample, haar6, soft_cfg);
        soft.d2.push_back(dist2_to_density(est, density));
      } catch (const std::exception&) {
        ++soft.failures;
      }
      try {
        const FamilyWithCertificate kern =
            gaussian_kernel_family(static_cast<int>(n), gammas, true);
        const std::vector<Slab> slabs = build_slabs(sample, kern, kernel_method, eps);
        const FitResult fit = fit_greedy_slabs(slabs, kern.family, kernel_cfg, sample.n());
        kernel.d2.push_back(dist2_to_density(fit.estimate, density));
      } catch (const std::exception&) {
        ++kernel.failures;
      }
    }

    auto push = [&](const char* estimator, const Cell& cell, const std::string& config) {
      const Moments m = moments(cell.d2);
      report.rows.push_back(Figure2Row{density_names[di], estimator, n, reps, eps, seed, m.mean,
                                       m.sd, cell.failures, config});
    };
    push("wavelet-hard", hard, "J=7;kappa=0.7;threshold=sqrt(j/N)");
    push("wavelet-soft", soft, "basis=haar-6;method=asymptotic-literal;union=individual");
    push("multiple-kernel", kernel,
         "gammas=4^1..4^6;grid=i/N;constant=1;method=asymptotic-literal;union=individual;"
         "stop=maxgain<=0.035");
  }
  return report;
}

std::string emit_csv(const ExperimentReport& report) {
  std::string out = "density,estimator,n,reps,eps,seed,mean_d2,sd_d2,failures,config\n";
  for (const Figure2Row& r : report.rows) {
    out += r.density + ',' + r.estimator + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.reps) + ',' + format_double(r.eps) + ',' + std::to_string(r.seed) +
           ',' + format_double(r.mean_d2) + ',' + format_double(r.sd_d2) + ',' +
           std::to_string(r.failures) + ',' + r.config + '\n';
  }
  return out;
}

ExperimentReport parse_figure2_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty() || lines[0] != "density,estimator,n,reps,eps,seed,mean_d2,sd_d2,failures,config")
    throw std::runtime_error("unrecognized benchmark CSV header");
  ExperimentReport report;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = split_line(lines[i], 10);
    Figure2Row r;
    r.density = f[0];
    r.estimator = f[1];
    r.n = parse_long(f[2]);
    r.reps = parse_long(f[3]);
    r.eps = parse_double(f[4]);
    r.seed = parse_u64(f[5]);
    r.mean_d2 = parse_double(f[6]);
    r.sd_d2 = parse_double(f[7]);
    r.failures = parse_long(f[8]);
    r.config = f[9];
    report.rows.push_back(std::move(r));
  }
  return report;
}

// ---- coverage study --------------------------------------------------------

CoverageReport run_coverage(const std::string& density, const std::string& basis_preset,
                            const IntervalMethod& method, double eps, long reps,
                            std::uint64_t seed, long n) {
  if (reps < 1) throw std::invalid_argument("coverage needs reps >= 1");
  if (n < 2) throw std::invalid_argument("coverage needs n >= 2");
  const Density den = make_density(density);

  CoverageReport report;
  report.density = density;
  report.basis = basis_preset;
  report.method = to_string(method);
  report.union_bound = to_string(method.union_bound);
  report.eps = eps;
  report.n = n;
  report.reps = reps;
  report.seed = seed;

  // Data-dependent presets rebuild the family (and its oracle
  // coefficients) on every replicate; static presets are hoisted.
  FamilyWithCertificate cached;
  std::vector<double> cached_oracle;
  bool have_static = false;

  SlabDiagnostics diag;
  double width_sum = 0.0;
  long width_count = 0;
  for (long rep = 0; rep < reps; ++rep) {
    const Sample sample =
        draw_sample(den, static_cast<int>(n), seed, static_cast<std::uint64_t>(rep));
    FamilyWithCertificate fwc;
    const std::vector<double>* oracle = nullptr;
    std::vector<double> local_oracle;
    if (have_static) {
      fwc = cached;
      oracle = &cached_oracle;
    } else {
      fwc = family_from_preset(basis_preset, &sample);
      const bool data_dependent = fwc.family->descriptor().value("type", "") == "data_dependent";
      std::vector<double> alphas(static_cast<std::size_t>(fwc.family->size()));
      for (int k = 0; k < fwc.family->size(); ++k)
        alphas[static_cast<std::size_t>(k)] = oracle_alpha(den, *fwc.family, k);
      if (data_dependent) {
        local_oracle = std::move(alphas);
        oracle = &local_oracle;
      } else {
        cached = fwc;
        cached_oracle = std::move(alphas);
        oracle = &cached_oracle;
        have_static = true;
      }
    }
    bool all_in = true;
    for (int k = 0; k < fwc.family->size(); ++k) {
      const ConfidenceInterval iv = interval_for(sample, fwc, k, method, eps, &diag);
      width_sum += iv.width();
      ++width_count;
      if (!iv.contains((*oracle)[static_cast<std::size_t>(k)])) all_in = false;
    }
    if (all_in) ++report.covered;
  }
  report.coverage = static_cast<double>(report.covered) / static_cast<double>(reps);
  const double half =
      1.96 * std::sqrt(std::max(0.0, report.coverage * (1.0 - report.coverage)) /
                       static_cast<double>(reps));
  report.band_lo = std::max(0.0, report.coverage - half);
  report.band_hi = std::min(1.0, report.coverage + half);
  report.mean_width = width_count > 0 ? width_sum / static_cast<double>(width_count) : 0.0;
  report.fallbacks = diag.fallbacks + diag.widened;
  return report;
}

std::string emit_csv(const CoverageReport& r) {
  std::string out =
      "density,basis,method,union,eps,n,reps,seed,covered,coverage,band_lo,band_hi,mean_width,"
      "fallbacks\n";
  out += r.density + ',' + r.basis + ',' + r.method + ',' + r.union_bound + ',' +
         format_double(r.eps) + ',' + std::to_string(r.n) + ',' + std::to_string(r.reps) + ',' +
         std::to_string(r.seed) + ',' + std::to_string(r.covered) + ',' +
         format_double(r.coverage) + ',' + format_double(r.band_lo) + ',' +
         format_double(r.band_hi) + ',' + format_double(r.mean_width) + ',' +
         std::to_string(r.fallbacks) + '\n';
  return out;
}

CoverageReport parse_coverage_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.size() < 2 ||
      lines[0] !=
          "density,basis,method,union,eps,n,reps,seed,covered,coverage,band_lo,band_hi,mean_width,"
          "fallbacks")
    throw std::runtime_error("unrecognized coverage CSV header");
  const std::vector<std::string> f = split_line(lines[1], 14);
  CoverageReport r;
  r.density = f[0];
  r.basis = f[1];
  r.method = f[2];
  r.union_bound = f[3];
  r.eps = parse_double(f[4]);
  r.n = parse_long(f[5]);
  r.reps = parse_long(f[6]);
  r.seed = parse_u64(f[7]);
  r.covered = parse_long(f[8]);
  r.coverage = parse_double(f[9]);
  r.band_lo = parse_double(f[10]);
  r.band_hi = parse_double(f[11]);
  r.mean_width = parse_double(f[12]);
  r.fallbacks = parse_long(f[13]);
  return r;
}

// ---- rate study -------------------------------------------------------------

RateStudy run_rates(const std::string& density, const std::string& basis, long n_min, long n_max,
                    long reps, std::uint64_t seed) {
  if (basis != "trig" && basis != "haar")
    throw std::invalid_argument("rate study basis must be trig or haar");
  if (n_min < 8) throw std::invalid_argument("rate study needs n_min >= 8");
  if (reps < 1) throw std::invalid_argument("rate study needs reps >= 1");
  std::vector<long> ns;
  for (long n = n_min; n <= n_max; n *= 2) ns.push_back(n);
  if (ns.size() < 4) throw std::invalid_argument("rate study needs at least 4 sample sizes");

  const Density den = make_density(density);
  RateStudy study;
  study.density = density;
  study.basis = basis;
  study.reps = reps;
  study.seed = seed;

  for (std::size_t pi = 0; pi < ns.size(); ++pi) {
    const long n = ns[pi];
    FamilyWithCertificate fwc;
    EstimatorConfig cfg;
    cfg.eps = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    cfg.method.kind = IntervalMethod::Kind::theorem1;
    cfg.method.union_bound = UnionBound::all_m;
    if (basis == "trig") {
      fwc = trig_family(static_cast<int>(n), den.sup_pdf());
      cfg.cap_c = den.sup_pdf();
    } else {
      const int level = static_cast<int>(std::floor(std::log2(static_cast<double>(n))));
      fwc = haar_family(level);
      // The coefficient cap needs an orthonormal family; the
      // non-normalized Haar system runs uncapped.
    }
    std::vector<double> d2s;
    d2s.reserve(static_cast<std::size_t>(reps));
    for (long rep = 0; rep < reps; ++rep) {
      const std::uint64_t stream =
          static_cast<std::uint64_t>(pi) * 1000000u + static_cast<std::uint64_t>(rep);
      const Sample sample = draw_sample(den, static_cast<int>(n), seed, stream);
      const SpanElement est = soft_threshold(sample, fwc, cfg);
      d2s.push_back(dist2_to_density(est, den));
    }
    study.points.push_back(RatePoint{n, moments(d2s).mean});
  }

  // Least-squares slope of log risk against log N.
  const std::size_t p = study.points.size();
  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(p), ys(p);
  for (std::size_t i = 0; i < p; ++i) {
    xs[i] = std::log(static_cast<double>(study.points[i].n));
    ys[i] = std::log(std::max(study.points[i].mean_d2, 1e-300));
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / static_cast<double>(p), my = sy / static_cast<double>(p);
  double num = 0.0, den_ls = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den_ls += (xs[i] - mx) * (xs[i] - mx);
  }
  study.slope = num / den_ls;
  return study;
}

std::string emit_csv(const RateStudy& study) {
  std::string out = "density,basis,n,reps,seed,mean_d2,slope\n";
  for (const RatePoint& pt : study.points) {
    out += study.density + ',' + study.basis + ',' + std::to_string(pt.n) + ',' +
           std::to_string(study.reps) + ',' + std::to_string(study.seed) + ',' +
           format_double(pt.mean_d2) + ',' + format_double(study.slope) + '\n';
  }
  return out;
}

RateStudy parse_rates_csv(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.size() < 2 || lines[0] != "density,basis,n,reps,seed,mean_d2,slope")
    throw std::runtime_error("unrecognized rate CSV header");
  RateStudy study;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> f = split_line(lines[i], 7);
    study.density = f[0];
    study.basis = f[1];
    study.reps = parse_long(f[3]);
    study.seed = parse_u64(f[4]);
    study.points.push_back(RatePoint{parse_long(f[2]), parse_double(f[5])});
    study.slope = parse_double(f[6]);
  }
  return study;
}

}  // namespace slabdens
