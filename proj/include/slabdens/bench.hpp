#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slabdens/bounds.hpp"
#include "slabdens/density.hpp"
#include "slabdens/estimators.hpp"

namespace slabdens {

extern const char* const kVersion;

/// Shortest decimal representation that round-trips the double.
std::string format_double(double value);

struct Figure2Row {
  std::string density;
  std::string estimator;
  long n = 0;
  long reps = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  double mean_d2 = 0.0;
  double sd_d2 = 0.0;
  long failures = 0;
  std::string config;

  bool operator==(const Figure2Row&) const = default;
};

struct ExperimentReport {
  std::vector<Figure2Row> rows;

  bool operator==(const ExperimentReport&) const = default;
};

/// The simulation-study grid: {Doppler, HeaviSine, Blocks} x
/// {wavelet-hard, wavelet-soft, multiple-kernel}, mean/sd of d²(f̂, f).
ExperimentReport run_figure2(long n, long reps, double eps, std::uint64_t seed);
std::string emit_csv(const ExperimentReport& report);
ExperimentReport parse_figure2_csv(const std::string& text);

struct CoverageReport {
  std::string density;
  std::string basis;
  std::string method;
  std::string union_bound;
  double eps = 0.0;
  long n = 0;
  long reps = 0;
  std::uint64_t seed = 0;
  long covered = 0;
  double coverage = 0.0;
  double band_lo = 0.0;  // 95% binomial band around the empirical rate
  double band_hi = 0.0;
  double mean_width = 0.0;
  long fallbacks = 0;

  bool operator==(const CoverageReport&) const = default;
};

/// Frequency of the joint event {∀k: ᾱ_k ∈ interval_k} over seeded
/// replicates, ᾱ_k by quadrature against the true density.
CoverageReport run_coverage(const std::string& density, const std::string& basis_preset,
                            const IntervalMethod& method, double eps, long reps,
                            std::uint64_t seed, long n = 256);
std::string emit_csv(const CoverageReport& report);
CoverageReport parse_coverage_csv(const std::string& text);

struct RatePoint {
  long n = 0;
  double mean_d2 = 0.0;

  bool operator==(const RatePoint&) const = default;
};

struct RateStudy {
  std::string density;
  std::string basis;
  long reps = 0;
  std::uint64_t seed = 0;
  std::vector<RatePoint> points;
  double slope = 0.0;  // least squares on (log N, log mean_d2)

  bool operator==(const RateStudy&) const = default;
};

/// Soft-threshold risk over doubling sample sizes at eps = N^-2 with
/// m = N (trig) or resolution ⌊log₂N⌋ (haar); reports the log-log slope.
RateStudy run_rates(const std::string& density, const std::string& basis, long n_min, long n_max,
                    long reps, std::uint64_t seed);
std::string emit_csv(const RateStudy& study);
RateStudy parse_rates_csv(const std::string& text);

}  // namespace slabdens
