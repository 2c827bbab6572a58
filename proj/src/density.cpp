#include "slabdens/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "slabdens/errors.hpp"
#include "slabdens/quadrature.hpp"
#include "slabdens/rng.hpp"

namespace slabdens {

namespace {

constexpr double kDopplerV = 0.05;

double sgn(double u) { return u >= 0.0 ? 1.0 : -1.0; }  // sgn(0) = +1

double doppler_raw(double t) {
  const double amp = 2.0 * std::sqrt(std::max(0.0, t * (1.0 - t)));
  return 1.0 + amp * std::sin(2.0 * std::numbers::pi * (1.0 + kDopplerV) / (t + kDopplerV));
}

double heavisine_raw(double t) {
  return 1.5 + 0.25 * (4.0 * std::sin(4.0 * std::numbers::pi * t) - sgn(t - 0.3) - sgn(0.72 - t));
}

double cosine_raw(double t) { return 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * t); }

const std::vector<double> kBlocksJumps = {4.0, -5.0, 3.0,  -4.0, 5.0, 4.2,
                                          -2.1, 4.3,  -3.1, 2.1,  -4.2};
const std::vector<double> kBlocksTimes = {0.10, 0.13, 0.15, 0.23, 0.25, 0.40,
                                          0.44, 0.65, 0.76, 0.78, 0.81};

}  // namespace

double Density::cdf(double t) const {
  if (edges_.empty()) {
    throw std::logic_error("exact cdf is only available for piecewise-constant densities");
  }
  if (t <= edges_.front()) return 0.0;
  if (t >= edges_.back()) return 1.0;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - edges_.begin()) - 1;
  return cum_[i] + values_[i] / z_ * (t - edges_[i]);
}

Density make_density(const std::string& name) {
  Density d;
  d.name_ = name;
  // Exact piecewise-constant representation: normalization, cdf knots,
  // supremum, and the inverse-cdf sampler flag.
  const auto build_piecewise = [](Density& dd, const std::vector<double>& edges,
                                  const std::vector<double>& values) {
    dd.edges_ = edges;
    dd.values_ = values;
    double z = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      z += values[i] * (edges[i + 1] - edges[i]);
    }
    dd.z_ = z;
    dd.cum_.assign(edges.size(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      dd.cum_[i + 1] = dd.cum_[i] + values[i] * (edges[i + 1] - edges[i]) / z;
    }
    dd.cum_.back() = 1.0;
    dd.sup_pdf_ = *std::max_element(values.begin(), values.end()) / z;
    dd.kind_ = SamplerKind::inverse_cdf;
  };
  if (name == "uniform") {
    d.raw_ = [](double) { return 1.0; };
    build_piecewise(d, {0.0, 1.0}, {1.0});
  } else if (name == "blocks") {
    d.raw_ = [](double t) {
      double v = 1.05;
      for (std::size_t i = 0; i < kBlocksTimes.size(); ++i) {
        if (t > kBlocksTimes[i]) v += 0.25 * kBlocksJumps[i];
      }
      return v;
    };
    std::vector<double> edges = {0.0};
    std::vector<double> values;
    double level = 1.05;
    values.push_back(level);
    for (std::size_t i = 0; i < kBlocksTimes.size(); ++i) {
      edges.push_back(kBlocksTimes[i]);
      level += 0.25 * kBlocksJumps[i];
      values.push_back(level);
    }
    edges.push_back(1.0);
    build_piecewise(d, edges, values);
    d.breaks_ = kBlocksTimes;
  } else if (name == "doppler") {
    d.raw_ = doppler_raw;
  } else if (name == "heavisine") {
    d.raw_ = heavisine_raw;
    d.breaks_ = {0.3, 0.72};
  } else if (name == "cosine") {
    d.raw_ = cosine_raw;
  } else {
    throw InvalidDensity("unknown density: " + name);
  }

  if (!d.piecewise_constant()) {
    d.z_ = integrate_piecewise(d.raw_, 0.0, 1.0, d.breaks_, 1e-11);
  }
  if (!std::isfinite(d.z_) || d.z_ <= 0.0) {
    throw InvalidDensity("density does not normalize: " + name);
  }

  // shape must be non-negative; also locate the grid supremum
  const int grid = 100000;
  double raw_max = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double v = d.raw_(static_cast<double>(i) / grid);
    if (v < -1e-12) throw InvalidDensity("density is negative on [0,1]: " + name);
    raw_max = std::max(raw_max, v);
  }
  if (!d.piecewise_constant()) {
    d.sup_pdf_ = raw_max / d.z_;
  }
  return d;
}

Sample draw_sample(const Density& density, int n, std::uint64_t seed, std::uint64_t stream) {
  if (n < 0) throw std::invalid_argument("sample size must be non-negative");
  Sample s;
  s.seed = seed;
  s.stream = stream;
  s.points.reserve(static_cast<std::size_t>(n));
  CounterRng rng(seed, stream);

  if (density.sampler_kind() == SamplerKind::inverse_cdf) {
    const auto& edges = density.edges_;
    const auto& values = density.values_;
    const auto& cum = density.cum_;
    for (int i = 0; i < n; ++i) {
      const double u = rng.next_uniform();
      auto it = std::upper_bound(cum.begin(), cum.end(), u);
      std::size_t cell = std::min<std::size_t>(
          static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cum.begin() - 1, 0)),
          values.size() - 1);
      const double slope = values[cell] / density.z_;  // pdf on the cell, > 0
      s.points.push_back(edges[cell] + (u - cum[cell]) / slope);
    }
    return s;
  }

  const double envelope = density.sup_pdf() * 1.01;
  long proposals = 0;
  long accepted = 0;
  while (accepted < n) {
    const double x = rng.next_uniform();
    const double u = rng.next_uniform();
    ++proposals;
    if (u * envelope <= density.pdf(x)) {
      s.points.push_back(x);
      ++accepted;
    }
    if (proposals >= 1000 && proposals >= 200L * n && accepted * 100L < proposals) {
      throw EnvelopeError("rejection sampler acceptance rate below 1%");
    }
  }
  return s;
}

double oracle_alpha(const Density& density, const BasisFamily& family, int k) {
  const Interval sup = family.support();
  const double lo = std::max(0.0, sup.lo);
  const double hi = std::min(1.0, sup.hi);
  std::vector<double> breaks = density.breakpoints();
  const auto fam_breaks = family.breakpoints(k);
  breaks.insert(breaks.end(), fam_breaks.begin(), fam_breaks.end());
  const auto f = [&](double x) { return family.eval(k, x) * density.pdf(x); };
  const double ip = integrate_piecewise(f, lo, hi, breaks, 1e-9);
  return ip / family.norm_sq(k);
}

}  // namespace slabdens
