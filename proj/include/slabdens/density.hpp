#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "slabdens/basis.hpp"
#include "slabdens/sample.hpp"

namespace slabdens {

enum class SamplerKind {
  inverse_cdf,  // exact, for piecewise-constant densities
  rejection,    // constant envelope at 1.01 * sup pdf
};

/// Normalized test density on [0, 1].
class Density {
 public:
  const std::string& name() const { return name_; }
  /// Unnormalized shape on [0, 1].
  double raw(double t) const { return raw_(t); }
  /// raw / Z on [0, 1], zero elsewhere.
  double pdf(double t) const { return (t < 0.0 || t > 1.0) ? 0.0 : raw_(t) / z_; }
  double normalization() const { return z_; }
  double sup_pdf() const { return sup_pdf_; }
  SamplerKind sampler_kind() const { return kind_; }
  const std::vector<double>& breakpoints() const { return breaks_; }
  bool piecewise_constant() const { return !edges_.empty(); }
  /// Exact distribution function (piecewise-constant densities only).
  double cdf(double t) const;

 private:
  friend Density make_density(const std::string&);
  friend Sample draw_sample(const Density&, int, std::uint64_t, std::uint64_t);

  std::string name_;
  std::function<double(double)> raw_;
  double z_ = 1.0;
  double sup_pdf_ = 1.0;
  SamplerKind kind_ = SamplerKind::rejection;
  std::vector<double> breaks_;
  // piecewise-constant representation (empty for smooth shapes)
  std::vector<double> edges_;
  std::vector<double> values_;  // raw value per cell
  std::vector<double> cum_;     // cdf at each edge
};

/// Builds one of: doppler, heavisine, blocks, uniform, cosine.
/// Throws InvalidDensity for unknown names or negative shapes.
Density make_density(const std::string& name);

/// Draws n observations with the replicate stream (seed, stream).
Sample draw_sample(const Density& density, int n, std::uint64_t seed, std::uint64_t stream = 0);

/// ᾱ_k = ∫ f_k f dλ / D_k by piecewise-adaptive quadrature.
double oracle_alpha(const Density& density, const BasisFamily& family, int k);

}  // namespace slabdens
