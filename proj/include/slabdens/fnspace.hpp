#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "slabdens/basis.hpp"
#include "slabdens/density.hpp"

namespace slabdens {

enum class GramSource { analytic, quadrature };

/// Symmetric positive-semidefinite matrix of pairwise inner products.
class GramMatrix {
 public:
  GramMatrix(Eigen::MatrixXd entries, GramSource source, std::uint64_t family_id);

  int size() const { return static_cast<int>(entries_.rows()); }
  double operator()(int i, int k) const { return entries_(i, k); }
  const Eigen::MatrixXd& matrix() const { return entries_; }
  GramSource source() const { return source_; }
  std::uint64_t family_id() const { return family_id_; }

 private:
  Eigen::MatrixXd entries_;
  GramSource source_;
  std::uint64_t family_id_;
};

/// Closed-form inner product ⟨f_i, f_k⟩ when one exists for the pair.
std::optional<double> analytic_inner(const BasisFamily& family, int i, int k);

/// One Gram column ⟨f_·, f_k⟩ without materializing the full matrix.
void gram_column(const BasisFamily& family, int k, Eigen::VectorXd& out);

/// Full Gram matrix: diagonal for orthogonal families, closed forms for
/// Gaussian/indicator entries, fixed-grid Simpson otherwise.
GramMatrix gram(const BasisFamily& family);

/// Process-lifetime cache keyed by the family id.
const GramMatrix& gram_cached(const std::shared_ptr<const BasisFamily>& family);

/// Element g = Σ γ_k f_k of the family span.
class SpanElement {
 public:
  SpanElement(std::shared_ptr<const BasisFamily> family, Eigen::VectorXd coefficients);
  static SpanElement zero(std::shared_ptr<const BasisFamily> family);

  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  Eigen::VectorXd& coefficients() { return coefficients_; }
  const BasisFamily& family() const { return *family_; }
  const std::shared_ptr<const BasisFamily>& family_ptr() const { return family_; }
  /// Pointwise value; skips zero coefficients.
  double evaluate(double x) const;

 private:
  std::shared_ptr<const BasisFamily> family_;
  Eigen::VectorXd coefficients_;
};

/// Confidence slab {g : |⟨g, f_k⟩ / D_k − center| ≤ halfwidth}.
struct Slab {
  int k = 0;
  double center = 0.0;
  double halfwidth = 0.0;
};

/// Squared L² distance d²(g, h) = Δγᵀ G Δγ.
double dist2(const SpanElement& g, const SpanElement& h);

/// Squared L² distance to a test density, by quadrature over the
/// family window.
double dist2_to_density(const SpanElement& g, const Density& density, double tol = 1e-8);

/// Metric projection onto a single slab; moves along f_k only.
SpanElement project_slab(const SpanElement& g, const Slab& slab);

/// Cyclic projection passes through the slabs in order (no corrections).
SpanElement successive_projections(const std::vector<Slab>& slabs, const SpanElement& start,
                                   int passes = 1);

struct ProjectionOptions {
  double tol = 1e-12;             // squared displacement between cycles
  int max_cycles = 10000;
  double feasibility_tol = 1e-9;  // certificate, in coefficient units
};

/// Projection onto the intersection of slabs (cyclic with per-slab
/// corrections).  Throws NoConvergence when the feasibility certificate
/// fails, e.g. for an empty intersection.
SpanElement project_intersection(const std::vector<Slab>& slabs, const SpanElement& start,
                                 const ProjectionOptions& options = {});

/// Clips every coefficient from above at √c (orthonormal families).
SpanElement project_cap(const SpanElement& g, double c);

}  // namespace slabdens
