#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "slabdens/interval.hpp"
#include "slabdens/sample.hpp"

namespace slabdens {

/// How inner products between family entries are obtained.
enum class InnerProductRule {
  orthogonal,        // ⟨f_i, f_k⟩ = 0 for i ≠ k, D_k on the diagonal
  analytic_gaussian, // closed forms for Gaussian/indicator entries
  quadrature,        // fixed-grid composite Simpson on the support
};

// ---- family entries ------------------------------------------------------

struct IndicatorAtom {
  double lo, hi;  // 1 on [lo, hi); the final cell of a partition is closed
  bool closed_right = false;
};

struct HaarAtom {
  int level;  // -1 encodes the father 1_[0,1]
  int shift;
};

struct TrigAtom {
  int index;  // 0: 1, 2r-1: √2 cos(2πrx), 2r: √2 sin(2πrx)
};

struct GaussianAtom {
  double center, gamma;  // exp(-gamma (center - x)²)
};

using BasisAtom = std::variant<IndicatorAtom, HaarAtom, TrigAtom, GaussianAtom>;

double atom_eval(const BasisAtom& atom, double x);
double atom_norm_sq(const BasisAtom& atom);

/// H(p) certificate: (∫|f_k|^{2p} dλ)^{1/p} ≤ c_k ∫ f_k² dλ, plus f ≤ c
/// when p = 1 (then all c_k = 1; for p = ∞, c = 1).  The concentration
/// bounds consume the product C_k = c_k · c.
struct HpCertificate {
  double p = 1.0;
  double c = 1.0;
  std::vector<double> c_k;

  double C(int k) const { return c_k.at(static_cast<std::size_t>(k)) * c; }
};

/// Immutable finite family (f_k) in L²(λ).  Entries need not be
/// linearly independent.  Thread-safe after construction.
class BasisFamily {
 public:
  BasisFamily(std::vector<BasisAtom> atoms, InnerProductRule rule, Interval support,
              nlohmann::json descriptor, std::vector<int> anchors = {});

  int size() const { return static_cast<int>(atoms_.size()); }
  double eval(int k, double x) const { return atom_eval(atoms_[static_cast<std::size_t>(k)], x); }
  /// D_k = ∫ f_k² dλ.
  double norm_sq(int k) const { return norms_[static_cast<std::size_t>(k)]; }
  const Interval& support() const { return support_; }
  InnerProductRule rule() const { return rule_; }
  const BasisAtom& atom(int k) const { return atoms_[static_cast<std::size_t>(k)]; }
  std::string label(int k) const;
  /// Jump locations of entry k (empty for continuous entries).
  std::vector<double> breakpoints(int k) const;
  bool orthonormal() const;
  /// Values of entry k lie in {-1, 0, +1}.
  bool ternary(int k) const;
  /// Index of the observation anchoring a data-dependent entry.
  std::optional<int> anchor(int k) const;
  const nlohmann::json& descriptor() const { return descriptor_; }
  std::uint64_t id() const { return id_; }
  /// Same-family check used by the span-element operations.
  bool compatible_with(const BasisFamily& other) const;

 private:
  std::vector<BasisAtom> atoms_;
  std::vector<double> norms_;
  InnerProductRule rule_;
  Interval support_;
  nlohmann::json descriptor_;
  std::vector<int> anchors_;  // empty unless data-dependent
  std::uint64_t id_;
};

struct FamilyWithCertificate {
  std::shared_ptr<const BasisFamily> family;
  HpCertificate certificate;
};

// ---- constructors --------------------------------------------------------

/// Indicator family over disjoint cells; D_k = λ(A_k), H(∞) with
/// c_k = 1/λ(A_k).  Throws InvalidPartition on overlap or empty cells.
FamilyWithCertificate histogram_family(const std::vector<Interval>& cells);

/// Equal-width partition of [0,1] into `bins` cells.
FamilyWithCertificate histogram_family(int bins);

/// {father} ∪ {ψ_{j,k} = ψ(2^j x - k) : 0 ≤ j ≤ max_level, 0 ≤ k < 2^j},
/// m = 2^{max_level+1}; D_{j,k} = 2^{-j}, H(∞) tight (c_{j,k} = 2^j).
FamilyWithCertificate haar_family(int max_level);

/// 1, √2 cos 2πx, √2 sin 2πx, ... (m entries, orthonormal); H(1) with
/// the caller-supplied essential bound on the target density.
FamilyWithCertificate trig_family(int m, double density_bound);

/// Gaussian bumps exp(-γ_j (i/n - x)²) on the grid i/n, i = 1..n, for
/// each bandwidth γ_j, optionally plus the constant 1_[0,1].
/// D = √(π/(2γ)), H(∞) tight (c_k = 1/D).
FamilyWithCertificate gaussian_kernel_family(int n, const std::vector<double>& gammas,
                                             bool include_constant);

/// Gaussian bumps anchored at the observations: K_j(X_i, ·) with entry
/// index j·N + i.  Requires at least two observations.
FamilyWithCertificate data_dependent_family(const Sample& sample,
                                            const std::vector<double>& gammas);

// ---- serialization -------------------------------------------------------

/// Rebuilds a family from its JSON descriptor {type, params}.  A sample
/// is required for data-dependent descriptors without stored anchors.
FamilyWithCertificate family_from_descriptor(const nlohmann::json& descriptor,
                                             const Sample* data = nullptr);

/// Presets: histogram-<bins>, haar-<J>, trig-<m>, multikernel,
/// svm-<gamma>.  The latter two need the data sample.
FamilyWithCertificate family_from_preset(const std::string& name, const Sample* data = nullptr);

/// Accepts either a preset name or an inline JSON descriptor.
FamilyWithCertificate family_from_spec(const std::string& spec, const Sample* data = nullptr);

}  // namespace slabdens
