#pragma once

#include <stdexcept>
#include <string>

namespace slabdens {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A family entry has a non-finite squared norm.
struct FamilyNotSquareIntegrable : Error {
  using Error::Error;
};

/// Two span elements belong to different basis families.
struct FamilyMismatch : Error {
  using Error::Error;
};

/// An iterative projection did not reach its feasibility certificate.
struct NoConvergence : Error {
  using Error::Error;
};

/// The coefficient cap is only defined over orthonormal families.
struct CapRequiresOrthonormal : Error {
  using Error::Error;
};

/// Partition cells overlap or have non-positive length.
struct InvalidPartition : Error {
  using Error::Error;
};

/// A kernel bandwidth parameter is out of range.
struct InvalidBandwidth : Error {
  using Error::Error;
};

/// A confidence level or resolution parameter is out of range.
struct InvalidLevel : Error {
  using Error::Error;
};

/// A log-moment bound was requested at an infeasible beta.
struct InvalidBeta : Error {
  using Error::Error;
};

/// The dual problem is ill-posed (Gram matrix not positive semidefinite).
struct DualIllPosed : Error {
  using Error::Error;
};

/// The requested operation needs an orthogonal inner-product rule.
struct OrthogonalityRequired : Error {
  using Error::Error;
};

/// A test density is negative or not normalizable.
struct InvalidDensity : Error {
  using Error::Error;
};

/// The rejection sampler's envelope accepts too rarely.
struct EnvelopeError : Error {
  using Error::Error;
};

}  // namespace slabdens
