#pragma once

#include <stdexcept>
#include <string>

namespace tecd {

// Every hard failure of a modeling assumption throws one of these.
// They are never clamped away: a caller that feeds det F <= 0 or a
// degenerate lift has already left the regime the equations describe.
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonOrientationPreserving : ModelError {
  explicit NonOrientationPreserving(double detF)
      : ModelError("deformation gradient not orientation-preserving: det F = " +
                   std::to_string(detF)) {}
};

struct InvalidDensity : ModelError {
  explicit InvalidDensity(double rho)
      : ModelError("density must be positive, got " + std::to_string(rho)) {}
};

struct DegenerateLift : ModelError {
  explicit DegenerateLift(double d1Phi)
      : ModelError("lift derivative too close to zero: d1 Phi = " +
                   std::to_string(d1Phi)) {}
};

struct DegenerateF1N : ModelError {
  explicit DegenerateF1N(double rhoF1N)
      : ModelError("rho * F_1N vanishes (contact assumption broken): " +
                   std::to_string(rhoF1N)) {}
};

struct MassFluxNonzero : ModelError {
  explicit MassFluxNonzero(double mN)
      : ModelError("interface mass flux is not zero: m_N = " +
                   std::to_string(mN)) {}
};

struct MultiplicityMismatch : ModelError {
  using ModelError::ModelError;
};

struct ConstraintViolated : ModelError {
  using ModelError::ModelError;
};

struct NegativeTargetPressure : ModelError {
  explicit NegativeTargetPressure(double p)
      : ModelError("no admissible background: target pressure " +
                   std::to_string(p) + " <= 0") {}
};

struct SingularMinor : ModelError {
  using ModelError::ModelError;
};

struct SingularBoundarySystem : ModelError {
  using ModelError::ModelError;
};

struct CFLViolation : ModelError {
  using ModelError::ModelError;
};

struct BoundarySolveSingular : ModelError {
  using ModelError::ModelError;
};

struct NaNDetected : ModelError {
  explicit NaNDetected(long step)
      : ModelError("non-finite field value at step " + std::to_string(step)),
        step(step) {}
  long step;
};

struct InsufficientHistory : ModelError {
  using ModelError::ModelError;
};

struct PreconditionResidualTooLarge : ModelError {
  using ModelError::ModelError;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tecd
