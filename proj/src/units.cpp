#include "wtraj/units.hpp"

#include "wtraj/error.hpp"

namespace wtraj {

void UnitSystem::validate() const {
  if (!(hbar > 0.0)) throw PreconditionError("unit system: hbar must be positive");
  if (!(mass > 0.0)) throw PreconditionError("unit system: mass must be positive");
}

}  // namespace wtraj
