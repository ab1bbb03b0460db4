#pragma once

#include "fundcurve/step_curve.hpp"
#include "fundcurve/timestamp.hpp"

namespace fundcurve {

/// One delivery hour of the day-ahead auction: the published wholesale
/// supply and demand curves on the analysis grid.
struct MarketSnapshot {
    Timestamp timestamp;
    StepCurve wsup;
    StepCurve wdem;
};

/// Checks directions, the shared grid and wdem(p_min) >= wsup(p_min).
/// Throws DataIntegrityError naming the timestamp.
void validate(const MarketSnapshot& snapshot);

}  // namespace fundcurve
