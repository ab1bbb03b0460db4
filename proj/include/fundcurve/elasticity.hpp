#pragma once

#include "fundcurve/config.hpp"
#include "fundcurve/step_curve.hpp"
#include "fundcurve/timestamp.hpp"

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace fundcurve {

/// Returned by point_elasticity when the slope is zero.
inline constexpr double kInfiniteElasticity = -std::numeric_limits<double>::infinity();

/// Forward demand: the lowest grid price at which the demand volume is at
/// most `mw`. Throws OutOfRange outside [volume at p_max, volume at p_min].
double forward_demand(const StepCurve& fdem, double mw);

/// Central difference of price over volume around the volume demanded at p:
/// (FDem(v + h) - FDem(v - h)) / (2h), in EUR/MWh per MW.
double slope(const StepCurve& fdem, double p, double h);

/// (p / FDem^-1(p)) / slope. 0 at p == 0 (the slope is not evaluated),
/// kInfiniteElasticity for a zero slope, DomainError for zero volume.
double point_elasticity(const StepCurve& fdem, double p, double h);

enum class ProbeFlag { Ok = 0, ZeroSlope = 1, OutOfRange = 2 };

struct ElasticityRow {
    Timestamp timestamp;
    double probe_price = 0.0;
    double slope = 0.0;
    double elasticity = 0.0;
    ProbeFlag flag = ProbeFlag::Ok;
};

struct HourCurve {
    Timestamp timestamp;
    StepCurve fdem;
};

/// One row per (hour, probe price); hours are processed in parallel, rows
/// come back in input order.
std::vector<ElasticityRow> analyze(const std::vector<HourCurve>& hours, const ElasticityConfig& config);

enum class AggregateKey { HourOfDay, Month, DayOfWeek };

const char* to_string(AggregateKey k);

struct AggregateCell {
    int key = 0;
    double probe_price = 0.0;
    double mean = 0.0;  ///< NaN when count == 0
    std::size_t count = 0;
    std::size_t excluded = 0;  ///< flagged rows left out
};

struct AggregateTable {
    AggregateKey key = AggregateKey::HourOfDay;
    std::vector<AggregateCell> cells;  ///< sorted by (key, probe_price)
    std::size_t excluded = 0;
};

/// Mean elasticity per key and probe price over unflagged rows. Throws
/// EmptyAggregate when no unflagged row is left.
AggregateTable aggregate(const std::vector<ElasticityRow>& rows, AggregateKey key);

void write_rows(std::ostream& out, const std::vector<ElasticityRow>& rows);
void write_aggregate(std::ostream& out, const AggregateTable& table);

}  // namespace fundcurve
