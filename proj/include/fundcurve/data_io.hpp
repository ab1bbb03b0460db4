#pragma once

#include "fundcurve/config.hpp"
#include "fundcurve/snapshot.hpp"
#include "fundcurve/step_curve.hpp"
#include "fundcurve/timestamp.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fundcurve {

/// Coarse points hard_lo, hard_lo + coarse, ... below band_lo; fine points
/// band_lo, band_lo + fine, ... up to band_hi (always included); then
/// band_hi + coarse, ... below hard_hi, and hard_hi itself.
GridPtr build_grid(double band_lo, double band_hi, double fine_step, double coarse_step, double hard_lo,
                   double hard_hi);
GridPtr build_grid(const GridConfig& c);

/// Curve CSV: header `timestamp,side,price,cumulative_volume`, side S or D,
/// rows grouped by timestamp, prices increasing within a side. Points are
/// stepped onto `grid`: each grid price takes the volume of the last point at
/// or below it; below the first point supply is 0 and demand is the first
/// point's volume.
std::vector<MarketSnapshot> parse_curves(std::istream& in, const GridPtr& grid);
std::vector<MarketSnapshot> read_curves(const std::filesystem::path& path, const GridPtr& grid);

/// Writes the breakpoints of each curve; parse_curves on the same grid gives the input back.
void write_curves(std::ostream& out, const std::vector<MarketSnapshot>& snapshots);

struct LoadRecord {
    Timestamp timestamp;
    double load = 0.0;  ///< MW
};

/// Load CSV: header `timestamp,load_mw`. Loads must be positive.
std::vector<LoadRecord> parse_load(std::istream& in);

struct HourlyLoad {
    std::vector<LoadRecord> records;
    std::size_t dropped_quarters = 0;  ///< quarters of incomplete leading/trailing hours
};

/// Averages the four quarters of every UTC hour. The series must be
/// gap-free in UTC (15 minute spacing); a gap raises DataIntegrityError
/// naming both timestamps.
HourlyLoad load_hourly(const std::vector<LoadRecord>& quarters);
HourlyLoad load_hourly(std::istream& in);
HourlyLoad read_load_hourly(const std::filesystem::path& path);

/// Turns an hourly series into one with 24 wall-clock hours per day: the
/// hour skipped in spring is inserted as the mean of the two records before
/// and the two after, the hour repeated in autumn becomes the mean of its two
/// instances. Other wall-clock jumps raise DataIntegrityError.
std::vector<LoadRecord> dst_adjust(const std::vector<LoadRecord>& records);

void write_load(std::ostream& out, const std::vector<LoadRecord>& records);

/// Splits one CSV line on commas (no quoting), trimming a trailing '\r'.
std::vector<std::string_view> split_csv(std::string_view line);
double parse_double(std::string_view field, std::size_t line);

}  // namespace fundcurve
