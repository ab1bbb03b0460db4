#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace fundcurve {

struct OptimizerConfig {
    int max_iters = 3000;      ///< Nelder-Mead iterations per start
    int n_starts = 6;          ///< fixed starts first, then seeded random ones
    double tolerance = 1e-10;  ///< relative spread of simplex values that ends a start
    std::uint64_t rng_seed = 20170101;
    int n_resamples = 0;       ///< bootstrap resamples; 0 disables the bootstrap
};

/// Analysis grid: fine spacing inside [band_lo, band_hi], coarse outside.
struct GridConfig {
    double band_lo = -83.05;
    double band_hi = 163.50;
    double fine_step = 0.20;
    double coarse_step = 50.0;
    double hard_lo = -500.0;
    double hard_hi = 3000.0;
};

struct ElasticityConfig {
    double h = 100.0;  ///< MW
    std::vector<double> points{0, 20, 25, 30, 35, 40, 50, 60};
};

struct RunConfig {
    OptimizerConfig optimizer;
    GridConfig grid;
    ElasticityConfig elasticity;
};

void validate(const OptimizerConfig& c);
void validate(const ElasticityConfig& c);

/// `key = value` lines; "#" and ";" start comment lines. Unknown keys are rejected.
/// Keys: max_iters, n_starts, tolerance, rng_seed, n_resamples, grid_band_lo,
/// grid_band_hi, grid_fine_step, grid_coarse_step, grid_hard_lo, grid_hard_hi,
/// elasticity_h, elasticity_points (comma separated). Throws ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace fundcurve
