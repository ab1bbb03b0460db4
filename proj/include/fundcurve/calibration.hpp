#pragma once

#include "fundcurve/config.hpp"
#include "fundcurve/decomposition.hpp"
#include "fundcurve/snapshot.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace fundcurve {

struct CalibrationProblem {
    std::vector<MarketSnapshot> snapshots;
    std::vector<double> loads;  ///< MW, index-aligned with snapshots
};

/// Equal lengths, positive loads, strictly increasing timestamps.
void validate(const CalibrationProblem& problem);

struct LinearFit {
    double theta0 = 0.0;
    double theta1 = 0.0;
    double sse = 0.0;
};

/// Ordinary least squares of load on v_F. Throws DegenerateRegressor if v_F
/// is constant or has fewer than two points.
LinearFit inner_fit(std::span<const double> v_F, std::span<const double> loads);

/// Pearson correlation; NaN if either series is constant.
double correlation(std::span<const double> x, std::span<const double> y);

struct ObjectiveValue {
    LinearFit fit;
    std::size_t failed_hours = 0;
    std::vector<double> v_F;  ///< NaN for failed hours
};

/// Decomposes every hour (in parallel) and fits loads on v^F over the hours
/// that decomposed. Throws ObjectiveUndefined if all hours fail.
ObjectiveValue evaluate_objective(const DecompositionParams& params, const CalibrationProblem& problem);

/// evaluate_objective(...).fit.sse
double objective(const DecompositionParams& params, const CalibrationProblem& problem);

struct Correlations {
    double load_vW = 0.0;
    double load_vC = 0.0;
    double load_vF = 0.0;
};

struct CalibrationResult {
    DecompositionParams params;
    double theta0 = 0.0;
    double theta1 = 0.0;
    double sse = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
    std::size_t failed_hours = 0;
    std::optional<std::array<double, 6>> per_param_se;
    std::vector<double> v_F_series;
    std::vector<double> v_W_series;
    std::vector<double> v_C_series;
    Correlations correlations;
};

/// Maps between the box-constrained parameters and the unconstrained search space.
std::array<double, 6> to_search_space(const DecompositionParams& p);
DecompositionParams from_search_space(const std::array<double, 6>& z);

/// Fixed starting points: the inelastic corner, the reference 2017
/// coefficients and the centre of the box.
std::vector<DecompositionParams> fixed_starts();

struct NelderMeadResult {
    std::array<double, 6> x{};
    double value = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
};

/// Nelder-Mead with restarts from the best vertex until a restart stops improving.
NelderMeadResult nelder_mead(const std::function<double(const std::array<double, 6>&)>& f,
                             std::array<double, 6> x0, std::array<double, 6> step, int max_iters,
                             double tolerance);

/// Multi-start minimisation of the objective. Needs at least 24 hours.
/// If config.n_resamples > 0 the day-block bootstrap is run as well.
CalibrationResult calibrate(const CalibrationProblem& problem, const OptimizerConfig& config);

/// Resamples whole local days with replacement, re-calibrates each resample
/// from `params` with one short start and returns the sample standard
/// deviation of each parameter (a0, a1, gamma1, phi1, alpha1, beta1).
/// Throws ConfigError if n_resamples < 10.
std::array<double, 6> bootstrap_se(const CalibrationProblem& problem, const DecompositionParams& params,
                                   int n_resamples, const OptimizerConfig& config);

/// Full per-hour series (v^W, v^C, v^F) and correlations at fixed parameters.
void fill_series(CalibrationResult& result, const CalibrationProblem& problem);

}  // namespace fundcurve
