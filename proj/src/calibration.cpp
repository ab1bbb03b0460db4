#include "fundcurve/calibration.hpp"

#include "fundcurve/errors.hpp"
#include "fundcurve/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace fundcurve {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kA0Lo = -50.0;
constexpr double kA0Span = 100.0;
constexpr double kA1Span = 2.0;
// Proportions use a slightly widened logistic so that 0 and 1 are reachable.
constexpr double kShareLo = -0.02;
constexpr double kShareSpan = 1.04;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double u) { return std::log(u / (1.0 - u)); }

double share_from(double z) { return std::clamp(kShareLo + kShareSpan * sigmoid(z), 0.0, 1.0); }
double share_to(double p) { return logit((std::clamp(p, 0.0, 1.0) - kShareLo) / kShareSpan); }

using Vec = std::array<double, 6>;

}  // namespace

void validate(const CalibrationProblem& p) {
    if (p.snapshots.size() != p.loads.size()) {
        throw DataIntegrityError(
            fmt::format("{} snapshots but {} loads", p.snapshots.size(), p.loads.size()));
    }
    for (std::size_t i = 0; i < p.loads.size(); ++i) {
        if (!(p.loads[i] > 0.0) || !std::isfinite(p.loads[i])) {
            throw DataIntegrityError(
                fmt::format("{}: load must be positive", p.snapshots[i].timestamp.to_string()));
        }
        if (i > 0 && !(p.snapshots[i - 1].timestamp < p.snapshots[i].timestamp)) {
            throw DataIntegrityError(fmt::format("timestamps not increasing at {}",
                                                 p.snapshots[i].timestamp.to_string()));
        }
    }
}

LinearFit inner_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw DataIntegrityError("regressor and response differ in length");
    }
    const std::size_t n = x.size();
    if (n < 2) {
        throw DegenerateRegressor(fmt::format("need at least two hours, got {}", n));
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw DegenerateRegressor("v_F is constant over all hours");
    }
    LinearFit fit;
    fit.theta1 = sxy / sxx;
    fit.theta0 = my - fit.theta1 * mx;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.theta0 - fit.theta1 * x[i];
        fit.sse += r * r;
    }
    return fit;
}

double correlation(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) {
        return kNaN;
    }
    const double mx = std::accumulate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        return kNaN;
    }
    return sxy / std::sqrt(sxx * syy);
}

ObjectiveValue evaluate_objective(const DecompositionParams& params, const CalibrationProblem& problem) {
    const std::size_t n = problem.snapshots.size();
    if (n != problem.loads.size()) {
        throw DataIntegrityError("snapshots and loads differ in length");
    }
    ObjectiveValue out;
    out.v_F.assign(n, kNaN);
    parallel_for(n, [&](std::size_t i) {
        try {
            out.v_F[i] = decompose_fm_only(problem.snapshots[i], params).fm_eq.volume.mw();
        } catch (const NoEquilibrium&) {
        } catch (const DomainError&) {
        }
    });
    std::vector<double> x, y;
    x.reserve(n);
    y.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(out.v_F[i])) {
            ++out.failed_hours;
        } else {
            x.push_back(out.v_F[i]);
            y.push_back(problem.loads[i]);
        }
    }
    if (x.empty()) {
        throw ObjectiveUndefined(fmt::format("all {} hours failed to decompose", n));
    }
    out.fit = inner_fit(x, y);
    return out;
}

double objective(const DecompositionParams& params, const CalibrationProblem& problem) {
    return evaluate_objective(params, problem).fit.sse;
}

Vec to_search_space(const DecompositionParams& p) {
    const double u0 = std::clamp((p.a0 - kA0Lo) / kA0Span, 1e-9, 1.0 - 1e-9);
    const double u1 = std::clamp(p.a1 / kA1Span, 1e-9, 1.0 - 1e-9);
    return {logit(u0), logit(u1), share_to(p.gamma1), share_to(p.phi1), share_to(p.alpha1), share_to(p.beta1)};
}

DecompositionParams from_search_space(const Vec& z) {
    return {kA0Lo + kA0Span * sigmoid(z[0]),
            std::max(kA1Span * sigmoid(z[1]), 1e-9),
            share_from(z[2]),
            share_from(z[3]),
            share_from(z[4]),
            share_from(z[5])};
}

std::vector<DecompositionParams> fixed_starts() {
    return {
        kInelasticLimit,
        {5.890, 0.963, 0.510, 0.984, 0.287, 0.019},
        {0.0, 1.0, 0.5, 0.5, 0.5, 0.5},
    };
}

NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, Vec x0, Vec step, int max_iters,
                             double tolerance) {
    constexpr std::size_t n = 6;
    NelderMeadResult res;
    const auto eval = [&](const Vec& x) {
        ++res.evaluations;
        return f(x);
    };

    Vec best = x0;
    double best_value = eval(x0);
    int iters = 0;
    bool converged = false;

    while (iters < max_iters) {
        std::array<Vec, n + 1> s;
        std::array<double, n + 1> fv{};
        s[0] = best;
        fv[0] = best_value;
        for (std::size_t i = 0; i < n; ++i) {
            s[i + 1] = best;
            s[i + 1][i] += step[i];
            fv[i + 1] = eval(s[i + 1]);
        }
        converged = false;
        while (iters < max_iters) {
            ++iters;
            std::array<std::size_t, n + 1> order{};
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            const std::size_t lo = order[0];
            const std::size_t hi = order[n];
            const std::size_t second = order[n - 1];
            if (std::abs(fv[hi] - fv[lo]) <= tolerance * (std::abs(fv[lo]) + tolerance)) {
                converged = true;
                break;
            }
            Vec centroid{};
            for (std::size_t k = 0; k <= n; ++k) {
                if (k == hi) {
                    continue;
                }
                for (std::size_t d = 0; d < n; ++d) {
                    centroid[d] += s[k][d] / n;
                }
            }
            const auto along = [&](double t) {
                Vec x;
                for (std::size_t d = 0; d < n; ++d) {
                    x[d] = centroid[d] + t * (s[hi][d] - centroid[d]);
                }
                return x;
            };
            const Vec xr = along(-1.0);
            const double fr = eval(xr);
            if (fr < fv[lo]) {
                const Vec xe = along(-2.0);
                const double fe = eval(xe);
                if (fe < fr) {
                    s[hi] = xe;
                    fv[hi] = fe;
                } else {
                    s[hi] = xr;
                    fv[hi] = fr;
                }
                continue;
            }
            if (fr < fv[second]) {
                s[hi] = xr;
                fv[hi] = fr;
                continue;
            }
            const bool outside = fr < fv[hi];
            const Vec xc = along(outside ? -0.5 : 0.5);
            const double fc = eval(xc);
            if (fc < (outside ? fr : fv[hi])) {
                s[hi] = xc;
                fv[hi] = fc;
                continue;
            }
            for (std::size_t k = 0; k <= n; ++k) {
                if (k == lo) {
                    continue;
                }
                for (std::size_t d = 0; d < n; ++d) {
                    s[k][d] = s[lo][d] + 0.5 * (s[k][d] - s[lo][d]);
                }
                fv[k] = eval(s[k]);
            }
        }
        const auto it = std::min_element(fv.begin(), fv.end());
        const std::size_t k = static_cast<std::size_t>(it - fv.begin());
        const bool improved = *it < best_value - tolerance * (std::abs(best_value) + tolerance);
        if (*it <= best_value) {
            best = s[k];
            best_value = *it;
        }
        // A flat objective collapses the simplex early; restart from the best
        // vertex until a restart brings nothing.
        if (!improved) {
            break;
        }
    }
    res.x = best;
    res.value = best_value;
    res.converged = converged;
    return res;
}

namespace {

struct Search {
    DecompositionParams params;
    double sse = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
};

Search run_start(const CalibrationProblem& problem, const DecompositionParams& start, const Vec& step,
                 int max_iters, double tolerance) {
    const auto f = [&](const Vec& z) {
        try {
            return objective(from_search_space(z), problem);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const NelderMeadResult r = nelder_mead(f, to_search_space(start), step, max_iters, tolerance);
    return {from_search_space(r.x), r.value, r.converged, r.evaluations};
}

constexpr Vec kStep{0.2, 0.1, 1.0, 1.0, 1.0, 1.0};
constexpr Vec kWarmStep{0.05, 0.025, 0.25, 0.25, 0.25, 0.25};

}  // namespace

void fill_series(CalibrationResult& result, const CalibrationProblem& problem) {
    const std::size_t n = problem.snapshots.size();
    result.v_W_series.assign(n, kNaN);
    result.v_C_series.assign(n, kNaN);
    result.v_F_series.assign(n, kNaN);
    parallel_for(n, [&](std::size_t i) {
        try {
            const DecompositionResult r = decompose(problem.snapshots[i], result.params);
            result.v_W_series[i] = r.wm_eq.volume.mw();
            result.v_C_series[i] = r.v_C.mw();
            result.v_F_series[i] = r.fm_eq.volume.mw();
        } catch (const NoEquilibrium&) {
        } catch (const DomainError&) {
        }
    });
    std::vector<double> load, w, c, f;
    result.failed_hours = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(result.v_F_series[i])) {
            ++result.failed_hours;
            continue;
        }
        load.push_back(problem.loads[i]);
        w.push_back(result.v_W_series[i]);
        c.push_back(result.v_C_series[i]);
        f.push_back(result.v_F_series[i]);
    }
    result.correlations = {correlation(load, w), correlation(load, c), correlation(load, f)};
}

CalibrationResult calibrate(const CalibrationProblem& problem, const OptimizerConfig& config) {
    validate(config);
    validate(problem);
    if (problem.snapshots.size() < 24) {
        throw DataIntegrityError(
            fmt::format("calibration needs at least 24 hours, got {}", problem.snapshots.size()));
    }

    std::vector<DecompositionParams> starts = fixed_starts();
    std::mt19937_64 rng(config.rng_seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    while (starts.size() < static_cast<std::size_t>(config.n_starts)) {
        starts.push_back({kA0Lo + kA0Span * u(rng), kA1Span * (0.05 + 0.95 * u(rng)), u(rng), u(rng), u(rng),
                          u(rng)});
    }
    starts.resize(static_cast<std::size_t>(config.n_starts));

    Search best;
    best.sse = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    for (const auto& start : starts) {
        const Search s = run_start(problem, start, kStep, config.max_iters, config.tolerance);
        evaluations += s.evaluations;
        if (s.sse < best.sse) {
            best = s;
        }
    }
    if (!std::isfinite(best.sse)) {
        throw ObjectiveUndefined("objective undefined at every start");
    }

    CalibrationResult result;
    result.params = best.params;
    const ObjectiveValue ov = evaluate_objective(best.params, problem);
    result.theta0 = ov.fit.theta0;
    result.theta1 = ov.fit.theta1;
    result.sse = ov.fit.sse;
    result.converged = best.converged;
    result.evaluations = evaluations;
    fill_series(result, problem);
    if (config.n_resamples > 0) {
        result.per_param_se = bootstrap_se(problem, result.params, config.n_resamples, config);
    }
    return result;
}

std::array<double, 6> bootstrap_se(const CalibrationProblem& problem, const DecompositionParams& params,
                                   int n_resamples, const OptimizerConfig& config) {
    if (n_resamples < 10) {
        throw ConfigError(fmt::format("bootstrap needs at least 10 resamples, got {}", n_resamples));
    }
    validate(params);

    // Hours grouped by local calendar day.
    std::map<std::chrono::sys_days, std::vector<std::size_t>> by_day;
    for (std::size_t i = 0; i < problem.snapshots.size(); ++i) {
        by_day[std::chrono::sys_days{problem.snapshots[i].timestamp.local_date()}].push_back(i);
    }
    std::vector<const std::vector<std::size_t>*> days;
    for (const auto& [d, idx] : by_day) {
        days.push_back(&idx);
    }
    if (days.size() < 2) {
        throw DataIntegrityError("bootstrap needs at least two days");
    }

    std::mt19937_64 rng(config.rng_seed ^ 0x9E3779B97F4A7C15ULL);
    std::uniform_int_distribution<std::size_t> pick(0, days.size() - 1);
    std::vector<Vec> draws;
    for (int r = 0; r < n_resamples; ++r) {
        CalibrationProblem resample;
        for (std::size_t k = 0; k < days.size(); ++k) {
            for (std::size_t i : *days[pick(rng)]) {
                resample.snapshots.push_back(problem.snapshots[i]);
                resample.loads.push_back(problem.loads[i]);
            }
        }
        const Search s = run_start(resample, params, kWarmStep, config.max_iters, config.tolerance);
        if (std::isfinite(s.sse)) {
            draws.push_back(s.params.as_array());
        }
    }
    if (draws.size() < 2) {
        throw ObjectiveUndefined("fewer than two bootstrap resamples could be fitted");
    }
    std::array<double, 6> se{};
    for (std::size_t d = 0; d < 6; ++d) {
        double mean = 0.0;
        for (const auto& v : draws) {
            mean += v[d];
        }
        mean /= static_cast<double>(draws.size());
        double ss = 0.0;
        for (const auto& v : draws) {
            ss += (v[d] - mean) * (v[d] - mean);
        }
        se[d] = std::sqrt(ss / static_cast<double>(draws.size() - 1));
    }
    return se;
}

}  // namespace fundcurve
