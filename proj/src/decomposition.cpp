#include "fundcurve/decomposition.hpp"

#include "fundcurve/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace fundcurve {

namespace {

void check_share(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw ConfigError(fmt::format("{} = {} is not a proportion in [0, 1]", name, v));
    }
}

// round(share * c) pointwise; monotone because llround is.
std::vector<Volume> scaled(std::span<const Volume> c, double share) {
    std::vector<Volume> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        out[i] = scale(c[i], share);
    }
    return out;
}

std::vector<Volume> minus(std::span<const Volume> a, std::span<const Volume> b) {
    std::vector<Volume> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = a[i] - b[i];
    }
    return out;
}

}  // namespace

void validate(const DecompositionParams& p) {
    if (!std::isfinite(p.a0) || !std::isfinite(p.a1) || !(p.a1 > 0.0)) {
        throw ConfigError(fmt::format("need finite a0 and a1 > 0, got a0 = {}, a1 = {}", p.a0, p.a1));
    }
    check_share(p.gamma1, "gamma1");
    check_share(p.phi1, "phi1");
    check_share(p.alpha1, "alpha1");
    check_share(p.beta1, "beta1");
}

IdentifiedShares identified_shares(const DecompositionParams& p) {
    return {(1.0 - p.beta1) * p.phi1, p.alpha1 * p.gamma1};
}

double internal_price(const DecompositionParams& params, double p_W, const PriceGrid& grid) {
    if (!grid.contains(p_W)) {
        throw DomainError(fmt::format("market price {} outside the grid", p_W));
    }
    return std::clamp(params.a0 + params.a1 * p_W, grid.p_min(), grid.p_max());
}

UtilityPrice resolve_internal_price(const DecompositionParams& params, double p_W, const PriceGrid& grid) {
    const double raw = params.a0 + params.a1 * p_W;
    const double p = internal_price(params, p_W, grid);
    const std::size_t i = grid.nearest_index(p);
    return {grid[i], i, raw != p};
}

std::pair<StepCurve, StepCurve> split_supplier(const StepCurve& wsup, double p_U, double gamma1) {
    if (wsup.direction() != Direction::SupplyInverse) {
        throw IncompatibleCurves("split_supplier expects a supply curve");
    }
    check_share(gamma1, "gamma1");
    const std::size_t iu = wsup.grid()->index_at_or_below(p_U);
    const Volume base = wsup.at(iu);
    std::vector<Volume> own(wsup.size());
    std::vector<Volume> utility(wsup.size());
    for (std::size_t i = 0; i < wsup.size(); ++i) {
        if (i <= iu) {
            own[i] = wsup.at(i);
            continue;
        }
        const Volume d = wsup.at(i) - base;
        utility[i] = scale(d, gamma1);
        own[i] = base + d - utility[i];
    }
    return {StepCurve(wsup.grid(), Direction::SupplyInverse, std::move(own)),
            StepCurve(wsup.grid(), Direction::SupplyInverse, std::move(utility))};
}

std::pair<StepCurve, StepCurve> split_retailer(const StepCurve& wdem, double p_U, double phi1) {
    if (wdem.direction() != Direction::DemandInverse) {
        throw IncompatibleCurves("split_retailer expects a demand curve");
    }
    check_share(phi1, "phi1");
    const std::size_t iu = wdem.grid()->index_at_or_below(p_U);
    const Volume base = wdem.at(iu);
    std::vector<Volume> own(wdem.size());
    std::vector<Volume> utility(wdem.size());
    for (std::size_t i = 0; i < wdem.size(); ++i) {
        if (i >= iu) {
            own[i] = wdem.at(i);
            continue;
        }
        const Volume d = wdem.at(i) - base;
        utility[i] = scale(d, phi1);
        own[i] = base + d - utility[i];
    }
    return {StepCurve(wdem.grid(), Direction::DemandInverse, std::move(own)),
            StepCurve(wdem.grid(), Direction::DemandInverse, std::move(utility))};
}

std::pair<StepCurve, StepCurve> flip_utility(const StepCurve& wsup1, const StepCurve& wdem1, double p_U,
                                             double alpha1, double beta1) {
    if (!same_grid(wsup1, wdem1)) {
        throw IncompatibleCurves("utility curves on different grids");
    }
    check_share(alpha1, "alpha1");
    check_share(beta1, "beta1");
    const GridPtr& grid = wsup1.grid();

    // Demand below p_U that is really supply, and supply above p_U that is really demand.
    const StepCurve flipped_d(grid, Direction::DemandInverse, scaled(wdem1.volumes(), 1.0 - beta1));
    const StepCurve kept_d(grid, Direction::DemandInverse, minus(wdem1.volumes(), flipped_d.volumes()));
    const StepCurve flipped_s(grid, Direction::SupplyInverse, scaled(wsup1.volumes(), alpha1));
    const StepCurve kept_s(grid, Direction::SupplyInverse, minus(wsup1.volumes(), flipped_s.volumes()));

    StepCurve fsup1 = mirror_segment(flipped_d, {grid->p_min(), p_U}) + kept_s;
    StepCurve fdem1 = mirror_segment(flipped_s, {p_U, grid->p_max()}) + kept_d;
    return {std::move(fsup1), std::move(fdem1)};
}

Volume compute_tau(const StepCurve& fsup1_raw, const StepCurve& fdem1_raw, double p_U) {
    return eval_inverse(fsup1_raw, p_U) - eval_inverse(fdem1_raw, p_U);
}

std::pair<StepCurve, StepCurve> adjust_utility(const StepCurve& fsup1_raw, const StepCurve& fdem1_raw, Volume tau1) {
    if (tau1 < Volume{}) {
        return {shift_volumes(fsup1_raw, -tau1), fdem1_raw};
    }
    return {fsup1_raw, shift_volumes(fdem1_raw, tau1)};
}

std::pair<StepCurve, StepCurve> assemble_fm(const StepCurve& sup0, const StepCurve& dem0, const StepCurve& fsup1,
                                            const StepCurve& fdem1) {
    return {sup0 + fsup1, dem0 + fdem1};
}

DecompositionResult decompose_fm_only(const MarketSnapshot& snapshot, const DecompositionParams& params) {
    validate(params);
    const Equilibrium wm = intersect(snapshot.wsup, snapshot.wdem);
    if (wm.volume <= Volume{}) {
        throw NoEquilibrium(fmt::format("{}: wholesale curves clear at zero volume", snapshot.timestamp.to_string()));
    }
    const PriceGrid& grid = *snapshot.wsup.grid();
    const UtilityPrice pu = resolve_internal_price(params, wm.price, grid);

    auto [sup0, wsup1] = split_supplier(snapshot.wsup, pu.price, params.gamma1);
    auto [dem0, wdem1] = split_retailer(snapshot.wdem, pu.price, params.phi1);
    auto [fsup1_raw, fdem1_raw] = flip_utility(wsup1, wdem1, pu.price, params.alpha1, params.beta1);
    const Volume tau = compute_tau(fsup1_raw, fdem1_raw, pu.price);
    auto [fsup1, fdem1] = adjust_utility(fsup1_raw, fdem1_raw, tau);
    auto [fsup, fdem] = assemble_fm(sup0, dem0, fsup1, fdem1);
    const Equilibrium fm = intersect(fsup, fdem);

    return DecompositionResult{
        .p_U = pu.price,
        .pu_index = pu.index,
        .pu_clamped = pu.clamped,
        .pu_below_market = pu.price < wm.price,
        .sup0 = std::move(sup0),
        .dem0 = std::move(dem0),
        .wsup1 = std::move(wsup1),
        .wdem1 = std::move(wdem1),
        .fsup1 = std::move(fsup1),
        .fdem1 = std::move(fdem1),
        .fsup = std::move(fsup),
        .fdem = std::move(fdem),
        .tau1 = tau,
        .wm_eq = wm,
        .fm_eq = fm,
        .v_C = Volume{},
    };
}

DecompositionResult decompose(const MarketSnapshot& snapshot, const DecompositionParams& params) {
    DecompositionResult r = decompose_fm_only(snapshot, params);
    r.v_C = params == kInelasticLimit ? r.fm_eq.volume : decompose_fm_only(snapshot, kInelasticLimit).fm_eq.volume;
    return r;
}

Volume volume_gap(const DecompositionResult& r) {
    const std::size_t iu = r.pu_index;
    const std::size_t iF = r.fm_eq.index;
    if (iu <= iF) {
        return r.fsup1.at(iu) + (r.fdem1.at(iF) - r.fdem1.at(iu));
    }
    return r.fdem1.at(iu) + (r.fsup1.at(iF) - r.fsup1.at(iu));
}

std::string to_string(const DecompositionParams& p) {
    return fmt::format("a0={:.4f} a1={:.4f} gamma1={:.4f} phi1={:.4f} alpha1={:.4f} beta1={:.4f}", p.a0, p.a1,
                       p.gamma1, p.phi1, p.alpha1, p.beta1);
}

void validate(const MarketSnapshot& s) {
    const std::string when = s.timestamp.to_string();
    if (s.wsup.direction() != Direction::SupplyInverse || s.wdem.direction() != Direction::DemandInverse) {
        throw DataIntegrityError(fmt::format("{}: curve directions swapped", when));
    }
    if (!same_grid(s.wsup, s.wdem)) {
        throw DataIntegrityError(fmt::format("{}: supply and demand on different grids", when));
    }
    if (s.wdem.at(0) < s.wsup.at(0)) {
        throw DataIntegrityError(fmt::format("{}: supply exceeds demand at p_min", when));
    }
}

}  // namespace fundcurve
