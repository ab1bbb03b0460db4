#pragma once

#include "fundcurve/snapshot.hpp"
#include "fundcurve/step_curve.hpp"

#include <array>
#include <string>
#include <utility>

namespace fundcurve {

/// Free parameters of the decomposition.
///
/// p^U = a0 + a1 * p^W is the Utility's internal price. gamma1 is the
/// Utility's share of wholesale supply above p^U, phi1 its share of wholesale
/// demand below p^U. alpha1 is the part of the Utility's wholesale supply that
/// is really demand (flipped back to the demand side), beta1 the part of its
/// wholesale demand that stays on the demand side.
struct DecompositionParams {
    double a0 = 0.0;
    double a1 = 1.0;
    double gamma1 = 0.0;
    double phi1 = 0.0;
    double alpha1 = 0.0;
    double beta1 = 1.0;

    std::array<double, 6> as_array() const { return {a0, a1, gamma1, phi1, alpha1, beta1}; }
    static DecompositionParams from_array(const std::array<double, 6>& v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5]};
    }
    bool operator==(const DecompositionParams&) const = default;
};

/// Throws ConfigError unless all four proportions are in [0, 1], a1 > 0 and
/// everything is finite.
void validate(const DecompositionParams& params);

/// All demand elasticity moved to the supply side: vertical FM demand below p^U.
inline constexpr DecompositionParams kInelasticLimit{0.0, 1.0, 1.0, 1.0, 0.0, 0.0};

/// The FM curves only depend on the parameters through these two products.
struct IdentifiedShares {
    double kappa = 0.0;   ///< (1 - beta1) * phi1: share of lower WM demand moved to supply
    double lambda = 0.0;  ///< alpha1 * gamma1: share of upper WM supply moved to demand
};

IdentifiedShares identified_shares(const DecompositionParams& params);

/// a0 + a1 * p_W clamped into [p_min, p_max] of `grid`.
double internal_price(const DecompositionParams& params, double p_W, const PriceGrid& grid);

/// Internal price after clamping and snapping to the nearest grid point.
struct UtilityPrice {
    double price = 0.0;
    std::size_t index = 0;
    bool clamped = false;
};

UtilityPrice resolve_internal_price(const DecompositionParams& params, double p_W, const PriceGrid& grid);

/// (sup0, wsup1): gamma1 of the wholesale supply increments above p_U go to the Utility.
std::pair<StepCurve, StepCurve> split_supplier(const StepCurve& wsup, double p_U, double gamma1);

/// (dem0, wdem1): phi1 of the wholesale demand increments below p_U go to the Utility.
std::pair<StepCurve, StepCurve> split_retailer(const StepCurve& wdem, double p_U, double phi1);

/// (fsup1_raw, fdem1_raw) before the internal-equilibrium shift.
std::pair<StepCurve, StepCurve> flip_utility(const StepCurve& wsup1, const StepCurve& wdem1, double p_U,
                                             double alpha1, double beta1);

/// fsup1_raw(p_U) - fdem1_raw(p_U), signed.
Volume compute_tau(const StepCurve& fsup1_raw, const StepCurve& fdem1_raw, double p_U);

/// Shifts the short side right by |tau1| so both curves meet at p_U.
std::pair<StepCurve, StepCurve> adjust_utility(const StepCurve& fsup1_raw, const StepCurve& fdem1_raw, Volume tau1);

/// (sup0 + fsup1, dem0 + fdem1).
std::pair<StepCurve, StepCurve> assemble_fm(const StepCurve& sup0, const StepCurve& dem0, const StepCurve& fsup1,
                                            const StepCurve& fdem1);

struct DecompositionResult {
    double p_U = 0.0;
    std::size_t pu_index = 0;
    bool pu_clamped = false;
    bool pu_below_market = false;  ///< p^U < p^W; formulas applied as usual
    StepCurve sup0, dem0, wsup1, wdem1;
    StepCurve fsup1, fdem1;
    StepCurve fsup, fdem;
    Volume tau1;
    Equilibrium wm_eq;
    Equilibrium fm_eq;
    Volume v_C;
};

/// Full pipeline for one hour. Throws NoEquilibrium if the wholesale curves do
/// not cross at a positive volume.
DecompositionResult decompose(const MarketSnapshot& snapshot, const DecompositionParams& params);

/// Same, but skips the second (inelastic-limit) pass; v_C is left at zero.
DecompositionResult decompose_fm_only(const MarketSnapshot& snapshot, const DecompositionParams& params);

/// v^F - v^W read off the Utility FM curves around p^U and p^F.
Volume volume_gap(const DecompositionResult& result);

std::string to_string(const DecompositionParams& params);

}  // namespace fundcurve
