#include "fundcurve/step_curve.hpp"

#include "fundcurve/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace fundcurve {

Volume Volume::from_mw(double mw) {
    if (!std::isfinite(mw)) {
        throw DomainError("volume is not finite");
    }
    return Volume(std::llround(mw * kTicksPerMw));
}

Volume scale(Volume v, double share) {
    return Volume::from_ticks(std::llround(share * static_cast<double>(v.ticks())));
}

std::string to_string(Volume v) {
    const std::int64_t t = v.ticks();
    const std::int64_t a = t < 0 ? -t : t;
    return fmt::format("{}{}.{}", t < 0 ? "-" : "", a / Volume::kTicksPerMw, a % Volume::kTicksPerMw);
}

PriceGrid::PriceGrid(std::vector<double> prices) : prices_(std::move(prices)) {
    if (prices_.size() < 2) {
        throw ConfigError("price grid needs at least two points");
    }
    for (std::size_t i = 0; i < prices_.size(); ++i) {
        if (!std::isfinite(prices_[i])) {
            throw ConfigError("price grid contains a non-finite price");
        }
        if (i > 0 && !(prices_[i] > prices_[i - 1])) {
            throw ConfigError(fmt::format("price grid not strictly increasing at index {}", i));
        }
    }
}

std::size_t PriceGrid::index_at_or_below(double p) const {
    if (!contains(p)) {
        throw DomainError(fmt::format("price {} outside [{}, {}]", p, p_min(), p_max()));
    }
    auto it = std::upper_bound(prices_.begin(), prices_.end(), p);
    return static_cast<std::size_t>(it - prices_.begin()) - 1;
}

std::size_t PriceGrid::nearest_index(double p) const {
    const std::size_t i = index_at_or_below(p);
    if (i + 1 < prices_.size() && prices_[i + 1] - p < p - prices_[i]) {
        return i + 1;
    }
    return i;
}

double PriceGrid::step_at(std::size_t i) const {
    return i + 1 < prices_.size() ? prices_[i + 1] - prices_[i] : prices_[i] - prices_[i - 1];
}

GridPtr make_grid(std::vector<double> prices) {
    return std::make_shared<const PriceGrid>(std::move(prices));
}

Direction opposite(Direction d) {
    return d == Direction::SupplyInverse ? Direction::DemandInverse : Direction::SupplyInverse;
}

const char* to_string(Direction d) {
    return d == Direction::SupplyInverse ? "supply" : "demand";
}

StepCurve::StepCurve(GridPtr grid, Direction direction, std::vector<Volume> volumes)
    : grid_(std::move(grid)), direction_(direction), volumes_(std::move(volumes)) {
    if (!grid_) {
        throw IncompatibleCurves("curve without a price grid");
    }
    if (volumes_.size() != grid_->size()) {
        throw IncompatibleCurves(
            fmt::format("curve has {} volumes for a grid of {} prices", volumes_.size(), grid_->size()));
    }
    for (std::size_t i = 0; i < volumes_.size(); ++i) {
        if (volumes_[i] < Volume{}) {
            throw DomainError(fmt::format("negative volume at price {}", (*grid_)[i]));
        }
        if (i == 0) {
            continue;
        }
        const bool ok = direction_ == Direction::SupplyInverse ? volumes_[i] >= volumes_[i - 1]
                                                               : volumes_[i] <= volumes_[i - 1];
        if (!ok) {
            throw DomainError(fmt::format("{} curve not monotone at price {}", to_string(direction_), (*grid_)[i]));
        }
    }
}

StepCurve StepCurve::zero(GridPtr grid, Direction direction) {
    return constant(std::move(grid), direction, Volume{});
}

StepCurve StepCurve::constant(GridPtr grid, Direction direction, Volume v) {
    const std::size_t n = grid->size();
    return StepCurve(std::move(grid), direction, std::vector<Volume>(n, v));
}

bool StepCurve::operator==(const StepCurve& o) const {
    return direction_ == o.direction_ && same_grid(*this, o) && volumes_ == o.volumes_;
}

bool same_grid(const StepCurve& a, const StepCurve& b) {
    return a.grid() == b.grid() || *a.grid() == *b.grid();
}

Volume eval_inverse(const StepCurve& curve, double p) {
    return curve.at(curve.grid()->index_at_or_below(p));
}

StepCurve sum_inverse(const StepCurve& a, const StepCurve& b) {
    if (!same_grid(a, b)) {
        throw IncompatibleCurves("cannot add curves on different grids");
    }
    if (a.direction() != b.direction()) {
        throw IncompatibleCurves("cannot add a supply curve to a demand curve");
    }
    std::vector<Volume> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.at(i) + b.at(i);
    }
    return StepCurve(a.grid(), a.direction(), std::move(out));
}

StepCurve operator+(const StepCurve& a, const StepCurve& b) { return sum_inverse(a, b); }

Equilibrium intersect(const StepCurve& sup, const StepCurve& dem) {
    if (sup.direction() != Direction::SupplyInverse || dem.direction() != Direction::DemandInverse) {
        throw IncompatibleCurves("intersect expects (supply, demand)");
    }
    if (!same_grid(sup, dem)) {
        throw IncompatibleCurves("cannot intersect curves on different grids");
    }
    if (dem.at(0) < sup.at(0)) {
        throw NoEquilibrium("supply exceeds demand already at p_min");
    }
    const auto& grid = *sup.grid();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (sup.at(i) >= dem.at(i)) {
            return Equilibrium{std::min(sup.at(i), dem.at(i)), grid[i], i};
        }
    }
    throw NoEquilibrium("demand exceeds supply up to p_max");
}

StepCurve mirror_segment(const StepCurve& curve, PriceBand band) {
    if (band.lo > band.hi) {
        throw DomainError(fmt::format("empty band [{}, {}]", band.lo, band.hi));
    }
    const auto& grid = *curve.grid();
    const std::size_t lo = grid.index_at_or_below(band.lo);
    const std::size_t hi = grid.index_at_or_below(band.hi);
    const bool demand = curve.direction() == Direction::DemandInverse;
    const Volume anchor = curve.at(demand ? lo : hi);

    std::vector<Volume> out(curve.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = anchor - curve.at(std::clamp(i, lo, hi));
    }
    return StepCurve(curve.grid(), opposite(curve.direction()), std::move(out));
}

StepCurve shift_volumes(const StepCurve& curve, Volume delta) {
    if (delta < Volume{}) {
        throw DomainError("negative volume shift");
    }
    std::vector<Volume> out(curve.volumes().begin(), curve.volumes().end());
    for (auto& v : out) {
        v += delta;
    }
    return StepCurve(curve.grid(), curve.direction(), std::move(out));
}

}  // namespace fundcurve
