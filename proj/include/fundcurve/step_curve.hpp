#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fundcurve {

/// Volume in MW stored as an integer count of 0.1 MW ticks, so that sums,
/// splits and mirrors of curves conserve volume exactly.
class Volume {
public:
    static constexpr std::int64_t kTicksPerMw = 10;

    constexpr Volume() = default;
    static constexpr Volume from_ticks(std::int64_t ticks) { return Volume(ticks); }
    /// Rounds to the nearest tick.
    static Volume from_mw(double mw);

    constexpr std::int64_t ticks() const { return ticks_; }
    constexpr double mw() const { return static_cast<double>(ticks_) / kTicksPerMw; }

    constexpr Volume operator+(Volume o) const { return Volume(ticks_ + o.ticks_); }
    constexpr Volume operator-(Volume o) const { return Volume(ticks_ - o.ticks_); }
    constexpr Volume operator-() const { return Volume(-ticks_); }
    constexpr Volume& operator+=(Volume o) { ticks_ += o.ticks_; return *this; }
    constexpr Volume& operator-=(Volume o) { ticks_ -= o.ticks_; return *this; }
    constexpr auto operator<=>(const Volume&) const = default;

private:
    constexpr explicit Volume(std::int64_t ticks) : ticks_(ticks) {}
    std::int64_t ticks_ = 0;
};

/// round(share * v) on the tick lattice.
Volume scale(Volume v, double share);

/// Exact decimal text ("-12.3"), one digit after the point.
std::string to_string(Volume v);

/// Strictly increasing price points in EUR/MWh; the first and last entries
/// are the market's p_min and p_max.
class PriceGrid {
public:
    explicit PriceGrid(std::vector<double> prices);

    std::size_t size() const { return prices_.size(); }
    double operator[](std::size_t i) const { return prices_[i]; }
    double p_min() const { return prices_.front(); }
    double p_max() const { return prices_.back(); }
    std::span<const double> prices() const { return prices_; }

    bool contains(double p) const { return p >= p_min() && p <= p_max(); }
    /// Index of the largest grid price <= p. Throws DomainError outside [p_min, p_max].
    std::size_t index_at_or_below(double p) const;
    /// Index of the grid price closest to p (ties go to the lower price). p must be in range.
    std::size_t nearest_index(double p) const;
    /// Distance to the neighbouring grid price above i (below for the last point).
    double step_at(std::size_t i) const;

    bool operator==(const PriceGrid& o) const { return prices_ == o.prices_; }

private:
    std::vector<double> prices_;
};

using GridPtr = std::shared_ptr<const PriceGrid>;

GridPtr make_grid(std::vector<double> prices);

enum class Direction { SupplyInverse, DemandInverse };

Direction opposite(Direction d);
const char* to_string(Direction d);

/// Inverse auction curve: cumulative volume as a right-continuous step
/// function of price, sampled on a shared grid. Supply volumes are
/// nondecreasing in price, demand volumes nonincreasing. Immutable.
class StepCurve {
public:
    StepCurve(GridPtr grid, Direction direction, std::vector<Volume> volumes);

    static StepCurve zero(GridPtr grid, Direction direction);
    static StepCurve constant(GridPtr grid, Direction direction, Volume v);

    const GridPtr& grid() const { return grid_; }
    Direction direction() const { return direction_; }
    std::size_t size() const { return volumes_.size(); }
    Volume at(std::size_t i) const { return volumes_[i]; }
    std::span<const Volume> volumes() const { return volumes_; }

    bool operator==(const StepCurve& o) const;

private:
    GridPtr grid_;
    Direction direction_;
    std::vector<Volume> volumes_;
};

struct Equilibrium {
    Volume volume;
    double price = 0.0;
    std::size_t index = 0;  ///< grid index of `price`
};

/// Closed price interval used to select a segment of a curve.
struct PriceBand {
    double lo = 0.0;
    double hi = 0.0;
};

bool same_grid(const StepCurve& a, const StepCurve& b);

/// Volume at the largest grid price <= p.
Volume eval_inverse(const StepCurve& curve, double p);

/// Pointwise sum; both curves must share grid and direction.
StepCurve sum_inverse(const StepCurve& a, const StepCurve& b);
StepCurve operator+(const StepCurve& a, const StepCurve& b);

/// Lowest grid price at which supply volume reaches demand volume; the
/// cleared volume is the smaller of the two there.
Equilibrium intersect(const StepCurve& sup, const StepCurve& dem);

/// Re-expresses the volume changes of `curve` inside `band` with the opposite
/// monotonicity. A demand curve is accumulated from the band's low end
/// (result(p) = D(lo) - D(p)); a supply curve from its high end
/// (result(p) = S(hi) - S(p)). Outside the band the result is constant.
StepCurve mirror_segment(const StepCurve& curve, PriceBand band);

/// Adds `delta` (>= 0) to every grid volume.
StepCurve shift_volumes(const StepCurve& curve, Volume delta);

}  // namespace fundcurve
