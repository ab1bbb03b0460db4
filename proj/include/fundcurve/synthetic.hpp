#pragma once

#include "fundcurve/decomposition.hpp"
#include "fundcurve/snapshot.hpp"
#include "fundcurve/step_curve.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace fundcurve {

enum class Agent { Utility, Retailer, Supplier };
enum class Side { Buy, Sell };

const char* to_string(Agent a);
const char* to_string(Side s);

struct Order {
    Agent agent = Agent::Supplier;
    Side side = Side::Sell;
    double price = 0.0;
    Volume volume;

    bool operator==(const Order&) const = default;
};

struct OrderBook {
    std::vector<Order> orders;
    double utility_internal_price = 0.0;
};

/// Volumes > 0, prices inside the grid, Retailer only buys, Supplier only sells.
/// Throws DataIntegrityError.
void validate(const OrderBook& book, const PriceGrid& grid);

/// Cumulative volume of a pool of orders: supply counts orders priced at or
/// below each grid price, demand those at or above it.
StepCurve aggregate_orders(const std::vector<Order>& pool, Direction direction, const GridPtr& grid);

struct Clearing {
    StepCurve sup;
    StepCurve dem;
    Equilibrium eq;
};

/// Every buy order in the demand pool, every sell order in the supply pool.
Clearing clear_asd(const OrderBook& book, const GridPtr& grid);

/// Utility orders pooled by sector: sells and buys at or above the internal
/// price join supply, those below it join demand.
Clearing clear_wm(const OrderBook& book, const GridPtr& grid);

/// {-20, -19.5, -18.5, ..., 99.5, 100}: integer order prices never sit on a grid point.
GridPtr toy_grid();

/// Small three-agent book with Utility internal price 20.
OrderBook make_fixture_f1();

/// Parameters under which the WM curves of the fixture decompose back to its ASD curves.
DecompositionParams fixture_f1_params();

struct RandomBookConfig {
    int supply_levels = 8;
    int demand_levels = 8;
    int max_level_units = 10;  ///< level volume is 1..max units of 10 MW
    /// When set, proportions are fixed; otherwise drawn per book as k/10.
    bool fixed_params = false;
    DecompositionParams params;
};

/// Book plus the parameters that reproduce its ASD curves from its WM curves.
struct GeneratedBook {
    OrderBook book;
    DecompositionParams params;
};

/// Deterministic in (seed, config, grid). Orders sit at grid midpoints, the
/// Utility is balanced around its internal price, and the book always crosses
/// at a positive volume. With fixed_params the internal price is
/// a0 + a1 * p^W snapped to the grid; otherwise it is drawn and a0 is chosen
/// to match. Throws ConfigError on infeasible settings.
GeneratedBook random_book(std::uint64_t seed, const RandomBookConfig& config, const GridPtr& grid);

/// WM curves of a book as a snapshot.
MarketSnapshot wm_snapshot(const OrderBook& book, const GridPtr& grid, const Timestamp& ts);

/// Noise-free (or noisy) calibration data: one book per hour, load = theta0 + theta1 * v_ASD + noise.
struct SyntheticProblemConfig {
    int days = 30;
    DecompositionParams params{0.5, 0.9, 0.5, 0.9, 0.3, 0.1};
    double theta0 = 2000.0;
    double theta1 = 1.0;
    double noise_sd = 0.0;
    std::uint64_t seed = 1;
    int start_year = 2017;
};

struct SyntheticProblem {
    std::vector<MarketSnapshot> snapshots;
    std::vector<double> loads;
    std::vector<OrderBook> books;
    std::vector<double> asd_volumes;
};

/// Grid used for synthetic calibration data: fine 0.5 steps on [-20, 100], coarse outside.
GridPtr synthetic_grid();

SyntheticProblem make_synthetic_problem(const SyntheticProblemConfig& config, const GridPtr& grid);

/// Sidecar CSV: timestamp,agent,side,price,volume
void write_orders(std::ostream& out, const Timestamp& ts, const OrderBook& book);
void write_orders_header(std::ostream& out);

}  // namespace fundcurve
