#include "fundcurve/synthetic.hpp"

#include "fundcurve/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <numeric>
#include <ostream>
#include <random>

namespace fundcurve {

namespace {

constexpr std::int64_t kUnit = 100;  // 10 MW in ticks

struct Pools {
    std::vector<Order> supply;
    std::vector<Order> demand;
};

StepCurve supply_curve(const std::vector<Order>& pool, const GridPtr& grid) {
    const auto prices = grid->prices();
    std::vector<std::int64_t> inc(grid->size() + 1, 0);
    for (const auto& o : pool) {
        const auto k = static_cast<std::size_t>(std::lower_bound(prices.begin(), prices.end(), o.price) - prices.begin());
        inc[k] += o.volume.ticks();
    }
    std::vector<Volume> v(grid->size());
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        acc += inc[i];
        v[i] = Volume::from_ticks(acc);
    }
    return StepCurve(grid, Direction::SupplyInverse, std::move(v));
}

StepCurve demand_curve(const std::vector<Order>& pool, const GridPtr& grid) {
    std::vector<std::int64_t> inc(grid->size(), 0);
    for (const auto& o : pool) {
        inc[grid->index_at_or_below(o.price)] += o.volume.ticks();
    }
    std::vector<Volume> v(grid->size());
    std::int64_t acc = 0;
    for (std::size_t i = v.size(); i-- > 0;) {
        acc += inc[i];
        v[i] = Volume::from_ticks(acc);
    }
    return StepCurve(grid, Direction::DemandInverse, std::move(v));
}

Clearing clear_pools(const Pools& pools, const GridPtr& grid) {
    StepCurve sup = aggregate_orders(pools.supply, Direction::SupplyInverse, grid);
    StepCurve dem = aggregate_orders(pools.demand, Direction::DemandInverse, grid);
    const Equilibrium eq = intersect(sup, dem);
    return {std::move(sup), std::move(dem), eq};
}

int tenths(double share, const char* name) {
    const double k = std::round(share * 10.0);
    if (std::abs(share * 10.0 - k) > 1e-9 || k < 0 || k > 10) {
        throw ConfigError(fmt::format("{} = {} is not a multiple of 0.1 in [0, 1]", name, share));
    }
    return static_cast<int>(k);
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

void push(std::vector<Order>& orders, Agent agent, Side side, double price, std::int64_t ticks) {
    if (ticks > 0) {
        orders.push_back({agent, side, price, Volume::from_ticks(ticks)});
    }
}

}  // namespace

StepCurve aggregate_orders(const std::vector<Order>& pool, Direction direction, const GridPtr& grid) {
    return direction == Direction::SupplyInverse ? supply_curve(pool, grid) : demand_curve(pool, grid);
}

const char* to_string(Agent a) {
    switch (a) {
        case Agent::Utility: return "Utility";
        case Agent::Retailer: return "Retailer";
        case Agent::Supplier: return "Supplier";
    }
    return "?";
}

const char* to_string(Side s) { return s == Side::Buy ? "Buy" : "Sell"; }

void validate(const OrderBook& book, const PriceGrid& grid) {
    for (std::size_t i = 0; i < book.orders.size(); ++i) {
        const Order& o = book.orders[i];
        if (o.volume <= Volume{}) {
            throw DataIntegrityError(fmt::format("order {}: volume must be positive", i));
        }
        if (!grid.contains(o.price)) {
            throw DataIntegrityError(fmt::format("order {}: price {} outside the grid", i, o.price));
        }
        if (o.agent == Agent::Retailer && o.side != Side::Buy) {
            throw DataIntegrityError(fmt::format("order {}: Retailer can only buy", i));
        }
        if (o.agent == Agent::Supplier && o.side != Side::Sell) {
            throw DataIntegrityError(fmt::format("order {}: Supplier can only sell", i));
        }
    }
    if (!grid.contains(book.utility_internal_price)) {
        throw DataIntegrityError("utility internal price outside the grid");
    }
}

Clearing clear_asd(const OrderBook& book, const GridPtr& grid) {
    validate(book, *grid);
    Pools pools;
    for (const auto& o : book.orders) {
        (o.side == Side::Sell ? pools.supply : pools.demand).push_back(o);
    }
    return clear_pools(pools, grid);
}

Clearing clear_wm(const OrderBook& book, const GridPtr& grid) {
    validate(book, *grid);
    Pools pools;
    for (const auto& o : book.orders) {
        if (o.agent == Agent::Utility) {
            // Sectors 1 and 2 (at or above the internal price) supply, 3 and 4 demand.
            (o.price >= book.utility_internal_price ? pools.supply : pools.demand).push_back(o);
        } else {
            (o.side == Side::Sell ? pools.supply : pools.demand).push_back(o);
        }
    }
    return clear_pools(pools, grid);
}

GridPtr toy_grid() {
    std::vector<double> p{-20.0};
    for (int x = -20; x < 100; ++x) {
        p.push_back(x + 0.5);
    }
    p.push_back(100.0);
    return make_grid(std::move(p));
}

OrderBook make_fixture_f1() {
    const auto mw = [](double v) { return Volume::from_mw(v); };
    OrderBook b;
    b.utility_internal_price = 20.0;
    for (double p : {5.0, 15.0, 25.0, 45.0}) {
        b.orders.push_back({Agent::Supplier, Side::Sell, p, mw(10)});
    }
    for (double p : {95.0, 75.0, 35.0, 15.0}) {
        b.orders.push_back({Agent::Retailer, Side::Buy, p, mw(10)});
    }
    b.orders.push_back({Agent::Utility, Side::Sell, 0.0, mw(20)});
    for (double p : {10.0, 30.0, 50.0}) {
        b.orders.push_back({Agent::Utility, Side::Sell, p, mw(10)});
    }
    // The 60 EUR buy balances the Utility's sells below 20 against its buys above 20.
    for (double p : {90.0, 60.0, 40.0, 10.0}) {
        b.orders.push_back({Agent::Utility, Side::Buy, p, mw(10)});
    }
    return b;
}

DecompositionParams fixture_f1_params() { return {0.0, 1.0, 5.0 / 6.0, 0.8, 0.6, 0.25}; }

GeneratedBook random_book(std::uint64_t seed, const RandomBookConfig& cfg, const GridPtr& grid) {
    const std::size_t n = grid->size();
    if (n < 5) {
        throw ConfigError("random books need a grid of at least five prices");
    }
    if (cfg.supply_levels < 0 || cfg.demand_levels < 0 || cfg.max_level_units < 1) {
        throw ConfigError("random book sizes must be non-negative and max_level_units >= 1");
    }
    if (cfg.fixed_params) {
        validate(cfg.params);
    }
    std::mt19937_64 rng(seed);
    const auto uniform_int = [&](std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    };
    const auto& g = *grid;
    const std::size_t m = n - 1;  // midpoints between consecutive grid prices
    std::vector<double> mid(m);
    for (std::size_t j = 0; j < m; ++j) {
        mid[j] = 0.5 * (g[j] + g[j + 1]);
    }

    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<std::int64_t> sup(m, 0);
        std::vector<std::int64_t> dem(m, 0);
        const std::int64_t top_buy = kUnit * uniform_int(1, cfg.max_level_units);
        sup[0] = top_buy + kUnit * uniform_int(0, cfg.max_level_units);  // must-run block
        dem[m - 1] = top_buy;                                          // price-insensitive demand
        for (int k = 0; k < cfg.supply_levels; ++k) {
            sup[uniform_int(1, static_cast<std::int64_t>(m) - 2)] += kUnit * uniform_int(1, cfg.max_level_units);
        }
        for (int k = 0; k < cfg.demand_levels; ++k) {
            dem[uniform_int(1, static_cast<std::int64_t>(m) - 2)] += kUnit * uniform_int(1, cfg.max_level_units);
        }

        std::vector<Volume> ws(n), wd(n);
        std::int64_t acc = 0;
        for (std::size_t i = 0; i < n; ++i) {
            ws[i] = Volume::from_ticks(acc);
            if (i < m) {
                acc += sup[i];
            }
        }
        acc = 0;
        for (std::size_t i = n; i-- > 0;) {
            if (i < m) {
                acc += dem[i];
            }
            wd[i] = Volume::from_ticks(acc);
        }
        const Equilibrium wm = intersect(StepCurve(grid, Direction::SupplyInverse, std::move(ws)),
                                         StepCurve(grid, Direction::DemandInverse, std::move(wd)));

        DecompositionParams params = cfg.params;
        std::size_t iu = 0;
        if (cfg.fixed_params) {
            iu = resolve_internal_price(params, wm.price, g).index;
        } else {
            params.gamma1 = uniform_int(0, 10) / 10.0;
            params.phi1 = uniform_int(0, 10) / 10.0;
            params.alpha1 = uniform_int(0, 10) / 10.0;
            params.beta1 = uniform_int(0, 10) / 10.0;
            iu = static_cast<std::size_t>(uniform_int(1, static_cast<std::int64_t>(n) - 2));
            params.a1 = std::uniform_real_distribution<double>(0.5, 1.5)(rng);
            params.a0 = g[iu] - params.a1 * wm.price;
            if (resolve_internal_price(params, wm.price, g).index != iu) {
                continue;
            }
        }
        if (iu == 0 || iu >= n - 1) {
            continue;
        }
        const std::int64_t gi = tenths(params.gamma1, "gamma1");
        const std::int64_t fi = tenths(params.phi1, "phi1");
        const std::int64_t ai = tenths(params.alpha1, "alpha1");
        const std::int64_t bi = tenths(params.beta1, "beta1");

        // Volume the Utility moves across the market must match on both sides:
        // A * (demand below p^U) == B * (supply above p^U).
        const std::int64_t A = (10 - bi) * fi;
        const std::int64_t B = ai * gi;
        if ((A == 0) != (B == 0)) {
            if (cfg.fixed_params) {
                throw ConfigError("parameters move volume across the market in one direction only");
            }
            continue;
        }
        if (A > 0) {
            const std::int64_t L = std::lcm(A, B);
            const std::int64_t l = L / A;
            const std::int64_t u = L / B;
            std::int64_t d_low = 0;
            std::int64_t s_high = 0;
            for (std::size_t j = 0; j < m; ++j) {
                if (j < iu) {
                    d_low += dem[j];
                } else {
                    s_high += sup[j];
                }
            }
            const std::int64_t c = std::max({ceil_div(d_low, kUnit * l), ceil_div(s_high, kUnit * u), std::int64_t{1}});
            // Top-ups at the outermost midpoints leave the clearing untouched.
            dem[0] += c * l * kUnit - d_low;
            sup[m - 1] += c * u * kUnit - s_high;
        }

        GeneratedBook out;
        out.params = params;
        out.book.utility_internal_price = g[iu];
        auto& orders = out.book.orders;
        for (std::size_t j = 0; j < m; ++j) {
            const std::int64_t v = sup[j];
            if (j < iu) {
                push(orders, Agent::Supplier, Side::Sell, mid[j], v);
                continue;
            }
            const std::int64_t util = v * gi / 10;
            const std::int64_t flipped = util * ai / 10;
            push(orders, Agent::Supplier, Side::Sell, mid[j], v - util);
            push(orders, Agent::Utility, Side::Sell, mid[j], util - flipped);
            push(orders, Agent::Utility, Side::Buy, mid[j], flipped);
        }
        for (std::size_t j = 0; j < m; ++j) {
            const std::int64_t v = dem[j];
            if (j >= iu) {
                push(orders, Agent::Retailer, Side::Buy, mid[j], v);
                continue;
            }
            const std::int64_t util = v * fi / 10;
            const std::int64_t kept = util * bi / 10;
            push(orders, Agent::Retailer, Side::Buy, mid[j], v - util);
            push(orders, Agent::Utility, Side::Buy, mid[j], kept);
            push(orders, Agent::Utility, Side::Sell, mid[j], util - kept);
        }
        return out;
    }
    throw ConfigError("could not generate a feasible book for these settings");
}

MarketSnapshot wm_snapshot(const OrderBook& book, const GridPtr& grid, const Timestamp& ts) {
    Clearing c = clear_wm(book, grid);
    return {ts, std::move(c.sup), std::move(c.dem)};
}

GridPtr synthetic_grid() {
    std::vector<double> p{-100.0, -80.0, -60.0, -40.0};
    for (int k = 0; k <= 240; ++k) {
        p.push_back(-20.0 + 0.5 * k);
    }
    for (double x = 120.0; x < 300.0; x += 20.0) {
        p.push_back(x);
    }
    p.push_back(300.0);
    return make_grid(std::move(p));
}

SyntheticProblem make_synthetic_problem(const SyntheticProblemConfig& cfg, const GridPtr& grid) {
    if (cfg.days < 1) {
        throw ConfigError("synthetic problem needs at least one day");
    }
    RandomBookConfig book_cfg;
    book_cfg.fixed_params = true;
    book_cfg.params = cfg.params;

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_sd > 0.0 ? cfg.noise_sd : 1.0);

    const std::vector<Timestamp> hours = market_hours(cfg.start_year, 1, 1, cfg.days);

    SyntheticProblem out;
    out.snapshots.reserve(hours.size());
    for (const Timestamp& ts : hours) {
        GeneratedBook gb = random_book(rng(), book_cfg, grid);
        const Clearing asd = clear_asd(gb.book, grid);
        double load = cfg.theta0 + cfg.theta1 * asd.eq.volume.mw();
        if (cfg.noise_sd > 0.0) {
            load += noise(rng);
        }
        out.snapshots.push_back(wm_snapshot(gb.book, grid, ts));
        out.loads.push_back(load);
        out.asd_volumes.push_back(asd.eq.volume.mw());
        out.books.push_back(std::move(gb.book));
    }
    return out;
}

void write_orders_header(std::ostream& out) { out << "timestamp,agent,side,price,volume\n"; }

void write_orders(std::ostream& out, const Timestamp& ts, const OrderBook& book) {
    const std::string when = ts.to_string();
    for (const auto& o : book.orders) {
        fmt::print(out, "{},{},{},{},{}\n", when, to_string(o.agent), to_string(o.side), o.price,
                   to_string(o.volume));
    }
}

}  // namespace fundcurve
