#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fundcurve/decomposition.hpp"
#include "fundcurve/elasticity.hpp"
#include "fundcurve/errors.hpp"
#include "fundcurve/synthetic.hpp"
#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace fundcurve;

namespace {

GridPtr uniform_grid(double lo, double hi, double step) {
    std::vector<double> p;
    for (int k = 0; lo + k * step <= hi + 1e-9; ++k) {
        p.push_back(lo + k * step);
    }
    return make_grid(std::move(p));
}

// Demand whose forward curve is price = intercept + s * volume (s < 0).
StepCurve linear_demand(const GridPtr& g, double intercept, double s) {
    std::vector<double> mw;
    for (double p : g->prices()) {
        mw.push_back(std::max(0.0, (p - intercept) / s));
    }
    return testing::mw_curve(g, Direction::DemandInverse, mw);
}

// Lowest grid price whose demand is at most `ticks`.
double oracle_forward(const std::vector<double>& grid, const oracle::Ticks& d, std::int64_t ticks) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (d[i] <= ticks) {
            return grid[i];
        }
    }
    return std::nan("");
}

}  // namespace

TEST_CASE("slope on an exactly linear demand") {
    const auto g = uniform_grid(0.0, 100.0, 0.5);
    const auto d = linear_demand(g, 100.0, -0.05);
    for (double p : {20.0, 25.0, 30.0, 40.0, 50.0, 60.0}) {
        CAPTURE(p);
        const double ls = slope(d, p, 100.0);
        CHECK(std::abs(ls - (-0.05)) <= 1e-9 * 0.05);
    }
}

TEST_CASE("slope across a vertical stretch") {
    const auto g = uniform_grid(0.0, 100.0, 10.0);
    // 1000 MW below 40, 800 MW on [40, 60), 600 MW above.
    std::vector<double> mw;
    for (double p : g->prices()) {
        mw.push_back(p < 40 ? 1000 : p < 60 ? 800 : 600);
    }
    const auto d = testing::mw_curve(g, Direction::DemandInverse, mw);
    CHECK(slope(d, 50.0, 150.0) == doctest::Approx(-20.0 / 300.0));
    CHECK(slope(d, 40.0, 150.0) == doctest::Approx(-20.0 / 300.0));
}

TEST_CASE("slope on the fixture's fundamental demand matches direct evaluation") {
    const auto g = toy_grid();
    const auto r = decompose(wm_snapshot(make_fixture_f1(), g, Timestamp{}), fixture_f1_params());
    const auto grid = testing::prices(g);
    const auto ticks = testing::ticks(r.fdem);
    for (double h : {0.5, 1.0, 5.0, 10.0}) {
        for (double p : {25.5, 30.0, 34.5, 40.0}) {
            CAPTURE(h);
            CAPTURE(p);
            const std::int64_t v = ticks[g->index_at_or_below(p)];
            const std::int64_t dh = std::llround(h * 10);
            const double expected = (oracle_forward(grid, ticks, v + dh) - oracle_forward(grid, ticks, v - dh)) / (2 * h);
            CHECK(slope(r.fdem, p, h) == doctest::Approx(expected));
            CHECK(slope(r.fdem, p, h) < 0.0);
        }
    }
}

TEST_CASE("point elasticity") {
    const auto g = uniform_grid(0.0, 240.0, 0.5);
    const auto d = linear_demand(g, 240.0, -0.01);
    CHECK(eval_inverse(d, 40.0) == Volume::from_mw(20000));
    CHECK(slope(d, 40.0, 100.0) == doctest::Approx(-0.01));
    CHECK(point_elasticity(d, 40.0, 100.0) == doctest::Approx(-0.2));
    CHECK(point_elasticity(d, 0.0, 100.0) == 0.0);
    CHECK_THROWS_AS(point_elasticity(d, 240.0, 100.0), DomainError);
    // Shifts below tick resolution land on the same price.
    CHECK(slope(d, 40.0, 1e-9) == 0.0);
    CHECK(point_elasticity(d, 40.0, 1e-9) == kInfiniteElasticity);
    CHECK_THROWS_AS(slope(d, 40.0, 0.0), DomainError);
}

TEST_CASE("forward demand range") {
    const auto g = uniform_grid(0.0, 100.0, 0.5);
    const auto d = linear_demand(g, 100.0, -0.05);
    CHECK(forward_demand(d, 2000.0) == 0.0);
    CHECK(forward_demand(d, 0.0) == 100.0);
    CHECK(forward_demand(d, 1000.0) == 50.0);
    CHECK(forward_demand(d, 999.0) == 50.5);
    CHECK_THROWS_AS(forward_demand(d, 2000.1), OutOfRange);
    CHECK_THROWS_AS(forward_demand(d, -0.1), OutOfRange);
    CHECK_THROWS_AS(slope(d, 5.0, 200.0), OutOfRange);
    CHECK_THROWS_AS(forward_demand(StepCurve::zero(g, Direction::SupplyInverse), 0.0), IncompatibleCurves);
}

TEST_CASE("elasticities are never positive on fundamental demand curves") {
    const auto g = toy_grid();
    ElasticityConfig cfg;
    cfg.h = 10.0;
    std::vector<HourCurve> hours;
    Timestamp ts = Timestamp::from_local(2017, 1, 1, 0, 0, 60);
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
        const auto gb = random_book(seed, {}, g);
        hours.push_back({ts, decompose(wm_snapshot(gb.book, g, ts), gb.params).fdem});
        ts = ts.plus(std::chrono::hours{1});
    }
    const auto rows = analyze(hours, cfg);
    REQUIRE(rows.size() == hours.size() * cfg.points.size());
    std::size_t ok = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        CHECK(r.timestamp == hours[i / cfg.points.size()].timestamp);
        CHECK(r.probe_price == cfg.points[i % cfg.points.size()]);
        if (r.flag == ProbeFlag::Ok) {
            ++ok;
            CHECK(r.slope < 0.0);
            CHECK(r.elasticity <= 0.0);
            if (r.probe_price > 0.0) {
                CHECK(r.elasticity < 0.0);
            }
        } else {
            CHECK(std::isnan(r.elasticity));
        }
    }
    CHECK(ok > rows.size() / 2);
}

TEST_CASE("aggregate") {
    const auto jan = Timestamp::from_local(2017, 1, 2, 5, 0, 60);
    SUBCASE("single row") {
        const auto t = aggregate({{jan, 30.0, -0.01, -0.15, ProbeFlag::Ok}}, AggregateKey::Month);
        REQUIRE(t.cells.size() == 1);
        CHECK(t.cells[0].key == 1);
        CHECK(t.cells[0].mean == -0.15);
        CHECK(t.cells[0].count == 1);
    }
    SUBCASE("symmetric rows") {
        const auto t = aggregate({{jan, 30.0, -0.01, -0.15, ProbeFlag::Ok}, {jan, 30.0, -0.01, 0.15, ProbeFlag::Ok}},
                                 AggregateKey::HourOfDay);
        REQUIRE(t.cells.size() == 1);
        CHECK(t.cells[0].key == 5);
        CHECK(t.cells[0].mean == 0.0);
    }
    SUBCASE("flagged rows are counted, not averaged") {
        const std::vector<ElasticityRow> rows{{jan, 30.0, -0.01, -0.1, ProbeFlag::Ok},
                                              {jan, 30.0, 0.0, kInfiniteElasticity, ProbeFlag::ZeroSlope},
                                              {jan, 30.0, std::nan(""), std::nan(""), ProbeFlag::OutOfRange},
                                              {jan, 60.0, std::nan(""), std::nan(""), ProbeFlag::OutOfRange}};
        const auto t = aggregate(rows, AggregateKey::DayOfWeek);
        CHECK(t.excluded == 3);
        REQUIRE(t.cells.size() == 2);
        CHECK(t.cells[0].key == 1);
        CHECK(t.cells[0].mean == -0.1);
        CHECK(t.cells[0].excluded == 2);
        CHECK(t.cells[1].count == 0);
        CHECK(std::isnan(t.cells[1].mean));
        CHECK(t.cells[1].excluded == 1);
        CHECK_THROWS_AS(aggregate({rows[1], rows[2]}, AggregateKey::Month), EmptyAggregate);
        CHECK_THROWS_AS(aggregate({}, AggregateKey::Month), EmptyAggregate);
    }
}

TEST_CASE("aggregate ignores row order") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> e(-0.3, 0.0);
    std::vector<ElasticityRow> rows;
    Timestamp ts = Timestamp::from_local(2017, 1, 1, 0, 0, 60);
    for (int h = 0; h < 24 * 60; ++h) {
        for (double p : {20.0, 40.0}) {
            rows.push_back({ts, p, -0.01, e(rng), ProbeFlag::Ok});
        }
        ts = ts.plus(std::chrono::hours{1});
    }
    const auto a = aggregate(rows, AggregateKey::HourOfDay);
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto b = aggregate(rows, AggregateKey::HourOfDay);
    REQUIRE(a.cells.size() == 48);
    REQUIRE(b.cells.size() == 48);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].key == b.cells[i].key);
        CHECK(a.cells[i].count == b.cells[i].count);
        CHECK(a.cells[i].mean == doctest::Approx(b.cells[i].mean).epsilon(1e-12));
    }
}

TEST_CASE("a year of identical curves gives identical means under every key") {
    const auto g = uniform_grid(-20.0, 240.0, 0.5);
    const auto d = linear_demand(g, 240.0, -0.01);
    std::vector<HourCurve> hours;
    const std::chrono::sys_seconds start = std::chrono::sys_days{std::chrono::year{2017} / 1 / 1} - std::chrono::hours{1};
    for (int h = 0; h < 8760; ++h) {
        const auto t = start + std::chrono::hours{h};
        hours.push_back({Timestamp(t, central_european_offset(t)), d});
    }
    const ElasticityConfig cfg;
    const auto rows = analyze(hours, cfg);
    const std::vector<std::pair<AggregateKey, std::size_t>> keys{
        {AggregateKey::HourOfDay, 24}, {AggregateKey::Month, 12}, {AggregateKey::DayOfWeek, 7}};
    for (const auto& [key, n] : keys) {
        const auto t = aggregate(rows, key);
        CHECK(t.cells.size() == n * cfg.points.size());
        std::size_t total = 0;
        for (const auto& c : t.cells) {
            CHECK(c.mean == doctest::Approx(point_elasticity(d, c.probe_price, cfg.h)).epsilon(1e-12));
            total += c.count;
        }
        CHECK(total == rows.size());
    }
}

TEST_CASE("report formats") {
    const auto ts = Timestamp::parse("2017-06-01T12:00:00+02:00");
    std::ostringstream rows;
    write_rows(rows, {{ts, 40.0, -0.01, -0.2, ProbeFlag::Ok}, {ts, 60.0, std::nan(""), std::nan(""), ProbeFlag::OutOfRange}});
    CHECK(rows.str() ==
          "timestamp,probe_price,slope,elasticity,sentinel_flag\n"
          "2017-06-01T12:00:00+02:00,40,-0.01,-0.2,0\n"
          "2017-06-01T12:00:00+02:00,60,nan,nan,2\n");
    std::ostringstream agg;
    write_aggregate(agg, aggregate({{ts, 40.0, -0.01, -0.2, ProbeFlag::Ok}}, AggregateKey::Month));
    CHECK(agg.str() == "month,probe_price,mean_elasticity,count,excluded\n6,40,-0.2,1,0\n");
}

TEST_CASE("elasticity config validation") {
    ElasticityConfig cfg;
    cfg.h = 0.0;
    CHECK_THROWS_AS(analyze({}, cfg), ConfigError);
    cfg = {};
    cfg.points.clear();
    CHECK_THROWS_AS(analyze({}, cfg), ConfigError);
}
