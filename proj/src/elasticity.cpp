#include "fundcurve/elasticity.hpp"

#include "fundcurve/errors.hpp"
#include "fundcurve/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <map>
#include <ostream>

namespace fundcurve {

namespace {

constexpr double kTickSlack = 1e-6;  // in ticks, absorbs binary noise in v +- h

int key_of(const Timestamp& ts, AggregateKey key) {
    switch (key) {
        case AggregateKey::HourOfDay: return ts.hour_of_day();
        case AggregateKey::Month: return static_cast<int>(ts.month());
        case AggregateKey::DayOfWeek: return static_cast<int>(ts.iso_weekday());
    }
    return 0;
}

}  // namespace

double forward_demand(const StepCurve& fdem, double mw) {
    if (fdem.direction() != Direction::DemandInverse) {
        throw IncompatibleCurves("forward_demand expects a demand curve");
    }
    const double t = mw * static_cast<double>(Volume::kTicksPerMw);
    const double lo = static_cast<double>(fdem.at(fdem.size() - 1).ticks());
    const double hi = static_cast<double>(fdem.at(0).ticks());
    if (!(t >= lo - kTickSlack) || !(t <= hi + kTickSlack)) {
        throw OutOfRange(fmt::format("volume {} MW outside the demand range [{}, {}]", mw,
                                     to_string(fdem.at(fdem.size() - 1)), to_string(fdem.at(0))));
    }
    const auto v = fdem.volumes();
    const auto it = std::partition_point(
        v.begin(), v.end(), [&](Volume x) { return static_cast<double>(x.ticks()) > t + kTickSlack; });
    return (*fdem.grid())[static_cast<std::size_t>(it - v.begin())];
}

double slope(const StepCurve& fdem, double p, double h) {
    if (!(h > 0.0)) {
        throw DomainError(fmt::format("slope needs h > 0, got {}", h));
    }
    const double v = eval_inverse(fdem, p).mw();
    return (forward_demand(fdem, v + h) - forward_demand(fdem, v - h)) / (2.0 * h);
}

double point_elasticity(const StepCurve& fdem, double p, double h) {
    const Volume v = eval_inverse(fdem, p);
    if (v <= Volume{}) {
        throw DomainError(fmt::format("no demand at price {}", p));
    }
    if (p == 0.0) {
        return 0.0;
    }
    const double ls = slope(fdem, p, h);
    if (ls == 0.0) {
        return kInfiniteElasticity;
    }
    return (p / v.mw()) / ls;
}

std::vector<ElasticityRow> analyze(const std::vector<HourCurve>& hours, const ElasticityConfig& config) {
    validate(config);
    const std::size_t np = config.points.size();
    std::vector<ElasticityRow> rows(hours.size() * np);
    parallel_for(hours.size(), [&](std::size_t i) {
        for (std::size_t k = 0; k < np; ++k) {
            ElasticityRow& r = rows[i * np + k];
            r.timestamp = hours[i].timestamp;
            r.probe_price = config.points[k];
            try {
                r.slope = slope(hours[i].fdem, r.probe_price, config.h);
                r.elasticity = point_elasticity(hours[i].fdem, r.probe_price, config.h);
                r.flag = r.elasticity == kInfiniteElasticity ? ProbeFlag::ZeroSlope : ProbeFlag::Ok;
            } catch (const OutOfRange&) {
                r.slope = std::nan("");
                r.elasticity = std::nan("");
                r.flag = ProbeFlag::OutOfRange;
            } catch (const DomainError&) {
                r.slope = std::nan("");
                r.elasticity = std::nan("");
                r.flag = ProbeFlag::OutOfRange;
            }
        }
    });
    return rows;
}

const char* to_string(AggregateKey k) {
    switch (k) {
        case AggregateKey::HourOfDay: return "hour";
        case AggregateKey::Month: return "month";
        case AggregateKey::DayOfWeek: return "weekday";
    }
    return "?";
}

AggregateTable aggregate(const std::vector<ElasticityRow>& rows, AggregateKey key) {
    struct Acc {
        double sum = 0.0;
        std::size_t count = 0;
        std::size_t excluded = 0;
    };
    std::map<std::pair<int, double>, Acc> acc;
    AggregateTable table;
    table.key = key;
    std::size_t used = 0;
    for (const auto& r : rows) {
        Acc& a = acc[{key_of(r.timestamp, key), r.probe_price}];
        if (r.flag != ProbeFlag::Ok) {
            ++a.excluded;
            ++table.excluded;
            continue;
        }
        a.sum += r.elasticity;
        ++a.count;
        ++used;
    }
    if (used == 0) {
        throw EmptyAggregate(fmt::format("no usable elasticity rows for the {} table ({} excluded)",
                                         to_string(key), table.excluded));
    }
    for (const auto& [k, a] : acc) {
        table.cells.push_back({k.first, k.second, a.count > 0 ? a.sum / static_cast<double>(a.count) : std::nan(""),
                               a.count, a.excluded});
    }
    return table;
}

void write_rows(std::ostream& out, const std::vector<ElasticityRow>& rows) {
    out << "timestamp,probe_price,slope,elasticity,sentinel_flag\n";
    for (const auto& r : rows) {
        fmt::print(out, "{},{},{},{},{}\n", r.timestamp.to_string(), r.probe_price, r.slope, r.elasticity,
                   static_cast<int>(r.flag));
    }
}

void write_aggregate(std::ostream& out, const AggregateTable& t) {
    fmt::print(out, "{},probe_price,mean_elasticity,count,excluded\n", to_string(t.key));
    for (const auto& c : t.cells) {
        fmt::print(out, "{},{},{},{},{}\n", c.key, c.probe_price, c.mean, c.count, c.excluded);
    }
}

}  // namespace fundcurve
