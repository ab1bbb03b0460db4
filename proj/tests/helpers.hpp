#pragma once

#include "fundcurve/step_curve.hpp"
#include "fundcurve/synthetic.hpp"
#include "oracle.hpp"

#include <vector>

namespace testing {

inline std::vector<double> prices(const fundcurve::GridPtr& g) {
    return {g->prices().begin(), g->prices().end()};
}

inline oracle::Ticks ticks(const fundcurve::StepCurve& c) {
    oracle::Ticks t;
    for (auto v : c.volumes()) {
        t.push_back(v.ticks());
    }
    return t;
}

inline std::vector<oracle::RawOrder> raw(const fundcurve::OrderBook& book) {
    using fundcurve::Agent;
    std::vector<oracle::RawOrder> out;
    for (const auto& o : book.orders) {
        const char agent = o.agent == Agent::Utility ? 'U' : o.agent == Agent::Retailer ? 'R' : 'S';
        out.push_back({agent, o.side == fundcurve::Side::Buy ? 'B' : 'S', o.price, o.volume.ticks()});
    }
    return out;
}

inline fundcurve::StepCurve curve(const fundcurve::GridPtr& g, fundcurve::Direction d, const oracle::Ticks& t) {
    std::vector<fundcurve::Volume> v;
    for (auto x : t) {
        v.push_back(fundcurve::Volume::from_ticks(x));
    }
    return fundcurve::StepCurve(g, d, std::move(v));
}

inline fundcurve::StepCurve mw_curve(const fundcurve::GridPtr& g, fundcurve::Direction d,
                                     const std::vector<double>& mw) {
    std::vector<fundcurve::Volume> v;
    for (auto x : mw) {
        v.push_back(fundcurve::Volume::from_mw(x));
    }
    return fundcurve::StepCurve(g, d, std::move(v));
}

}  // namespace testing
