#include "fundcurve/data_io.hpp"

#include "fundcurve/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

namespace fundcurve {

using namespace std::chrono;

namespace {

double round6(double x) { return std::round(x * 1e6) / 1e6; }

std::string trim_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') {
        s.pop_back();
    }
    return s;
}

void expect_header(std::istream& in, std::string_view header) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty file", 1);
    }
    line = trim_cr(line);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    if (line != header) {
        throw ParseError(fmt::format("expected header '{}', got '{}'", header, line), 1);
    }
}

Timestamp parse_timestamp(std::string_view field, std::size_t line) {
    try {
        return Timestamp::parse(field);
    } catch (const DataIntegrityError& e) {
        throw ParseError(e.what(), line);
    }
}

struct Point {
    double price;
    Volume volume;
};

StepCurve step_onto(const std::vector<Point>& pts, Direction dir, const GridPtr& grid) {
    std::vector<Volume> v(grid->size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double p = (*grid)[i];
        while (k < pts.size() && pts[k].price <= p) {
            ++k;
        }
        if (k > 0) {
            v[i] = pts[k - 1].volume;
        } else {
            v[i] = dir == Direction::SupplyInverse ? Volume{} : pts.front().volume;
        }
    }
    return StepCurve(grid, dir, std::move(v));
}

struct Block {
    Timestamp ts;
    std::string ts_text;
    std::vector<Point> sup;
    std::vector<Point> dem;
};

MarketSnapshot finish_block(const Block& b, const GridPtr& grid) {
    if (b.sup.empty() || b.dem.empty()) {
        throw DataIntegrityError(fmt::format("{}: missing {} curve", b.ts_text, b.sup.empty() ? "supply" : "demand"));
    }
    for (std::size_t i = 1; i < b.sup.size(); ++i) {
        if (b.sup[i].volume < b.sup[i - 1].volume) {
            throw DataIntegrityError(
                fmt::format("{}: supply volume decreases at price {}", b.ts_text, b.sup[i].price));
        }
    }
    for (std::size_t i = 1; i < b.dem.size(); ++i) {
        if (b.dem[i].volume > b.dem[i - 1].volume) {
            throw DataIntegrityError(
                fmt::format("{}: demand volume increases at price {}", b.ts_text, b.dem[i].price));
        }
    }
    MarketSnapshot s{b.ts, step_onto(b.sup, Direction::SupplyInverse, grid),
                     step_onto(b.dem, Direction::DemandInverse, grid)};
    validate(s);
    return s;
}

void write_breakpoints(std::ostream& out, const std::string& when, char side, const StepCurve& c) {
    const auto& g = *c.grid();
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i == 0 || c.at(i) != c.at(i - 1)) {
            fmt::print(out, "{},{},{},{}\n", when, side, g[i], to_string(c.at(i)));
        }
    }
}

}  // namespace

std::vector<std::string_view> split_csv(std::string_view line) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double(std::string_view field, std::size_t line) {
    while (!field.empty() && field.front() == ' ') {
        field.remove_prefix(1);
    }
    while (!field.empty() && field.back() == ' ') {
        field.remove_suffix(1);
    }
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw ParseError(fmt::format("bad number '{}'", field), line);
    }
    return v;
}

GridPtr build_grid(double band_lo, double band_hi, double fine_step, double coarse_step, double hard_lo,
                   double hard_hi) {
    for (double x : {band_lo, band_hi, fine_step, coarse_step, hard_lo, hard_hi}) {
        if (!std::isfinite(x)) {
            throw ConfigError("grid parameters must be finite");
        }
    }
    if (!(fine_step > 0.0) || !(coarse_step > 0.0)) {
        throw ConfigError("grid steps must be positive");
    }
    if (!(hard_lo <= band_lo && band_lo < band_hi && band_hi <= hard_hi)) {
        throw ConfigError(fmt::format("need hard_lo <= band_lo < band_hi <= hard_hi, got {} {} {} {}", hard_lo,
                                      band_lo, band_hi, hard_hi));
    }
    constexpr double eps = 1e-9;
    std::vector<double> p;
    for (long k = 0;; ++k) {
        const double x = round6(hard_lo + static_cast<double>(k) * coarse_step);
        if (x >= band_lo - eps) {
            break;
        }
        p.push_back(x);
    }
    for (long k = 0;; ++k) {
        const double x = round6(band_lo + static_cast<double>(k) * fine_step);
        if (x > band_hi + eps) {
            break;
        }
        p.push_back(std::abs(x - band_hi) <= eps ? band_hi : x);
    }
    if (p.back() < band_hi) {
        p.push_back(band_hi);
    }
    for (long k = 1;; ++k) {
        const double x = round6(band_hi + static_cast<double>(k) * coarse_step);
        if (x >= hard_hi - eps) {
            break;
        }
        p.push_back(x);
    }
    if (p.back() < hard_hi) {
        p.push_back(hard_hi);
    }
    return make_grid(std::move(p));
}

GridPtr build_grid(const GridConfig& c) {
    return build_grid(c.band_lo, c.band_hi, c.fine_step, c.coarse_step, c.hard_lo, c.hard_hi);
}

std::vector<MarketSnapshot> parse_curves(std::istream& in, const GridPtr& grid) {
    expect_header(in, "timestamp,side,price,cumulative_volume");
    std::vector<MarketSnapshot> out;
    std::optional<Block> block;
    std::string line;
    std::size_t line_no = 1;
    char last_side = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 4) {
            throw ParseError(fmt::format("expected 4 fields, got {}", f.size()), line_no);
        }
        if (f[1] != "S" && f[1] != "D") {
            throw ParseError(fmt::format("side must be S or D, got '{}'", f[1]), line_no);
        }
        const char side = f[1][0];
        const double price = parse_double(f[2], line_no);
        const double mw = parse_double(f[3], line_no);

        if (!block || f[0] != block->ts_text) {
            const Timestamp ts = parse_timestamp(f[0], line_no);
            if (block) {
                if (!(block->ts < ts)) {
                    throw DataIntegrityError(
                        fmt::format("line {}: timestamp {} not after {}", line_no, f[0], block->ts_text));
                }
                out.push_back(finish_block(*block, grid));
            }
            block = Block{ts, std::string(f[0]), {}, {}};
            last_side = 0;
        }
        if (mw < 0.0) {
            throw DataIntegrityError(fmt::format("{}: negative volume at line {}", block->ts_text, line_no));
        }
        auto& pts = side == 'S' ? block->sup : block->dem;
        if (side != last_side && !pts.empty()) {
            throw DataIntegrityError(fmt::format("{}: side {} rows are not contiguous (line {})", block->ts_text,
                                                 side, line_no));
        }
        last_side = side;
        if (!pts.empty() && !(price > pts.back().price)) {
            throw DataIntegrityError(
                fmt::format("{}: prices not increasing at line {}", block->ts_text, line_no));
        }
        pts.push_back({price, Volume::from_mw(mw)});
    }
    if (block) {
        out.push_back(finish_block(*block, grid));
    }
    return out;
}

std::vector<MarketSnapshot> read_curves(const std::filesystem::path& path, const GridPtr& grid) {
    std::ifstream in(path);
    if (!in) {
        throw InputError(fmt::format("cannot open curve file {}", path.string()));
    }
    return parse_curves(in, grid);
}

void write_curves(std::ostream& out, const std::vector<MarketSnapshot>& snapshots) {
    out << "timestamp,side,price,cumulative_volume\n";
    for (const auto& s : snapshots) {
        const std::string when = s.timestamp.to_string();
        write_breakpoints(out, when, 'D', s.wdem);
        write_breakpoints(out, when, 'S', s.wsup);
    }
}

std::vector<LoadRecord> parse_load(std::istream& in) {
    expect_header(in, "timestamp,load_mw");
    std::vector<LoadRecord> out;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 2) {
            throw ParseError(fmt::format("expected 2 fields, got {}", f.size()), line_no);
        }
        LoadRecord r{parse_timestamp(f[0], line_no), parse_double(f[1], line_no)};
        if (!(r.load > 0.0)) {
            throw DataIntegrityError(fmt::format("{}: load must be positive", f[0]));
        }
        out.push_back(r);
    }
    return out;
}

HourlyLoad load_hourly(const std::vector<LoadRecord>& q) {
    for (std::size_t i = 1; i < q.size(); ++i) {
        if (q[i].timestamp.utc() - q[i - 1].timestamp.utc() != minutes{15}) {
            throw DataIntegrityError(fmt::format("gap in quarter-hour load between {} and {}",
                                                 q[i - 1].timestamp.to_string(), q[i].timestamp.to_string()));
        }
    }
    HourlyLoad out;
    std::size_t i = 0;
    while (i < q.size()) {
        const auto hour = floor<hours>(q[i].timestamp.utc());
        std::size_t j = i;
        while (j < q.size() && floor<hours>(q[j].timestamp.utc()) == hour) {
            ++j;
        }
        if (j - i == 4) {
            const double mean = (q[i].load + q[i + 1].load + q[i + 2].load + q[i + 3].load) / 4.0;
            out.records.push_back({Timestamp(hour, q[i].timestamp.offset_minutes()), mean});
        } else {
            out.dropped_quarters += j - i;
        }
        i = j;
    }
    return out;
}

HourlyLoad load_hourly(std::istream& in) { return load_hourly(parse_load(in)); }

HourlyLoad read_load_hourly(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError(fmt::format("cannot open load file {}", path.string()));
    }
    return load_hourly(in);
}

std::vector<LoadRecord> dst_adjust(const std::vector<LoadRecord>& r) {
    std::vector<LoadRecord> out;
    out.reserve(r.size() + 1);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i == 0) {
            out.push_back(r[i]);
            continue;
        }
        const Timestamp& prev = r[i - 1].timestamp;
        const Timestamp& cur = r[i].timestamp;
        const auto wall = cur.local() - prev.local();
        const bool offset_changed = cur.offset_minutes() != prev.offset_minutes();
        if (wall == hours{1}) {
            out.push_back(r[i]);
        } else if (wall == hours{2} && offset_changed && cur.utc() - prev.utc() == hours{1}) {
            if (i < 2 || i + 1 >= r.size()) {
                throw DataIntegrityError(
                    fmt::format("spring clock change at {} lacks two neighbours on each side", cur.to_string()));
            }
            const double mean = (r[i - 2].load + r[i - 1].load + r[i].load + r[i + 1].load) / 4.0;
            out.push_back({Timestamp(prev.utc() + hours{1}, prev.offset_minutes()), mean});
            out.push_back(r[i]);
        } else if (wall == hours{0} && offset_changed && cur.utc() - prev.utc() == hours{1}) {
            out.back().load = (r[i - 1].load + r[i].load) / 2.0;
        } else {
            throw DataIntegrityError(
                fmt::format("malformed clock change between {} and {}", prev.to_string(), cur.to_string()));
        }
    }
    return out;
}

void write_load(std::ostream& out, const std::vector<LoadRecord>& records) {
    out << "timestamp,load_mw\n";
    for (const auto& r : records) {
        fmt::print(out, "{},{}\n", r.timestamp.to_string(), r.load);
    }
}

}  // namespace fundcurve
