#include "fundcurve/cli.hpp"

#include "fundcurve/calibration.hpp"
#include "fundcurve/config.hpp"
#include "fundcurve/data_io.hpp"
#include "fundcurve/elasticity.hpp"
#include "fundcurve/errors.hpp"
#include "fundcurve/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

namespace fundcurve::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0   success\n"
    "  2   bad command line\n"
    "  10  input file missing or malformed\n"
    "  11  requested timestamp not found\n"
    "  12  input data violates an invariant (non-monotone curve, load gap, ...)\n"
    "  20  configuration error\n"
    "  30  numerical failure (no equilibrium, degenerate fit, ...)\n"
    "  31  simulate: at least one book failed its round trip\n"
    "  40  internal error";

// Grid of the curves written by `simulate`, in config-file form.
constexpr const char* kSyntheticGridConfig =
    "# grid of the generated curves\n"
    "grid_band_lo = -20\n"
    "grid_band_hi = 100\n"
    "grid_fine_step = 0.5\n"
    "grid_coarse_step = 20\n"
    "grid_hard_lo = -100\n"
    "grid_hard_hi = 300\n";

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw InputError(fmt::format("cannot write {}", path.string()));
    }
    return f;
}

RunConfig read_config(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

void write_params_header(std::ostream& out) { out << "a0,a1,gamma1,phi1,alpha1,beta1,theta0,theta1,sse\n"; }

void write_params_row(std::ostream& out, const DecompositionParams& p, double theta0, double theta1, double sse) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", p.a0, p.a1, p.gamma1, p.phi1, p.alpha1, p.beta1, theta0, theta1,
               sse);
}

struct Session {
    std::string command;
    fs::path out_dir;
    json manifest;
    std::vector<std::string> outputs;

    std::ofstream create(const std::string& name) {
        outputs.push_back(name);
        return open_out(out_dir / name);
    }
};

void prepare_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw InputError(fmt::format("cannot create output directory {}", dir.string()));
    }
}

// Loads joined to the curve hours by timestamp; a curve hour without a load is an error.
std::vector<double> join_loads(const std::vector<MarketSnapshot>& snaps, const std::vector<LoadRecord>& loads) {
    std::map<Timestamp, double> by_ts;
    for (const auto& r : loads) {
        by_ts[r.timestamp] = r.load;
    }
    std::vector<double> out;
    out.reserve(snaps.size());
    for (const auto& s : snaps) {
        const auto it = by_ts.find(s.timestamp);
        if (it == by_ts.end()) {
            throw DataIntegrityError(fmt::format("no load for curve hour {}", s.timestamp.to_string()));
        }
        out.push_back(it->second);
    }
    return out;
}

struct CalibrateArgs {
    std::string curves, load, config, out;
    std::optional<std::uint64_t> seed;
};

void cmd_calibrate(const CalibrateArgs& a, Session& s, std::ostream& out) {
    RunConfig cfg = read_config(a.config);
    if (a.seed) {
        cfg.optimizer.rng_seed = *a.seed;
    }
    validate(cfg.optimizer);
    s.manifest["seed"] = cfg.optimizer.rng_seed;
    const GridPtr grid = build_grid(cfg.grid);
    CalibrationProblem problem;
    problem.snapshots = read_curves(a.curves, grid);
    const HourlyLoad hourly = read_load_hourly(a.load);
    problem.loads = join_loads(problem.snapshots, dst_adjust(hourly.records));

    const CalibrationResult r = calibrate(problem, cfg.optimizer);

    auto params = s.create("params.csv");
    write_params_header(params);
    write_params_row(params, r.params, r.theta0, r.theta1, r.sse);

    auto series = s.create("series.csv");
    series << "timestamp,v_W,v_C,v_F,load\n";
    for (std::size_t i = 0; i < problem.snapshots.size(); ++i) {
        fmt::print(series, "{},{},{},{},{}\n", problem.snapshots[i].timestamp.to_string(), r.v_W_series[i],
                   r.v_C_series[i], r.v_F_series[i], problem.loads[i]);
    }

    const Correlations& c = r.correlations;
    const bool ordered = c.load_vW < c.load_vC && c.load_vC < c.load_vF;
    auto corr = s.create("correlations.csv");
    corr << "pair,correlation\n";
    fmt::print(corr, "load_vW,{}\nload_vC,{}\nload_vF,{}\n", c.load_vW, c.load_vC, c.load_vF);

    if (r.per_param_se) {
        auto se = s.create("se.csv");
        se << "a0,a1,gamma1,phi1,alpha1,beta1\n";
        const auto& v = *r.per_param_se;
        fmt::print(se, "{},{},{},{},{},{}\n", v[0], v[1], v[2], v[3], v[4], v[5]);
    }

    fmt::print(out, "hours {} (failed {}, load quarters dropped {})\n", problem.snapshots.size(), r.failed_hours,
               hourly.dropped_quarters);
    fmt::print(out, "params {}\n", to_string(r.params));
    fmt::print(out, "theta0 {:.4f} theta1 {:.6f} sse {:.6g} converged {} evaluations {}\n", r.theta0, r.theta1, r.sse,
               r.converged, r.evaluations);
    fmt::print(out, "corr(load,v_W) {:.4f} corr(load,v_C) {:.4f} corr(load,v_F) {:.4f} ordering W<C<F {}\n",
               c.load_vW, c.load_vC, c.load_vF, ordered ? "holds" : "violated");
    s.manifest["results"] = {{"sse", r.sse},
                             {"failed_hours", r.failed_hours},
                             {"correlation_order_holds", ordered},
                             {"evaluations", r.evaluations}};
}

struct DecomposeArgs {
    std::string curves, params, timestamp, config, out;
};

void cmd_decompose(const DecomposeArgs& a, Session& s, std::ostream& out) {
    const RunConfig cfg = read_config(a.config);
    const DecompositionParams params = read_params(a.params);
    Timestamp when;
    try {
        when = Timestamp::parse(a.timestamp);
    } catch (const DataIntegrityError& e) {
        throw InputError(fmt::format("--timestamp: {}", e.what()));
    }
    const auto snaps = read_curves(a.curves, build_grid(cfg.grid));
    const auto it = std::find_if(snaps.begin(), snaps.end(), [&](const MarketSnapshot& m) { return m.timestamp == when; });
    if (it == snaps.end()) {
        throw LookupError(fmt::format("timestamp {} not in {}", when.to_string(), a.curves));
    }
    const DecompositionResult r = decompose(*it, params);

    auto curves = s.create("curves.csv");
    curves << "price,wsup,wdem,sup0,dem0,wsup1,wdem1,fsup1,fdem1,fsup,fdem\n";
    const auto& g = *it->wsup.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        fmt::print(curves, "{},{},{},{},{},{},{},{},{},{},{}\n", g[i], to_string(it->wsup.at(i)),
                   to_string(it->wdem.at(i)), to_string(r.sup0.at(i)), to_string(r.dem0.at(i)),
                   to_string(r.wsup1.at(i)), to_string(r.wdem1.at(i)), to_string(r.fsup1.at(i)),
                   to_string(r.fdem1.at(i)), to_string(r.fsup.at(i)), to_string(r.fdem.at(i)));
    }
    auto summary = s.create("summary.csv");
    summary << "key,value\n";
    fmt::print(summary, "timestamp,{}\n", when.to_string());
    fmt::print(summary, "p_U,{}\npu_clamped,{}\npu_below_market,{}\n", r.p_U, r.pu_clamped, r.pu_below_market);
    fmt::print(summary, "p_W,{}\nv_W,{}\n", r.wm_eq.price, to_string(r.wm_eq.volume));
    fmt::print(summary, "p_F,{}\nv_F,{}\nv_C,{}\n", r.fm_eq.price, to_string(r.fm_eq.volume), to_string(r.v_C));
    fmt::print(summary, "tau1,{}\nvolume_gap,{}\n", to_string(r.tau1), to_string(volume_gap(r)));

    fmt::print(out, "{}: p_U {} | WM ({}, {} MW) | FM ({}, {} MW) | v_C {} MW | tau1 {} MW\n", when.to_string(), r.p_U,
               r.wm_eq.price, to_string(r.wm_eq.volume), r.fm_eq.price, to_string(r.fm_eq.volume), to_string(r.v_C),
               to_string(r.tau1));
}

struct ElasticityArgs {
    std::string curves, params, config, out;
};

void cmd_elasticity(const ElasticityArgs& a, Session& s, std::ostream& out) {
    const RunConfig cfg = read_config(a.config);
    validate(cfg.elasticity);
    const DecompositionParams params = read_params(a.params);
    const auto snaps = read_curves(a.curves, build_grid(cfg.grid));

    std::vector<HourCurve> hours;
    std::size_t failed = 0;
    for (const auto& snap : snaps) {
        try {
            hours.push_back({snap.timestamp, decompose_fm_only(snap, params).fdem});
        } catch (const NoEquilibrium&) {
            ++failed;
        } catch (const DomainError&) {
            ++failed;
        }
    }
    const auto rows = analyze(hours, cfg.elasticity);
    {
        auto f = s.create("elasticity.csv");
        write_rows(f, rows);
    }
    std::size_t excluded = 0;
    for (const AggregateKey key : {AggregateKey::HourOfDay, AggregateKey::Month, AggregateKey::DayOfWeek}) {
        const AggregateTable t = aggregate(rows, key);
        excluded = t.excluded;
        auto f = s.create(fmt::format("elasticity_{}.csv", to_string(key)));
        write_aggregate(f, t);
    }
    std::size_t zero_slope = 0;
    std::size_t out_of_range = 0;
    for (const auto& r : rows) {
        zero_slope += r.flag == ProbeFlag::ZeroSlope;
        out_of_range += r.flag == ProbeFlag::OutOfRange;
    }
    fmt::print(out, "hours {} (failed to decompose {}), rows {}, excluded {} (zero slope {}, out of range {})\n",
               hours.size(), failed, rows.size(), excluded, zero_slope, out_of_range);
    s.manifest["results"] = {{"hours", hours.size()},
                             {"failed_hours", failed},
                             {"rows", rows.size()},
                             {"excluded_zero_slope", zero_slope},
                             {"excluded_out_of_range", out_of_range}};
}

struct SimulateArgs {
    std::uint64_t seed = 1;
    int n_books = 100;
    int problem_days = 0;
    std::string out;
};

// Quarter-hour loads whose hourly means (after dst_adjust) equal the problem
// loads, except the spring hour that dst_adjust imputes from its neighbours.
std::vector<LoadRecord> problem_quarters(const SyntheticProblem& p) {
    using namespace std::chrono;
    std::map<local_seconds, double> by_wall;
    for (std::size_t i = 0; i < p.snapshots.size(); ++i) {
        by_wall[p.snapshots[i].timestamp.local()] = p.loads[i];
    }
    const sys_seconds first = p.snapshots.front().timestamp.utc();
    const sys_seconds last = p.snapshots.back().timestamp.utc();
    std::vector<LoadRecord> q;
    for (sys_seconds t = first; t <= last; t += hours{1}) {
        const Timestamp hour(t, central_european_offset(t));
        const auto it = by_wall.find(hour.local());
        if (it == by_wall.end()) {
            throw DataIntegrityError(fmt::format("no synthetic load for {}", hour.to_string()));
        }
        for (int k = 0; k < 4; ++k) {
            const sys_seconds tq = t + minutes{15 * k};
            q.push_back({Timestamp(tq, central_european_offset(tq)), it->second});
        }
    }
    return q;
}

bool cmd_simulate(const SimulateArgs& a, Session& s, std::ostream& out) {
    if (a.n_books < 1) {
        throw ConfigError("--n-books must be at least 1");
    }
    if (a.problem_days < 0) {
        throw ConfigError("--problem-days must be non-negative");
    }
    s.manifest["seed"] = a.seed;
    const GridPtr grid = synthetic_grid();
    const auto hours = market_hours(2017, 1, 1, (a.n_books + 23) / 24);
    std::mt19937_64 rng(a.seed);

    std::vector<MarketSnapshot> wm;
    auto orders = s.create("orders.csv");
    write_orders_header(orders);
    auto clear = s.create("clearings.csv");
    clear << "timestamp,asd_price,asd_volume,wm_price,wm_volume,fm_price,fm_volume,"
             "a0,a1,gamma1,phi1,alpha1,beta1,round_trip\n";
    int failures = 0;
    for (int i = 0; i < a.n_books; ++i) {
        const Timestamp& ts = hours[static_cast<std::size_t>(i)];
        const GeneratedBook gb = random_book(rng(), RandomBookConfig{}, grid);
        const Clearing asd = clear_asd(gb.book, grid);
        const Clearing wmc = clear_wm(gb.book, grid);
        wm.push_back({ts, wmc.sup, wmc.dem});
        const DecompositionResult r = decompose(wm.back(), gb.params);
        const bool ok = r.fm_eq.volume == asd.eq.volume && r.fm_eq.price == asd.eq.price &&
                        wmc.eq.price == asd.eq.price && wmc.eq.volume <= asd.eq.volume;
        failures += !ok;
        write_orders(orders, ts, gb.book);
        const auto& p = gb.params;
        fmt::print(clear, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", ts.to_string(), asd.eq.price,
                   to_string(asd.eq.volume), wmc.eq.price, to_string(wmc.eq.volume), r.fm_eq.price,
                   to_string(r.fm_eq.volume), p.a0, p.a1, p.gamma1, p.phi1, p.alpha1, p.beta1, ok ? "ok" : "FAIL");
    }
    {
        auto f = s.create("wm_curves.csv");
        write_curves(f, wm);
    }
    {
        auto f = s.create("config.ini");
        f << kSyntheticGridConfig;
    }
    fmt::print(out, "books {}: round trip {} ok, {} failed\n", a.n_books, a.n_books - failures, failures);

    if (a.problem_days > 0) {
        SyntheticProblemConfig pc;
        pc.days = a.problem_days;
        pc.seed = a.seed;
        const SyntheticProblem p = make_synthetic_problem(pc, grid);
        {
            auto f = s.create("problem_curves.csv");
            write_curves(f, p.snapshots);
        }
        {
            auto f = s.create("problem_load.csv");
            write_load(f, problem_quarters(p));
        }
        {
            auto f = s.create("problem_params.csv");
            write_params_header(f);
            write_params_row(f, pc.params, pc.theta0, pc.theta1, 0.0);
        }
        fmt::print(out, "calibration problem: {} hours, true params {}\n", p.snapshots.size(), to_string(pc.params));
    }
    s.manifest["results"] = {{"books", a.n_books}, {"round_trip_failures", failures}};
    return failures == 0;
}

void write_manifest(Session& s, const std::vector<std::string>& args, int code, const std::string& error,
                    double seconds) {
    if (s.out_dir.empty() || !fs::is_directory(s.out_dir)) {
        return;
    }
    json& m = s.manifest;
    m["command"] = s.command;
    m["tool_version"] = kVersion;
    m["args"] = args;
    m["out"] = s.out_dir.string();
    m["outputs"] = s.outputs;
    m["exit_code"] = code;
    if (!error.empty()) {
        m["error"] = error;
    }
    m["duration_seconds"] = seconds;
    std::ofstream f(s.out_dir / "manifest.json", std::ios::binary);
    f << m.dump(2) << '\n';
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const LookupError*>(&e)) {
        return kLookup;
    }
    if (dynamic_cast<const DataIntegrityError*>(&e)) {
        return kDataIntegrity;
    }
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->error_class()) {
            case ErrorClass::Input: return kInput;
            case ErrorClass::Config: return kConfig;
            case ErrorClass::Numerical: return kNumerical;
            case ErrorClass::Internal: return kInternal;
        }
    }
    return kInternal;
}

DecompositionParams read_params(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError(fmt::format("cannot open params file {}", path.string()));
    }
    std::string header, row;
    if (!std::getline(in, header)) {
        throw ParseError("empty params file", 1);
    }
    if (!std::getline(in, row) || split_csv(row).size() < 2) {
        throw ParseError("params file has no data row", 2);
    }
    const auto names = split_csv(header);
    const auto values = split_csv(row);
    if (names.size() != values.size()) {
        throw ParseError(fmt::format("{} columns in header, {} in data row", names.size(), values.size()), 2);
    }
    const auto field = [&](std::string_view name) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) {
                return parse_double(values[i], 2);
            }
        }
        throw ParseError(fmt::format("params file lacks column '{}'", name), 1);
    };
    DecompositionParams p{field("a0"), field("a1"), field("gamma1"), field("phi1"), field("alpha1"), field("beta1")};
    try {
        validate(p);
    } catch (const ConfigError& e) {
        throw ParseError(e.what(), 2);
    }
    return p;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fundamental supply and demand curves from wholesale auction curves"};
    app.footer(kExitCodes);
    app.require_subcommand(1);

    CalibrateArgs ca;
    auto* cal = app.add_subcommand("calibrate", "Fit decomposition parameters against hourly load");
    cal->add_option("--curves", ca.curves, "Curve CSV (timestamp,side,price,cumulative_volume)")->required();
    cal->add_option("--load", ca.load, "Quarter-hour load CSV (timestamp,load_mw)")->required();
    cal->add_option("--config", ca.config, "Config file (key = value)");
    cal->add_option("--out", ca.out, "Output directory")->required();
    cal->add_option("--seed", ca.seed, "Overrides rng_seed from the config");

    DecomposeArgs da;
    auto* dec = app.add_subcommand("decompose", "Dump every curve of one hour's decomposition");
    dec->add_option("--curves", da.curves, "Curve CSV")->required();
    dec->add_option("--params", da.params, "Params CSV as written by calibrate")->required();
    dec->add_option("--timestamp", da.timestamp, "Hour to decompose, ISO-8601 with offset")->required();
    dec->add_option("--config", da.config, "Config file (grid keys)");
    dec->add_option("--out", da.out, "Output directory")->required();

    ElasticityArgs ea;
    auto* ela = app.add_subcommand("elasticity", "Slopes and elasticities of the fundamental demand curve");
    ela->add_option("--curves", ea.curves, "Curve CSV")->required();
    ela->add_option("--params", ea.params, "Params CSV as written by calibrate")->required();
    ela->add_option("--config", ea.config, "Config file (grid and elasticity keys)");
    ela->add_option("--out", ea.out, "Output directory")->required();

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Random three-agent books, their clearings and round trips");
    sim->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
    sim->add_option("--n-books", sa.n_books, "Number of books")->capture_default_str();
    sim->add_option("--problem-days", sa.problem_days,
                    "Also write a noise-free calibration bundle of this many days")
        ->capture_default_str();
    sim->add_option("--out", sa.out, "Output directory")->required();

    std::vector<std::string> argv_store{"fundcurve"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    Session s;
    const auto start = std::chrono::steady_clock::now();
    int code = kOk;
    std::string error;
    try {
        if (cal->parsed()) {
            s = {"calibrate", ca.out, {{"inputs", {{"curves", ca.curves}, {"load", ca.load}}}, {"config", ca.config}}, {}};
            prepare_out_dir(s.out_dir);
            cmd_calibrate(ca, s, out);
        } else if (dec->parsed()) {
            s = {"decompose", da.out,
                 {{"inputs", {{"curves", da.curves}, {"params", da.params}}}, {"config", da.config}, {"timestamp", da.timestamp}},
                 {}};
            prepare_out_dir(s.out_dir);
            cmd_decompose(da, s, out);
        } else if (ela->parsed()) {
            s = {"elasticity", ea.out, {{"inputs", {{"curves", ea.curves}, {"params", ea.params}}}, {"config", ea.config}}, {}};
            prepare_out_dir(s.out_dir);
            cmd_elasticity(ea, s, out);
        } else if (sim->parsed()) {
            s = {"simulate", sa.out, {{"n_books", sa.n_books}, {"problem_days", sa.problem_days}}, {}};
            prepare_out_dir(s.out_dir);
            if (!cmd_simulate(sa, s, out)) {
                code = kRoundTrip;
                error = "round trip failed for at least one book";
            }
        }
    } catch (const std::exception& e) {
        code = exit_code_for(e);
        error = e.what();
        fmt::print(err, "error: {}\n", e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        write_manifest(s, args, code, error, seconds);
    } catch (const std::exception& e) {
        fmt::print(err, "error writing manifest: {}\n", e.what());
        if (code == kOk) {
            code = kInput;
        }
    }
    return code;
}

}  // namespace fundcurve::cli
