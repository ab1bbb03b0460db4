#include "fundcurve/config.hpp"

#include "fundcurve/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <sstream>
#include <string>

namespace fundcurve {

namespace pt = boost::property_tree;

namespace {

template <class T>
T get(const pt::ptree::value_type& kv) {
    try {
        return kv.second.get_value<T>();
    } catch (const pt::ptree_bad_data&) {
        throw ConfigError(fmt::format("bad value '{}' for key '{}'", kv.second.data(), kv.first));
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) {
                throw std::invalid_argument(item);
            }
        } catch (const std::logic_error&) {
            throw ConfigError(fmt::format("bad number '{}' in '{}'", item, key));
        }
    }
    return out;
}

}  // namespace

void validate(const OptimizerConfig& c) {
    if (c.max_iters < 1) {
        throw ConfigError("max_iters must be >= 1");
    }
    if (c.n_starts < 1) {
        throw ConfigError("n_starts must be >= 1");
    }
    if (!(c.tolerance > 0.0) || !std::isfinite(c.tolerance)) {
        throw ConfigError("tolerance must be positive");
    }
    if (c.n_resamples != 0 && c.n_resamples < 10) {
        throw ConfigError("n_resamples must be 0 (off) or >= 10");
    }
}

void validate(const ElasticityConfig& c) {
    if (!(c.h > 0.0) || !std::isfinite(c.h)) {
        throw ConfigError("elasticity_h must be positive");
    }
    if (c.points.empty()) {
        throw ConfigError("elasticity probe set is empty");
    }
    for (double p : c.points) {
        if (!std::isfinite(p)) {
            throw ConfigError("elasticity probe price is not finite");
        }
    }
}

RunConfig parse_config(std::istream& in) {
    // The ini reader only knows ';' comments.
    std::stringstream cleaned;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line[first] == '#') {
            continue;
        }
        cleaned << line << '\n';
    }

    pt::ptree tree;
    try {
        pt::read_ini(cleaned, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
    }

    RunConfig c;
    for (const auto& kv : tree) {
        const std::string& k = kv.first;
        if (!kv.second.empty()) {
            throw ConfigError(fmt::format("sections are not supported ([{}])", k));
        }
        if (k == "max_iters") c.optimizer.max_iters = get<int>(kv);
        else if (k == "n_starts") c.optimizer.n_starts = get<int>(kv);
        else if (k == "tolerance") c.optimizer.tolerance = get<double>(kv);
        else if (k == "rng_seed") c.optimizer.rng_seed = get<std::uint64_t>(kv);
        else if (k == "n_resamples") c.optimizer.n_resamples = get<int>(kv);
        else if (k == "grid_band_lo") c.grid.band_lo = get<double>(kv);
        else if (k == "grid_band_hi") c.grid.band_hi = get<double>(kv);
        else if (k == "grid_fine_step") c.grid.fine_step = get<double>(kv);
        else if (k == "grid_coarse_step") c.grid.coarse_step = get<double>(kv);
        else if (k == "grid_hard_lo") c.grid.hard_lo = get<double>(kv);
        else if (k == "grid_hard_hi") c.grid.hard_hi = get<double>(kv);
        else if (k == "elasticity_h") c.elasticity.h = get<double>(kv);
        else if (k == "elasticity_points") c.elasticity.points = parse_list(k, kv.second.data());
        else throw ConfigError(fmt::format("unknown config key '{}'", k));
    }
    validate(c.optimizer);
    validate(c.elasticity);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config file {}", path.string()));
    }
    return parse_config(in);
}

}  // namespace fundcurve
