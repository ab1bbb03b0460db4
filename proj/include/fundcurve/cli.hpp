#pragma once

#include "fundcurve/decomposition.hpp"

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fundcurve::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kInput = 10,          ///< unreadable or malformed input file
    kLookup = 11,         ///< requested hour not in the data
    kDataIntegrity = 12,  ///< well-formed input violating an invariant
    kConfig = 20,
    kNumerical = 30,
    kRoundTrip = 31,  ///< simulate: a book failed its round trip
    kInternal = 40,
};

int exit_code_for(const std::exception& e);

/// Parameters file: CSV header naming at least a0,a1,gamma1,phi1,alpha1,beta1
/// and one data row (the params.csv written by `calibrate`). Throws ParseError.
DecompositionParams read_params(const std::filesystem::path& path);

/// Runs the command line `args` (without the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fundcurve::cli
