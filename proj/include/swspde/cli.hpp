#pragma once

// Command-line front end. Exit codes: 0 success, 1 domain failure
// (certificate or experiment), 2 usage or configuration error.

#include "swspde/certify.hpp"
#include "swspde/config.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace swspde::cli {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitConfig = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

nlohmann::json certificate_json(const certify::Certificate& c);
nlohmann::json partition_json(const certify::Partition& p);

/// Formats a number for human-readable summaries ("0.6667", "1.0").
std::string short_number(double v);

} // namespace swspde::cli
