#pragma once

// Machine-readable outputs: JSON reports with config echo + hash, plot-ready
// CSV tables, and the command dispatcher behind the CLI.

#include <carlab/cauchy.hpp>
#include <carlab/config.hpp>
#include <carlab/scan.hpp>
#include <carlab/subellipticity.hpp>

#include <json.hpp>

#include <map>
#include <string>

namespace carlab {

inline constexpr const char* kToolVersion = "0.1.0";

std::string fnv1a_hex(const std::string& s);

std::string csv_scan(const ScanResult& r);
std::string csv_stability(const StabilityFit& f);
std::string csv_bound_check(const ConvexifiedCheck& c);

nlohmann::json json_certificates(const std::vector<IdentityCertificate>& certs);
nlohmann::json json_bracket(const BracketReport& r);
nlohmann::json json_bound_check(const ConvexifiedCheck& c);
nlohmann::json json_scan(const ScanResult& r);
nlohmann::json json_compare(const CompareReport& r);
nlohmann::json json_stability(const StabilityFit& f);
nlohmann::json json_caccioppoli(const CaccioppoliReport& r);
nlohmann::json json_ucp(const UcpGapReport& r);

struct RunOutput {
    int exit_code = 0;
    nlohmann::json report;                     // full JSON report
    std::map<std::string, std::string> files;  // artifact name -> content (CSV tables)
};

// Validates the config, runs the command, assembles the report. Throws on
// configuration errors (the CLI maps those to exit code 1).
RunOutput run_command(const RunConfig& cfg);

// Writes report + tables into cfg's `out` directory (if set) and returns the
// exit code. With no `out`, the JSON report goes to stdout only.
int run_and_write(const RunConfig& cfg);

}  // namespace carlab
