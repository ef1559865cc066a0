#ifndef EISTWIST_SUITES_HPP
#define EISTWIST_SUITES_HPP

// Orchestration of the verification suites: each suite runs one module's
// invariant set against the configured instance, collects machine-readable
// check records, and persists the psi cache between runs.

#include "eistwist/config.hpp"
#include "eistwist/dds.hpp"
#include "eistwist/report.hpp"

namespace eistwist {

// suites: group, psi, eisenstein, fourier, scattering, lambda, all
SuiteReport run_suite(const std::string& name, const RunConfig& cfg);

// kinds: fourier, scattering, lambda-grid; returns the files written
std::vector<std::string> emit_tables(const std::string& kind, const RunConfig& cfg);

// cusp table for the CLI (JSON export of the group module's cusp data)
nlohmann::json cusp_table(int level);

} // namespace eistwist

#endif
