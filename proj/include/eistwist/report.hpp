#ifndef EISTWIST_REPORT_HPP
#define EISTWIST_REPORT_HPP

// Suite reports and table emission. The report payload (suite name, checks,
// overall verdict) is deterministic and byte-stable across warm reruns;
// volatile run data (wall time, cache statistics) goes to a separate meta
// file so the determinism guarantee stays checkable.

#include <string>
#include <vector>

#include "json.hpp"

#include "eistwist/eisenstein.hpp"

namespace eistwist {

struct SuiteReport {
    std::string suite;
    nlohmann::json checks = nlohmann::json::array();
    double wall_seconds = 0.0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;

    bool pass() const;
    nlohmann::json payload() const; // deterministic part only
};

nlohmann::json make_check(const std::string& identity, const std::string& grid_point, cplx lhs,
                          cplx rhs, double residual, double tolerance);
nlohmann::json make_failed_check(const std::string& identity, const std::string& grid_point,
                                 const std::string& error);

// writes <out_dir>/<suite>.report.json and <suite>.meta.json; returns the
// report path
std::string write_suite_report(const std::string& out_dir, const SuiteReport& rep);

struct CsvRow {
    std::string kind;
    int a_index = 0;
    int b_index = 0;
    long long n = 0;
    cplx s{0.0, 0.0};
    cplx value{0.0, 0.0};
    std::string method;
    double error_estimate = 0.0;
};

// columns: kind,a,b,n,re_s,im_s,re_value,im_value,method,error_estimate
void write_csv(const std::string& path, const std::vector<CsvRow>& rows);

// plot-ready triples (x, y, value)
void write_triples_csv(const std::string& path,
                       const std::vector<std::array<double, 3>>& rows);

} // namespace eistwist

#endif
