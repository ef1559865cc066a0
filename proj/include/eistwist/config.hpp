#ifndef EISTWIST_CONFIG_HPP
#define EISTWIST_CONFIG_HPP

// Run configuration: a flat TOML file ([section] headers flatten to
// section.key) plus command-line overrides. Everything a batch run needs is
// pinned here so that reports are reproducible from the config alone.

#include <map>
#include <string>
#include <vector>

#include "eistwist/special.hpp"

namespace eistwist {

struct RunConfig {
    int level = 37;
    std::string newform_source = "internal-oracle"; // or a JSON coefficient file
    std::size_t n_max = 40000;
    double c_ceiling = 8192.0;
    int quadrature_grid = 64;
    std::size_t quadrature_budget = std::size_t{1} << 20;
    int workers = 2;

    double w_re = 2.6, w_im = 0.0;
    std::vector<cplx> s_grid = {{0.5, 0.0},  {-0.5, 0.0}, {1.2, 0.8},  {1.2, -0.8}, {-1.2, 0.8},
                                {-1.2, -0.8}, {2.1, 0.0},  {0.3, 0.2},  {-0.9, 1.1}};
    std::vector<long long> fourier_modes = {1, 2};
    std::vector<double> fourier_s = {2.5, 3.0};

    std::map<std::string, double> tolerances = {
        {"group", 1e-12},    {"psi", 1e-9},      {"eisenstein", 1e-5}, {"fourier", 1e-4},
        {"scattering", 1e-8}, {"lambda", 1e-5},
    };

    std::string out_dir = "out";
    std::string cache_dir = "cache";

    double tolerance_for(const std::string& suite) const;
    void validate() const; // ConfigError on nonsense
};

// TOML subset: key = value with ints, floats, booleans, "strings", and flat
// arrays; [section] prefixes keys with "section."
std::map<std::string, std::string> parse_toml_file(const std::string& path);
RunConfig load_config(const std::string& path); // empty path: defaults
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

} // namespace eistwist

#endif
