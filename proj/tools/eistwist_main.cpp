// eistwist: batch front end for the twisted Eisenstein / double Dirichlet
// series laboratory. Verification suites write JSON reports and CSV tables;
// the psi cache persists between runs. Exit codes: 0 all checks pass, 1 a
// check failed, 2 configuration or runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "eistwist/suites.hpp"

using namespace eistwist;

namespace {

struct Flags {
    std::string config_path;
    int level = -1;
    double tolerance = -1.0;
    std::string grid;
    std::string out_dir;
    std::string cache_dir;
    std::string newform;
    int workers = -1;
    long long n_max = -1;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config_path, "TOML configuration file");
    cmd->add_option("--level", f.level, "level N (squarefree)");
    cmd->add_option("--tolerance", f.tolerance, "override every suite tolerance");
    cmd->add_option("--grid", f.grid, "s grid as re,im;re,im;...");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--cache", f.cache_dir, "cache directory");
    cmd->add_option("--workers", f.workers, "worker thread count");
    cmd->add_option("--nmax", f.n_max, "newform truncation length");
    cmd->add_option("--newform", f.newform, "newform source: internal-oracle or a JSON file");
}

RunConfig make_config(const Flags& f) {
    RunConfig cfg = load_config(f.config_path);
    if (f.level > 0) cfg.level = f.level;
    if (f.tolerance > 0.0)
        for (auto& [k, v] : cfg.tolerances) v = f.tolerance;
    if (!f.grid.empty()) apply_override(cfg, "s_grid", f.grid);
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (!f.cache_dir.empty()) cfg.cache_dir = f.cache_dir;
    if (f.workers > 0) cfg.workers = f.workers;
    if (f.n_max > 0) cfg.n_max = static_cast<std::size_t>(f.n_max);
    if (!f.newform.empty()) cfg.newform_source = f.newform;
    cfg.validate();
    return cfg;
}

int cmd_run(const std::string& suite, const RunConfig& cfg) {
    SuiteReport rep = run_suite(suite, cfg);
    for (const auto& c : rep.checks) {
        std::printf("[%s] %-38s %-36s residual %.3e  tol %.1e\n",
                    c.value("pass", false) ? "PASS" : "FAIL",
                    c.value("identity", std::string("?")).c_str(),
                    c.value("grid_point", std::string("")).c_str(), c.value("residual", 0.0),
                    c.value("tolerance", 0.0));
        if (c.contains("error"))
            std::printf("       error: %s\n", c["error"].get<std::string>().c_str());
    }
    std::string path = write_suite_report(cfg.out_dir, rep);
    std::printf("%s: %s  (%zu checks, %.1fs, cache %llu hits / %llu misses)\n", suite.c_str(),
                rep.pass() ? "PASS" : "FAIL", rep.checks.size(), rep.wall_seconds,
                static_cast<unsigned long long>(rep.cache_hits),
                static_cast<unsigned long long>(rep.cache_misses));
    std::printf("report: %s\n", path.c_str());
    return rep.pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for Eisenstein series twisted by modular symbols"};
    app.require_subcommand(1);

    Flags flags_run, flags_emit;
    std::string suite, kind;
    int cusp_level = 37;
    std::string cusp_out;

    CLI::App* run = app.add_subcommand("run", "run a verification suite");
    run->add_option("suite", suite, "group | psi | eisenstein | fourier | scattering | lambda | all")
        ->required();
    add_common(run, flags_run);

    CLI::App* emit = app.add_subcommand("emit", "emit coefficient/report tables");
    emit->add_option("kind", kind, "fourier | scattering | lambda-grid")->required();
    add_common(emit, flags_emit);

    CLI::App* cusps = app.add_subcommand("cusps", "export the cusp table as JSON");
    cusps->add_option("--level", cusp_level, "level N (squarefree)");
    cusps->add_option("--out", cusp_out, "output file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(suite, make_config(flags_run));
        if (emit->parsed()) {
            auto files = emit_tables(kind, make_config(flags_emit));
            for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
            return 0;
        }
        if (cusps->parsed()) {
            nlohmann::json t = cusp_table(cusp_level);
            if (cusp_out.empty()) {
                std::cout << t.dump(2) << "\n";
            } else {
                std::ofstream out(cusp_out);
                if (!out) throw IoError("cannot write " + cusp_out);
                out << t.dump(2) << "\n";
                std::printf("wrote %s\n", cusp_out.c_str());
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
