#include "eistwist/report.hpp"

#include <filesystem>
#include <fstream>

namespace eistwist {

bool SuiteReport::pass() const {
    for (const auto& c : checks) {
        if (!c.value("pass", false)) return false;
    }
    return true;
}

nlohmann::json SuiteReport::payload() const {
    return nlohmann::json{{"suite", suite}, {"pass", pass()}, {"checks", checks}};
}

nlohmann::json make_check(const std::string& identity, const std::string& grid_point, cplx lhs,
                          cplx rhs, double residual, double tolerance) {
    return nlohmann::json{{"identity", identity},
                          {"grid_point", grid_point},
                          {"lhs", {lhs.real(), lhs.imag()}},
                          {"rhs", {rhs.real(), rhs.imag()}},
                          {"residual", residual},
                          {"tolerance", tolerance},
                          {"pass", residual < tolerance}};
}

nlohmann::json make_failed_check(const std::string& identity, const std::string& grid_point,
                                 const std::string& error) {
    return nlohmann::json{{"identity", identity},
                          {"grid_point", grid_point},
                          {"error", error},
                          {"pass", false}};
}

namespace {

void write_text_atomic(const std::string& path, const std::string& text) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out << text;
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + path + " into place: " + ec.message());
}

} // namespace

std::string write_suite_report(const std::string& out_dir, const SuiteReport& rep) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir);
    std::string path = out_dir + "/" + rep.suite + ".report.json";
    write_text_atomic(path, rep.payload().dump(2) + "\n");
    nlohmann::json meta{{"suite", rep.suite},
                        {"wall_seconds", rep.wall_seconds},
                        {"cache_hits", rep.cache_hits},
                        {"cache_misses", rep.cache_misses}};
    write_text_atomic(out_dir + "/" + rep.suite + ".meta.json", meta.dump(2) + "\n");
    return path;
}

void write_csv(const std::string& path, const std::vector<CsvRow>& rows) {
    std::string text = "kind,a,b,n,re_s,im_s,re_value,im_value,method,error_estimate\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%lld,%.17g,%.17g,%.17g,%.17g,%s,%.6g\n",
                      r.kind.c_str(), r.a_index, r.b_index, r.n, r.s.real(), r.s.imag(),
                      r.value.real(), r.value.imag(), r.method.c_str(), r.error_estimate);
        text += buf;
    }
    write_text_atomic(path, text);
}

void write_triples_csv(const std::string& path, const std::vector<std::array<double, 3>>& rows) {
    std::string text = "x,y,value\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r[0], r[1], r[2]);
        text += buf;
    }
    write_text_atomic(path, text);
}

} // namespace eistwist
