#include "eistwist/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace eistwist {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    std::size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

std::vector<std::string> split_array(const std::string& body) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : body) {
        if (ch == '[') ++depth;
        if (ch == ']') --depth;
        if (ch == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: expected a number for '" + key + "', got '" + v + "'");
    }
}

long long to_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        long long n = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ConfigError("config: expected an integer for '" + key + "', got '" + v + "'");
    }
}

std::string unquote(const std::string& v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
}

// grids are written "re,im;re,im;..." on the command line and as arrays of
// two-element arrays in TOML
std::vector<cplx> parse_grid(const std::string& v, const std::string& key) {
    std::vector<cplx> out;
    if (v.empty()) return out;
    if (v.front() == '[') {
        auto items = split_array(v.substr(1, v.size() - 2));
        for (const auto& it : items) {
            if (it.size() < 2 || it.front() != '[')
                throw ConfigError("config: grid entries must be [re, im] pairs in '" + key + "'");
            auto pair = split_array(it.substr(1, it.size() - 2));
            if (pair.size() != 2)
                throw ConfigError("config: grid entries must be [re, im] pairs in '" + key + "'");
            out.emplace_back(to_double(pair[0], key), to_double(pair[1], key));
        }
        return out;
    }
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, ';')) {
        part = trim(part);
        if (part.empty()) continue;
        auto comma = part.find(',');
        if (comma == std::string::npos)
            out.emplace_back(to_double(part, key), 0.0);
        else
            out.emplace_back(to_double(trim(part.substr(0, comma)), key),
                             to_double(trim(part.substr(comma + 1)), key));
    }
    return out;
}

} // namespace

std::map<std::string, std::string> parse_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section header at line " +
                                  std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config: empty key or value at line " + std::to_string(lineno));
        kv[section.empty() ? key : section + "." + key] = val;
    }
    return kv;
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    std::string v = trim(value);
    if (key == "level") {
        cfg.level = static_cast<int>(to_int(v, key));
    } else if (key == "newform_source") {
        cfg.newform_source = unquote(v);
    } else if (key == "n_max") {
        cfg.n_max = static_cast<std::size_t>(to_int(v, key));
    } else if (key == "c_ceiling") {
        cfg.c_ceiling = to_double(v, key);
    } else if (key == "quadrature_grid") {
        cfg.quadrature_grid = static_cast<int>(to_int(v, key));
    } else if (key == "quadrature_budget") {
        cfg.quadrature_budget = static_cast<std::size_t>(to_int(v, key));
    } else if (key == "workers") {
        cfg.workers = static_cast<int>(to_int(v, key));
    } else if (key == "w_re" || key == "grids.w_re") {
        cfg.w_re = to_double(v, key);
    } else if (key == "w_im" || key == "grids.w_im") {
        cfg.w_im = to_double(v, key);
    } else if (key == "s_grid" || key == "grids.s_grid") {
        cfg.s_grid = parse_grid(v, key);
    } else if (key == "fourier_modes" || key == "grids.fourier_modes") {
        cfg.fourier_modes.clear();
        std::string body = (!v.empty() && v.front() == '[') ? v.substr(1, v.size() - 2) : v;
        for (const auto& it : split_array(body)) cfg.fourier_modes.push_back(to_int(it, key));
    } else if (key == "fourier_s" || key == "grids.fourier_s") {
        cfg.fourier_s.clear();
        std::string body = (!v.empty() && v.front() == '[') ? v.substr(1, v.size() - 2) : v;
        for (const auto& it : split_array(body)) cfg.fourier_s.push_back(to_double(it, key));
    } else if (key == "out_dir" || key == "out") {
        cfg.out_dir = unquote(v);
    } else if (key == "cache_dir" || key == "cache") {
        cfg.cache_dir = unquote(v);
    } else if (key.rfind("tolerances.", 0) == 0) {
        cfg.tolerances[key.substr(11)] = to_double(v, key);
    } else if (key == "tolerance") {
        double t = to_double(v, key);
        for (auto& [k, old] : cfg.tolerances) old = t;
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    if (!path.empty()) {
        for (const auto& [k, v] : parse_toml_file(path)) apply_override(cfg, k, v);
    }
    cfg.validate();
    return cfg;
}

double RunConfig::tolerance_for(const std::string& suite) const {
    auto it = tolerances.find(suite);
    if (it == tolerances.end()) throw ConfigError("no tolerance configured for suite " + suite);
    return it->second;
}

void RunConfig::validate() const {
    for (const auto& [k, t] : tolerances) {
        if (!(t > 0.0)) throw ConfigError("config: tolerance for " + k + " must be positive");
    }
    if (level < 1) throw ConfigError("config: level must be positive");
    for (int p = 2; p * p <= level; ++p) {
        if (level % (p * p) == 0) throw ConfigError("config: level must be squarefree");
    }
    if (s_grid.empty()) throw ConfigError("config: s grid must be non-empty");
    if (fourier_modes.empty() || fourier_s.empty())
        throw ConfigError("config: fourier grids must be non-empty");
    if (n_max < 1000) throw ConfigError("config: n_max too small for certified tails");
    if (!(c_ceiling > 0.0)) throw ConfigError("config: c_ceiling must be positive");
    if (quadrature_grid < 4) throw ConfigError("config: quadrature grid too small");
    if (workers < 1) throw ConfigError("config: workers must be at least 1");
}

} // namespace eistwist
