#include "specflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specflow/errors.hpp"

namespace specflow {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_value_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidParamsError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw InvalidParamsError("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = val;
    }
    return kv;
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParamsError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_value_text(ss.str());
}

RunConfig RunConfig::from_kv(const std::map<std::string, std::string>& kv) {
    RunConfig cfg;
    cfg.params = GeometricLorenzParams::from_config(kv);
    auto num = [&](const char* key, double fallback) {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw InvalidParamsError(std::string("config key '") + key + "' is not a number");
        }
    };
    cfg.seed = static_cast<std::uint64_t>(num("seed", static_cast<double>(cfg.seed)));
    cfg.grid_h = num("grid_h", cfg.grid_h);
    cfg.mu = num("mu", cfg.mu);
    cfg.mu_u = num("mu_u", cfg.mu_u);
    cfg.delta_seed = num("delta_seed", cfg.delta_seed);
    cfg.t1 = num("t1", cfg.t1);
    cfg.t2 = num("t2", cfg.t2);
    if (auto it = kv.find("t_sweep"); it != kv.end()) cfg.t_sweep = parse_list(it->second);
    if (auto it = kv.find("out_dir"); it != kv.end()) cfg.out_dir = it->second;
    if (!(cfg.grid_h > 0.0) || !(cfg.mu > 0.0) || !(cfg.mu_u > 0.0) || !(cfg.delta_seed > 0.0) ||
        !(cfg.t1 > 0.0) || !(cfg.t2 > 0.0) || cfg.t_sweep.empty())
        throw InvalidParamsError("run config: positive grid_h/mu/mu_u/delta_seed/t1/t2 and nonempty t_sweep required");
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    return from_kv(read_key_value_file(path));
}

std::string RunConfig::canonical_text() const {
    std::map<std::string, std::string> kv;
    kv["lambda1"] = fmt_g(params.lambda1);
    kv["lambda2"] = fmt_g(params.lambda2);
    kv["lambda3"] = fmt_g(params.lambda3);
    kv["k"] = fmt_g(params.k);
    kv["b"] = fmt_g(params.b);
    kv["c"] = fmt_g(params.c);
    kv["tau_tube"] = fmt_g(params.tau_tube);
    kv["seed"] = std::to_string(seed);
    kv["grid_h"] = fmt_g(grid_h);
    kv["mu"] = fmt_g(mu);
    kv["mu_u"] = fmt_g(mu_u);
    kv["delta_seed"] = fmt_g(delta_seed);
    kv["t1"] = fmt_g(t1);
    kv["t2"] = fmt_g(t2);
    std::string sweep;
    for (std::size_t i = 0; i < t_sweep.size(); ++i) {
        if (i) sweep += ",";
        sweep += fmt_g(t_sweep[i]);
    }
    kv["t_sweep"] = sweep;
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunConfig::hash() const { return fnv1a_hex(canonical_text()); }

json RegressionBaseline::to_json() const {
    json j;
    j["config_hash"] = config_hash;
    json vals;
    for (const auto& [name, e] : values) vals[name] = {{"value", e.value}, {"rel_tol", e.rel_tol}};
    j["values"] = vals;
    return j;
}

RegressionBaseline RegressionBaseline::from_json(const json& j) {
    RegressionBaseline b;
    b.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& [name, e] : j.at("values").items()) {
        Entry entry;
        entry.value = e.at("value").get<double>();
        entry.rel_tol = e.at("rel_tol").get<double>();
        b.values[name] = entry;
    }
    return b;
}

std::vector<std::string> RegressionBaseline::compare(
    const std::map<std::string, double>& measured, const std::string& measured_hash) const {
    std::vector<std::string> violations;
    if (measured_hash != config_hash)
        violations.push_back("config hash " + measured_hash + " != baseline " + config_hash);
    for (const auto& [name, e] : values) {
        const auto it = measured.find(name);
        if (it == measured.end()) {
            violations.push_back("missing value: " + name);
            continue;
        }
        const double scale = std::max(std::abs(e.value), 1e-300);
        if (std::abs(it->second - e.value) > e.rel_tol * scale) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%s: %.10g outside %.10g +- %.2g%%", name.c_str(),
                          it->second, e.value, 100.0 * e.rel_tol);
            violations.push_back(buf);
        }
    }
    return violations;
}

void write_json(const json& j, const std::string& path) {
    write_text(j.dump(2) + "\n", path);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void write_text(const std::string& text, const std::string& path) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace specflow
