#include "sde_weak_lab/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdelab {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t pos = 0;
        const double v = std::stod(item, &pos);
        if (pos != item.size()) throw std::invalid_argument("bad number: " + item);
        values.push_back(v);
    }
    return values;
}

std::string format_list(const std::vector<double>& values) {
    std::string out;
    char buf[48];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
        if (i) out += ',';
        out += buf;
    }
    return out;
}

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

KeyValues parse_config_text(const std::string& text) {
    KeyValues keys;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key=value");
        keys[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return keys;
}

KeyValues parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

RunConfig RunConfig::from_keys(const KeyValues& keys) {
    RunConfig cfg;
    for (const auto& [key, value] : keys) {
        if (key.rfind("meta.", 0) == 0) continue;  // manifest bookkeeping
        if (key == "run.command") cfg.command = value;
        else if (key == "problem.name") cfg.problem = value;
        else if (key == "problem.sigma") cfg.sigma = std::stod(value);
        else if (key == "problem.p_large") cfg.p_large = std::stod(value);
        else if (key == "problem.x0") cfg.x0 = parse_list(value);
        else if (key == "run.scheme") cfg.scheme = value;
        else if (key == "run.phi") cfg.phi = value;
        else if (key == "run.T") cfg.T = std::stod(value);
        else if (key == "run.h_list") cfg.h_list = parse_list(value);
        else if (key == "run.h") cfg.h = std::stod(value);
        else if (key == "run.M") cfg.M = std::stoll(value);
        else if (key == "run.h_ref") cfg.h_ref = std::stod(value);
        else if (key == "run.M_ref") cfg.M_ref = std::stoll(value);
        else if (key == "run.seed") cfg.seed = std::stoull(value);
        else if (key == "run.threads") cfg.threads = std::stoi(value);
        else if (key == "run.out") cfg.out_dir = value;
        else if (key == "run.tag") cfg.tag = value;
        else if (key == "run.integral_mode") cfg.integral_mode = value;
        else if (key == "run.p") cfg.p = std::stod(value);
        else if (key == "run.s") cfg.s = std::stoi(value);
        else if (key == "map.family") cfg.map_family = value;
        else if (key == "map.alpha") cfg.map_alpha = std::stod(value);
        else if (key == "map.power") cfg.map_power = std::stod(value);
        else if (key == "map.theta") cfg.map_theta = std::stoi(value);
        else if (key == "map.varsigma") cfg.map_varsigma = std::stod(value);
        else if (key == "map.samples") cfg.map_samples = std::stoll(value);
        else if (key == "map.z_radius") cfg.map_z_radius = std::stod(value);
        else if (key == "map.dim") cfg.map_dim = std::stoi(value);
        else if (key == "map.h_grid") cfg.map_h_grid = parse_list(value);
        else throw std::invalid_argument("unknown config key: " + key);
    }
    return cfg;
}

KeyValues RunConfig::to_keys() const {
    KeyValues keys;
    keys["run.command"] = command;
    keys["problem.name"] = problem;
    keys["problem.sigma"] = format_double(sigma);
    keys["problem.p_large"] = format_double(p_large);
    if (!x0.empty()) keys["problem.x0"] = format_list(x0);
    keys["run.scheme"] = scheme;
    keys["run.phi"] = phi;
    keys["run.T"] = format_double(T);
    keys["run.h_list"] = format_list(h_list);
    keys["run.h"] = format_double(h);
    keys["run.M"] = std::to_string(M);
    keys["run.h_ref"] = format_double(h_ref);
    keys["run.M_ref"] = std::to_string(M_ref);
    keys["run.seed"] = std::to_string(seed);
    keys["run.threads"] = std::to_string(threads);
    keys["run.out"] = out_dir;
    if (!tag.empty()) keys["run.tag"] = tag;
    keys["run.integral_mode"] = integral_mode;
    keys["run.p"] = format_double(p);
    keys["run.s"] = std::to_string(s);
    keys["map.family"] = map_family;
    keys["map.alpha"] = format_double(map_alpha);
    keys["map.power"] = format_double(map_power);
    keys["map.theta"] = std::to_string(map_theta);
    keys["map.varsigma"] = format_double(map_varsigma);
    keys["map.samples"] = std::to_string(map_samples);
    keys["map.z_radius"] = format_double(map_z_radius);
    keys["map.dim"] = std::to_string(map_dim);
    keys["map.h_grid"] = format_list(map_h_grid);
    return keys;
}

std::vector<double> RunConfig::resolved_x0() const {
    if (!x0.empty()) return x0;
    if (problem == "fhn") return {0.8, 0.8};
    if (problem == "cubic_quadratic") return {0.1};
    return {0.5};
}

std::string RunConfig::resolved_tag() const {
    if (!tag.empty()) return tag;
    std::string t = command + "_" + scheme + "_" + problem;
    if (command == "run-weak-error") t += "_" + phi;
    return t;
}

}  // namespace sdelab
