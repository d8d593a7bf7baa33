#include "chains/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace chains {

std::string join_set(const std::set<std::string>& s) {
    std::string out;
    for (const auto& v : s) {
        if (!out.empty())
            out += ",";
        out += v;
    }
    return out;
}

std::set<std::string> split_set(const std::string& csv) {
    std::set<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.insert(item);
    return out;
}

std::string serialize_config(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["k"] = c.k;
    j["l"] = c.l;
    j["c_abs"] = c.c_abs;
    j["c_phase"] = c.c_phase;
    j["beta"] = c.beta;
    j["domain_L"] = c.domain_L;
    j["grid_nr"] = c.grid_nr;
    j["grid_nt"] = c.grid_nt;
    j["tol"] = c.tol;
    j["max_steps"] = c.max_steps;
    j["y_extent"] = c.y_extent;
    j["y_points"] = c.y_points;
    j["y3_points"] = c.y3_points;
    j["y3_span"] = c.y3_span;
    j["stages"] = join_set(c.stages);
    j["output_dir"] = c.output_dir;
    j["formats"] = join_set(c.formats);
    j["checkpoint"] = c.checkpoint;
    j["threads"] = c.threads;
    j["seed"] = c.seed;
    return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ChainError(ErrorKind::io_error, std::string("config parse error: ") + e.what());
    }
    RunConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key))
            j.at(key).get_to(field);
    };
    get("k", c.k);
    get("l", c.l);
    get("c_abs", c.c_abs);
    get("c_phase", c.c_phase);
    get("beta", c.beta);
    get("domain_L", c.domain_L);
    get("grid_nr", c.grid_nr);
    get("grid_nt", c.grid_nt);
    get("tol", c.tol);
    get("max_steps", c.max_steps);
    get("y_extent", c.y_extent);
    get("y_points", c.y_points);
    get("y3_points", c.y3_points);
    get("y3_span", c.y3_span);
    get("checkpoint", c.checkpoint);
    get("threads", c.threads);
    get("seed", c.seed);
    if (j.contains("stages"))
        c.stages = split_set(j.at("stages").get<std::string>());
    if (j.contains("output_dir"))
        c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("formats"))
        c.formats = split_set(j.at("formats").get<std::string>());
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ChainError(ErrorKind::io_error, "cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace chains
