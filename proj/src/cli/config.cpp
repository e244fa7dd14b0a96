#include <algorithm>
#include <fstream>

#include "cli/cli.hpp"

namespace ume::cli {

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"moments", "density", "formfactor", "walks",
                                                "bass",    "brownian", "gaussianity"};
    return names;
}

bool LabConfig::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

json LabConfig::to_json() const {
    return json{{"command", command}, {"n_dim", n_dim},     {"replicas", replicas}, {"seed", seed},
                {"out_dir", out_dir}, {"format", formats}, {"workers", workers},   {"params", params}};
}

json command_defaults(const std::string& command) {
    json d{{"seed", 1}, {"out_dir", "."}, {"format", json::array({"json"})}, {"workers", 0}};
    if (command == "moments") {
        d["n_dim"] = 5;
        d["replicas"] = 100000;
        d["params"] = {{"kind", "ume"}, {"k_max", 0}};
    } else if (command == "density") {
        d["n_dim"] = 10;
        d["replicas"] = 20000;
        d["params"] = {{"window", 0.8}, {"bin_width", 0.0}, {"grid_points", 401}};
    } else if (command == "formfactor") {
        d["n_dim"] = 20;
        d["replicas"] = 100000;
        d["params"] = {{"t_max", 60}, {"rms_t_max", 40}, {"agree_t_max", 12}, {"rms_bound", 0.1}};
    } else if (command == "walks") {
        d["n_dim"] = 4;
        d["replicas"] = 100000;
        d["params"] = {{"length", 10}, {"oracle_n_max", 5}, {"oracle_length_max", 8}};
    } else if (command == "bass") {
        d["n_dim"] = 8;
        d["replicas"] = 10;
        d["params"] = {{"n_min", 3}, {"tolerance", 1e-8}};
    } else if (command == "brownian") {
        d["n_dim"] = 20;
        d["replicas"] = 400;
        d["params"] = {{"ns", {3, 4, 5}},
                       {"configurations", 50},
                       {"ds", 1e-3},
                       {"drift_decay_ns", {6, 7, 8}},
                       {"drift_decay_dims", {20, 40}},
                       {"diffusion_decay_ns", {3, 4, 5}},
                       {"diffusion_decay_dims", {20, 80}},
                       {"decay_configurations", 30}};
    } else if (command == "gaussianity") {
        d["n_dim"] = 40;
        d["replicas"] = 10000;
        d["params"] = {{"ns", {3, 4, 5, 6}}, {"w1_dims", {10, 20, 40}}, {"kurtosis_slack", 0.1}};
    } else {
        throw UsageError("unknown command '" + command + "'");
    }
    return d;
}

void overlay(json& base, const json& layer) {
    if (!layer.is_object()) throw UsageError("config must be a JSON object");
    for (const auto& [key, value] : layer.items()) {
        if (key == "params") {
            if (!value.is_object()) throw UsageError("config: params must be an object");
            for (const auto& [pk, pv] : value.items()) base["params"][pk] = pv;
        } else if (key == "command") {
            continue;  // selected on the command line
        } else {
            base[key] = value;
        }
    }
}

json read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("config file " + path.string() + ": " + e.what());
    }
    if (doc.is_object() && doc.contains("schema_version") && doc.contains("config")) return doc["config"];
    return doc;
}

namespace {
template <class T>
T get_field(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config field '") + key + "': " + e.what());
    }
}
}  // namespace

LabConfig parse_config(const std::string& command, const json& merged) {
    LabConfig c;
    c.command = command;
    const auto n = get_field<long long>(merged, "n_dim");
    const auto replicas = get_field<long long>(merged, "replicas");
    if (replicas <= 0) throw UsageError("replicas must be positive");
    c.n_dim = static_cast<int>(n);
    c.replicas = static_cast<std::uint64_t>(replicas);
    c.seed = get_field<std::uint64_t>(merged, "seed");
    c.out_dir = get_field<std::string>(merged, "out_dir");
    c.workers = get_field<int>(merged, "workers");
    if (c.workers < 0) throw UsageError("workers must be nonnegative");
    const auto& fmt = merged.at("format");
    c.formats.clear();
    for (const auto& f : fmt.is_array() ? fmt : json::array({fmt})) {
        const auto s = f.get<std::string>();
        if (s != "json" && s != "csv" && s != "svg") throw UsageError("unknown format '" + s + "'");
        if (!c.wants(s)) c.formats.push_back(s);
    }
    if (!c.wants("json")) c.formats.insert(c.formats.begin(), "json");
    c.params = merged.value("params", json::object());
    return c;
}

}  // namespace ume::cli
