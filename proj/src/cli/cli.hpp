#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ume::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = UME_LAB_VERSION;

// Thrown for bad flags, bad config files and invalid parameter values; maps to exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string>& command_names();

// Effective configuration after merging defaults, the config file and command-line flags.
struct LabConfig {
    std::string command;
    int n_dim = 0;
    std::uint64_t replicas = 0;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::vector<std::string> formats{"json"};  // json is always written
    int workers = 0;
    json params = json::object();  // command-specific knobs

    bool wants(const std::string& format) const;
    json to_json() const;
};

// Defaults for a command as a config document (same keys as the config file).
json command_defaults(const std::string& command);
// Overlay `layer` onto `base`; params are merged key by key.
void overlay(json& base, const json& layer);
// Accepts a bare config object or a previous result document (its "config" member).
json read_config_file(const std::filesystem::path& path);
LabConfig parse_config(const std::string& command, const json& merged);

struct Check {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string rule;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Series {
    enum class Style { Line, Points, Steps };
    std::string label;
    Style style = Style::Line;
    std::vector<double> x, y;
    std::vector<double> err;  // optional error bars for Points
};

struct Plot {
    std::string name;
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
    std::optional<std::pair<double, double>> xrange, yrange;
};

struct ExperimentResult {
    std::string command;
    json config;
    std::vector<Table> tables;
    std::vector<Plot> plots;
    std::vector<Check> checks;
    json reports = json::object();
    double seconds = 0.0;
    std::uint64_t seed = 0;

    bool pass() const;
    json to_json() const;
};

ExperimentResult run_command(const LabConfig& config);

// Twelve significant digits in scientific notation.
std::string format_number(double v);
std::string table_csv(const Table& t);
std::string plot_svg(const Plot& p);
// Writes <command>.json and the requested CSV/SVG files; returns the written paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& r, const LabConfig& config);

// Full command-line entry point; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace ume::cli
