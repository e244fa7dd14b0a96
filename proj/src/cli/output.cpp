#include <cstdio>
#include <fstream>
#include <sstream>

#include "cli/cli.hpp"

namespace ume::cli {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

std::string table_csv(const Table& t) {
    std::ostringstream out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
        out << '\n';
    }
    return out.str();
}

bool ExperimentResult::pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

json ExperimentResult::to_json() const {
    json j{{"schema_version", kSchemaVersion},
           {"software_version", kVersion},
           {"command", command},
           {"seed", seed},
           {"config", config},
           {"timing_seconds", seconds},
           {"pass", pass()}};
    j["checks"] = json::array();
    for (const auto& c : checks)
        j["checks"].push_back({{"name", c.name},
                               {"value", c.value},
                               {"target", c.target},
                               {"tolerance", c.tolerance},
                               {"rule", c.rule},
                               {"pass", c.pass}});
    j["tables"] = json::object();
    for (const auto& t : tables) j["tables"][t.name] = {{"columns", t.columns}, {"rows", t.rows}};
    j["reports"] = reports;
    return j;
}

namespace {
void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}
}  // namespace

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& r, const LabConfig& config) {
    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    written.push_back(dir / (r.command + ".json"));
    write_file(written.back(), r.to_json().dump(2) + "\n");
    if (config.wants("csv"))
        for (const auto& t : r.tables) {
            written.push_back(dir / (r.command + "_" + t.name + ".csv"));
            write_file(written.back(), table_csv(t));
        }
    if (config.wants("svg"))
        for (const auto& p : r.plots) {
            written.push_back(dir / (r.command + "_" + p.name + ".svg"));
            write_file(written.back(), plot_svg(p));
        }
    return written;
}

}  // namespace ume::cli
