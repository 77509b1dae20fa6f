#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace ltlab::report {

struct Series {
    std::string name;
    std::vector<double> x, y;
    bool dashed = false;
};

struct PlotSpec {
    std::string title;
    std::string xlabel, ylabel;
    bool logx = false, logy = false;
    std::string note;  // one line under the title
};

// static SVG line chart; non-finite points are skipped
void write_svg_plot(std::ostream& os, const PlotSpec& spec, const std::vector<Series>& series);

// columns of a CSV file with a header row; non-numeric cells read as NaN
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::vector<double> numeric(const std::string& column) const;
    bool has(const std::string& column) const;
};
Table read_csv(const std::string& path);

// plots for the run artifacts; each returns the names of files written
std::vector<std::string> render_scan(const std::string& csv_path, const std::string& out_dir);
std::vector<std::string> render_bound_ledger(const nlohmann::ordered_json& ledger, const std::string& out_path);
std::vector<std::string> render_exclusion_ledger(const nlohmann::ordered_json& ledger, const std::string& out_path);
std::vector<std::string> render_trace(const std::string& csv_path, const std::string& out_path);

// walks a run directory and renders whatever it recognizes
std::vector<std::string> render_run(const std::string& run_dir);

}  // namespace ltlab::report
