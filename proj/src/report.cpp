#include "ltlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ltlab/errors.hpp"

namespace ltlab::report {

namespace fs = std::filesystem;

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

}  // namespace

void write_svg_plot(std::ostream& os, const PlotSpec& spec, const std::vector<Series>& series) {
    const double W = 640, H = 420, left = 70, right = 170, top = 50, bottom = 50;
    auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };
    auto ok = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!spec.logx || x > 0) && (!spec.logy || y > 0);
    };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (auto& s : series)
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            if (ok(s.x[i], s.y[i])) {
                x0 = std::min(x0, tx(s.x[i]));
                x1 = std::max(x1, tx(s.x[i]));
                y0 = std::min(y0, ty(s.y[i]));
                y1 = std::max(y1, ty(s.y[i]));
            }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
       << "</text>\n";
    if (!spec.note.empty())
        os << "<text x=\"" << W / 2 << "\" y=\"36\" text-anchor=\"middle\" fill=\"#555\">" << escape(spec.note)
           << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
        const double gx = left + pw * k / 4.0, gy = top + ph - ph * k / 4.0;
        os << "<text x=\"" << num(gx) << "\" y=\"" << num(top + ph + 15) << "\" text-anchor=\"middle\">"
           << label(spec.logx ? std::pow(10.0, fx) : fx) << "</text>\n";
        os << "<text x=\"" << num(left - 5) << "\" y=\"" << num(gy + 4) << "\" text-anchor=\"end\">"
           << label(spec.logy ? std::pow(10.0, fy) : fy) << "</text>\n";
    }
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 12) << "\" text-anchor=\"middle\">"
       << escape(spec.xlabel) << "</text>\n";
    os << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(spec.ylabel) << "</text>\n";
    for (size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* col = kColors[k % 6];
        std::string pts;
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            if (ok(s.x[i], s.y[i])) pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
        if (!pts.empty()) pts.pop_back();
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.6\""
           << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"" << pts << "\"/>\n";
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            if (ok(s.x[i], s.y[i]))
                os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2.5\" fill=\""
                   << col << "\"/>\n";
        const double ly = top + 12 + 16 * k;
        os << "<line x1=\"" << num(W - right + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(W - right + 30)
           << "\" y2=\"" << num(ly) << "\" stroke=\"" << col << "\" stroke-width=\"2\""
           << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
        os << "<text x=\"" << num(W - right + 35) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.name)
           << "</text>\n";
    }
    os << "</svg>\n";
}

bool Table::has(const std::string& column) const {
    return std::find(header.begin(), header.end(), column) != header.end();
}

std::vector<double> Table::numeric(const std::string& column) const {
    auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) throw InputError("csv: no column " + column);
    const size_t c = static_cast<size_t>(it - header.begin());
    std::vector<double> out;
    for (auto& r : rows) {
        double v = std::numeric_limits<double>::quiet_NaN();
        if (c < r.size()) {
            try {
                size_t used = 0;
                v = std::stod(r[c], &used);
                if (used != r[c].size()) v = std::numeric_limits<double>::quiet_NaN();
            } catch (const std::exception&) {
            }
        }
        out.push_back(v);
    }
    return out;
}

Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("csv: cannot open " + path);
    Table t;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> f;
        std::stringstream ss(l);
        std::string x;
        while (std::getline(ss, x, ',')) f.push_back(x);
        return f;
    };
    if (!std::getline(in, line)) throw InputError("csv: empty file " + path);
    t.header = split(line);
    while (std::getline(in, line))
        if (!line.empty()) t.rows.push_back(split(line));
    return t;
}

std::vector<std::string> render_scan(const std::string& csv_path, const std::string& out_dir) {
    auto t = read_csv(csv_path);
    auto lam = t.numeric("lambda");
    auto gn = t.numeric("gn_value");
    std::vector<Series> s{{"trial upper", lam, t.numeric("trial_upper")},
                          {"assembled lower", lam, t.numeric("assembled_lower")},
                          {"C_GN - C lambda^-k1", lam, t.numeric("gn_gap_prediction"), true},
                          {"GN value", lam, gn, true}};
    PlotSpec spec{"Quotient scan", "lambda", "quotient", true, false,
                  "bracket and shape check; constants C are configured, not proven"};
    const std::string out = (fs::path(out_dir) / "scan.svg").string();
    std::ofstream f(out);
    write_svg_plot(f, spec, s);

    std::vector<double> gap;
    auto up = t.numeric("trial_upper");
    for (size_t i = 0; i < up.size(); ++i) gap.push_back(up[i] - gn[i]);
    const std::string out2 = (fs::path(out_dir) / "scan_gap.svg").string();
    std::ofstream f2(out2);
    write_svg_plot(f2, {"Trial gap above the GN value", "lambda", "trial_upper - GN", true, true, ""},
                   {{"gap", lam, gap}});
    return {out, out2};
}

std::vector<std::string> render_bound_ledger(const nlohmann::ordered_json& j, const std::string& out_path) {
    std::vector<double> n, g0, g1, e0, e1, cr;
    for (auto& t : j.at("per_level")) {
        n.push_back(t.at("n").get<double>());
        g0.push_back(t.at("class0_uncertainty_gain").get<double>());
        g1.push_back(t.at("class1_uncertainty_gain").get<double>());
        e0.push_back(t.at("class0_error").get<double>());
        e1.push_back(t.at("class1_error").get<double>());
        cr.push_back(t.at("interaction_credit").get<double>());
    }
    PlotSpec spec{"Bound ledger per level", "level n", "term", false, true,
                  "lambda = " + label(j.at("lambda").get<double>()) +
                      ", assembled = " + label(j.at("assembled_lower").get<double>())};
    std::ofstream f(out_path);
    write_svg_plot(f, spec,
                   {{"class0 gain", n, g0}, {"class1 gain", n, g1}, {"class0 error", n, e0, true},
                    {"class1 error", n, e1, true}, {"interaction credit", n, cr}});
    return {out_path};
}

std::vector<std::string> render_exclusion_ledger(const nlohmann::ordered_json& j, const std::string& out_path) {
    std::vector<double> n, term, simple;
    for (auto& t : j.at("per_level")) {
        n.push_back(t.at("n").get<double>());
        term.push_back(t.at("term_value").get<double>());
        simple.push_back(t.at("simplified_value").get<double>());
    }
    std::ofstream f(out_path);
    write_svg_plot(f, {"Layered exclusion bound per level", "level n", "term", false, true, ""},
                   {{"term", n, term}, {"simplified", n, simple, true}});
    return {out_path};
}

std::vector<std::string> render_trace(const std::string& csv_path, const std::string& out_path) {
    auto t = read_csv(csv_path);
    std::ofstream f(out_path);
    write_svg_plot(f, {"Minimization trace", "step", "quotient", false, false, ""},
                   {{"value", t.numeric("step"), t.numeric("value")}});
    return {out_path};
}

std::vector<std::string> render_run(const std::string& run_dir) {
    if (!fs::is_directory(run_dir)) throw InputError("report: not a directory: " + run_dir);
    std::vector<fs::path> files;
    for (auto& e : fs::directory_iterator(run_dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<std::string> out;
    for (auto& p : files) {
        const std::string name = p.filename().string();
        std::vector<std::string> w;
        if (name == "scan.csv") {
            w = render_scan(p.string(), run_dir);
        } else if (name == "trace.csv") {
            w = render_trace(p.string(), (p.parent_path() / "trace.svg").string());
        } else if (p.extension() == ".json" && name != "manifest.json") {
            std::ifstream in(p);
            nlohmann::ordered_json j;
            try {
                j = nlohmann::ordered_json::parse(in);
            } catch (const std::exception&) {
                continue;
            }
            if (!j.is_object() || !j.contains("schema")) continue;
            const auto schema = j["schema"].get<std::string>();
            auto svg = p;
            svg.replace_extension(".svg");
            if (schema == "ltlab.bound-ledger/1") w = render_bound_ledger(j, svg.string());
            else if (schema == "ltlab.exclusion-ledger/1") w = render_exclusion_ledger(j, svg.string());
        }
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

}  // namespace ltlab::report
