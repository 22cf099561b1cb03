#include "fracmove/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fracmove/errors.hpp"

namespace fracmove::io {

std::string format_double(double x) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(n));
}

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return os;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_number(const std::string& s, const fs::path& path, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || !std::isfinite(v)) {
        throw ConfigError("'" + path.string() + "' line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

}  // namespace

void write_field_csv(const fs::path& path, const Field& f) {
    auto os = open_out(path);
    const SpaceGrid& g = f.grid();
    os << (g.dim() == 1 ? "x,value\n" : "x,y,value\n");
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Point p = g.point(i);
        os << format_double(p[0]) << ',';
        if (g.dim() == 2) os << format_double(p[1]) << ',';
        os << format_double(f[i]) << '\n';
    }
}

Field read_field_csv(const fs::path& path, const SpaceGrid& grid) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read field file '" + path.string() + "'");
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("'" + path.string() + "' is empty");
    const std::size_t cols = static_cast<std::size_t>(grid.dim()) + 1;
    if (split_csv(line).size() != cols) {
        throw ConfigError("'" + path.string() + "': header does not match a " + std::to_string(grid.dim()) +
                          "D field");
    }
    Field f(grid);
    std::size_t idx = 0, lineno = 1;
    const double tol = 1e-9 * (1.0 + grid.diameter());
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != cols) throw ConfigError("'" + path.string() + "' line " + std::to_string(lineno) + ": wrong column count");
        if (idx >= grid.size()) throw ConfigError("'" + path.string() + "': more rows than grid nodes");
        const Point p = grid.point(idx);
        for (int a = 0; a < grid.dim(); ++a) {
            if (std::abs(parse_number(cells[static_cast<std::size_t>(a)], path, lineno) - p[a]) > tol) {
                throw ConfigError("'" + path.string() + "' line " + std::to_string(lineno) +
                                  ": coordinates do not match the configured grid");
            }
        }
        f[idx++] = parse_number(cells.back(), path, lineno);
    }
    if (idx != grid.size()) throw ConfigError("'" + path.string() + "': fewer rows than grid nodes");
    return f;
}

nlohmann::json write_spacetime_dump(const fs::path& dir, const std::string& name, const SpaceTimeField& u,
                                    std::size_t stride, double alpha) {
    if (stride == 0) stride = 1;
    fs::create_directories(dir);
    nlohmann::json files = nlohmann::json::array();
    const std::size_t last = u.n_nodes() - 1;
    for (std::size_t n = 0; n <= last; ++n) {
        if (n % stride != 0 && n != last) continue;
        char buf[32];
        std::snprintf(buf, sizeof buf, "_n%05zu.csv", n);
        const std::string file = name + buf;
        write_field_csv(dir / file, u[n]);
        files.push_back({{"node", n}, {"t", u.tgrid().node(n)}, {"path", file}});
    }
    nlohmann::json h = nlohmann::json::array();
    for (int a = 0; a < u.sgrid().dim(); ++a) h.push_back(u.sgrid().spacing(a));
    nlohmann::json m = {{"name", name}, {"alpha", alpha},          {"tau", u.tgrid().step()},
                        {"h", h},       {"n_steps", u.tgrid().n_steps()}, {"files", files}};
    write_json(dir / (name + "_manifest.json"), m);
    return m;
}

void write_history_csv(const fs::path& path, const ReconReport& report) {
    auto os = open_out(path);
    os << "iter,objective,rel_change,err_l2_vs_truth\n";
    for (const auto& r : report.history) {
        os << r.iter << ',' << format_double(r.objective) << ',' << format_double(r.rel_change) << ',';
        if (r.err_l2_vs_truth) os << format_double(*r.err_l2_vs_truth);
        os << '\n';
    }
}

std::size_t write_chord_csvs(const fs::path& dir, const ChordSet& chords) {
    fs::create_directories(dir);
    std::size_t written = 0;
    for (std::size_t k = 0; k < chords.chords.size(); ++k) {
        const Chord& ch = chords.chords[k];
        if (!ch.solved) continue;
        char buf[32];
        std::snprintf(buf, sizeof buf, "chord_%05zu.csv", k);
        auto os = open_out(dir / buf);
        os << "xi1,c_hat,f_hat\n";
        for (std::size_t i = 0; i < ch.xi1.size(); ++i) {
            os << format_double(ch.xi1[i]) << ',' << format_double(ch.c_hat[i]) << ',' << format_double(ch.f_hat[i])
               << '\n';
        }
        ++written;
    }
    return written;
}

void write_summary_csv(const fs::path& path, const std::vector<SummaryRow>& rows) {
    auto os = open_out(path);
    os << "stage,quantity,value\n";
    for (const auto& r : rows) os << r.stage << ',' << r.quantity << ',' << format_double(r.value) << '\n';
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read '" + path.string() + "'");
    try {
        return nlohmann::json::parse(is, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("'" + path.string() + "': " + e.what());
    }
}

}  // namespace fracmove::io
