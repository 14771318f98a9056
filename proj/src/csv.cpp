#include "spheroid/csv.hpp"

#include "spheroid/config.hpp"
#include "spheroid/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace spheroid {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::trunc) {
    std::ofstream out(path, std::ios::binary | mode);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

std::string opt(double x) { return std::isfinite(x) ? format_double(x) : std::string(); }

} // namespace

std::string timeseries_header() {
    std::string h = "t,R,z,v1";
    for (const char* name : {"c_dev", "cr_dev", "ct", "p_dev", "pr_weighted", "pt", "z_dev", "zdot", "eta"})
        h += std::string(",") + name;
    return h;
}

std::string timeseries_row(const TimeRecord& rec) {
    const DeviationRecord& d = rec.deviation;
    std::string row;
    for (double x : {rec.t, rec.R, rec.z, rec.v1, d.c_dev, d.cr_dev, d.ct, d.p_dev, d.pr_weighted,
                     d.pt, d.z_dev, d.zdot, d.eta}) {
        if (!row.empty()) row += ',';
        row += format_double(x);
    }
    return row;
}

void write_timeseries(const std::string& path, const std::vector<TimeRecord>& series) {
    auto out = open_out(path);
    out << timeseries_header() << '\n';
    for (const auto& rec : series) out << timeseries_row(rec) << '\n';
    if (!out) throw IoError("write failed for " + path);
}

void append_timeseries(const std::string& path, const std::vector<TimeRecord>& series) {
    auto out = open_out(path, std::ios::app);
    for (const auto& rec : series) out << timeseries_row(rec) << '\n';
    if (!out) throw IoError("write failed for " + path);
}

void truncate_timeseries(const std::string& path, double t_keep) {
    std::vector<std::string> kept;
    {
        std::ifstream in(path, std::ios::binary);
        std::string line;
        bool header = true;
        while (in && std::getline(in, line)) {
            if (header) {
                header = false;
                continue;
            }
            const std::string first = line.substr(0, line.find(','));
            double t = 0.0;
            auto [ptr, ec] = std::from_chars(first.data(), first.data() + first.size(), t);
            if (ec != std::errc()) throw FormatError("bad time value in " + path + ": " + first);
            if (t <= t_keep) kept.push_back(line);
        }
    }
    auto out = open_out(path);
    out << timeseries_header() << '\n';
    for (const auto& line : kept) out << line << '\n';
}

void write_profile(const std::string& path, const StationarySolution& sol) {
    auto out = open_out(path);
    out << "r,c,p,v\n";
    for (int i = 0; i < sol.grid.size(); ++i) {
        const double v = i < static_cast<int>(sol.v.size()) ? sol.v[i] : NAN;
        out << format_double(sol.grid.r(i)) << ',' << format_double(sol.c[i]) << ','
            << format_double(sol.p[i]) << ',' << opt(v) << '\n';
    }
}

std::string stability_header() {
    std::string h = "eps,delta,shape,seed";
    for (auto name : kDecayNormNames) h += ",mu_" + std::string(name);
    for (auto name : kDecayNormNames) h += ",C_" + std::string(name);
    h += ",crossing_time,converged,status";
    return h;
}

void write_stability_report(const std::string& path, const StabilityReport& report) {
    auto out = open_out(path);
    out << stability_header() << '\n';
    for (const auto& c : report.cells) {
        out << format_double(c.eps) << ',' << format_double(c.delta) << ',' << shape_name(c.shape)
            << ',' << c.seed;
        for (const auto& f : c.fits) out << ',' << (f ? format_double(f->mu) : "");
        for (const auto& f : c.fits) out << ',' << (f ? format_double(f->C) : "");
        out << ',' << (c.crossing_time >= 0.0 ? format_double(c.crossing_time) : "") << ','
            << (c.converged ? "true" : "false") << ',';
        // Status text may carry an exception message; keep the row parseable.
        std::string status = c.status;
        for (char& ch : status)
            if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
        out << status << '\n';
    }
}

double convergence_threshold(ConvergenceKind kind, const std::string& field) {
    switch (kind) {
    case ConvergenceKind::Diffusion: return field == "c" ? 1.8 : NAN;
    case ConvergenceKind::Transport:
        if (field == "c") return 1.8;
        if (field == "p") return 1.5;
        return NAN;
    case ConvergenceKind::Time: return 1.8;
    }
    return NAN;
}

void write_convergence(const std::string& path, const std::vector<ConvergenceResult>& results) {
    auto out = open_out(path);
    out << "study,field,level,N,dt,difference,order,threshold,inconclusive\n";
    for (const auto& r : results) {
        for (const auto& f : r.fields) {
            const double thr = convergence_threshold(r.kind, f.field);
            for (std::size_t k = 0; k < f.differences.size(); ++k) {
                const double order = k >= 1 && k - 1 < f.orders.size() ? f.orders[k - 1] : NAN;
                out << convergence_kind_name(r.kind) << ',' << f.field << ',' << k << ','
                    << r.grid_sizes[k + 1] << ',' << format_double(r.time_steps[k + 1]) << ','
                    << format_double(f.differences[k]) << ',' << opt(order) << ',' << opt(thr)
                    << ',' << (f.inconclusive ? "true" : "false") << '\n';
            }
        }
    }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

} // namespace spheroid
