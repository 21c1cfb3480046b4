#include "unsatporo/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace unsatporo {

using nlohmann::json;

namespace {

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string number_or_empty(double v) { return std::isnan(v) ? "" : fmt("%.10e", v); }

std::string iters_text(const ResultRow& r) {
    if (!r.converged) return ">" + std::to_string(r.iters_cap);
    return fmt("%.2f", r.iters_mean);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    return os;
}

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double number_from(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

/// Column order of the solver table: pointwise first, then Vanka by overlap.
int smoother_rank(const std::string& s) {
    if (s == "Jacobi") return 0;
    if (s == "GS") return 1;
    if (s == "V") return 2;
    if (s == "VK") return 3;
    if (s.rfind("VK", 0) == 0) return 3 + std::stoi(s.substr(2));
    return 1000;
}

}  // namespace

bool ResultRow::operator==(const ResultRow& o) const {
    return experiment == o.experiment && grid == o.grid && scheme == o.scheme &&
           smoother == o.smoother && colors == o.colors && sweeps == o.sweeps && M == o.M &&
           same_double(iters_mean, o.iters_mean) && converged == o.converged &&
           iters_cap == o.iters_cap && same_double(solve_s, o.solve_s) &&
           same_double(total_s, o.total_s) && same_double(e_p, o.e_p) && same_double(e_u, o.e_u);
}

bool row_less(const ResultRow& a, const ResultRow& b) {
    return std::tie(a.experiment, a.grid, a.scheme, a.smoother, a.colors, a.sweeps, a.M) <
           std::tie(b.experiment, b.grid, b.scheme, b.smoother, b.colors, b.sweeps, b.M);
}

void sort_rows(std::vector<ResultRow>& rows) { std::stable_sort(rows.begin(), rows.end(), row_less); }

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
    os << kResultsHeader << '\n';
    for (const ResultRow& r : rows) {
        os << r.experiment << ',' << r.grid << ',' << r.scheme << ',' << r.smoother << ','
           << r.colors << ',' << r.sweeps << ',' << r.M << ',' << iters_text(r) << ','
           << fmt("%.6f", r.solve_s) << ',' << fmt("%.6f", r.total_s) << ','
           << number_or_empty(r.e_p) << ',' << number_or_empty(r.e_u) << '\n';
    }
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream os = open_out(path);
    write_results_csv(rows, os);
    if (!os) throw std::runtime_error("failed writing " + path);
}

json results_to_json(const std::vector<ResultRow>& rows) {
    json out = json::array();
    for (const ResultRow& r : rows)
        out.push_back({{"experiment", r.experiment},
                       {"grid", r.grid},
                       {"scheme", r.scheme},
                       {"smoother", r.smoother},
                       {"colors", r.colors},
                       {"sweeps", r.sweeps},
                       {"M", r.M},
                       {"iters_mean", r.iters_mean},
                       {"converged", r.converged},
                       {"iters_cap", r.iters_cap},
                       {"solve_s", r.solve_s},
                       {"total_s", r.total_s},
                       {"e_p", number_or_null(r.e_p)},
                       {"e_u", number_or_null(r.e_u)}});
    return out;
}

std::vector<ResultRow> results_from_json(const json& j) {
    std::vector<ResultRow> rows;
    for (const json& o : j) {
        ResultRow r;
        r.experiment = o.at("experiment").get<std::string>();
        r.grid = o.at("grid").get<std::string>();
        r.scheme = o.at("scheme").get<std::string>();
        r.smoother = o.at("smoother").get<std::string>();
        r.colors = o.at("colors").get<int>();
        r.sweeps = o.at("sweeps").get<int>();
        r.M = o.at("M").get<int>();
        r.iters_mean = o.at("iters_mean").get<double>();
        r.converged = o.at("converged").get<bool>();
        r.iters_cap = o.at("iters_cap").get<int>();
        r.solve_s = o.at("solve_s").get<double>();
        r.total_s = o.at("total_s").get<double>();
        r.e_p = number_from(o.at("e_p"));
        r.e_u = number_from(o.at("e_u"));
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_results_json(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream os = open_out(path);
    os << results_to_json(rows).dump(2) << '\n';
    if (!os) throw std::runtime_error("failed writing " + path);
}

std::string format_solver_table(const std::vector<ResultRow>& rows, const std::string& grid) {
    struct Column {
        int colors;
        std::string smoother;
        bool operator<(const Column& o) const {
            const bool pa = smoother_rank(smoother) < 2;
            const bool pb = smoother_rank(o.smoother) < 2;
            if (pa != pb) return pa;
            if (colors != o.colors) return colors < o.colors;
            return smoother_rank(smoother) < smoother_rank(o.smoother);
        }
    };
    std::set<Column> columns;
    std::set<int> Ms;
    std::set<int> sweeps;
    std::map<std::tuple<int, int, std::string, int>, const ResultRow*> cell;
    for (const ResultRow& r : rows) {
        if (r.grid != grid) continue;
        columns.insert({r.colors, r.smoother});
        Ms.insert(r.M);
        sweeps.insert(r.sweeps);
        cell[{r.M, r.sweeps, r.smoother, r.colors}] = &r;
    }
    std::ostringstream os;
    os << "grid " << grid << '\n';
    os << "sweeps";
    for (const Column& c : columns) {
        const bool pointwise = smoother_rank(c.smoother) < 2;
        std::string head = pointwise ? c.smoother : c.smoother + "/" + std::to_string(c.colors) + "c";
        os << "  " << head;
    }
    os << '\n';
    for (int M : Ms) {
        os << "M=" << M << '\n';
        for (int s : sweeps) {
            os << s;
            for (const Column& c : columns) {
                const auto it = cell.find({M, s, c.smoother, c.colors});
                os << "  ";
                if (it == cell.end()) {
                    os << "n/a";
                } else if (!it->second->converged) {
                    os << ">" << it->second->iters_cap << "(-)";
                } else {
                    os << fmt("%.1f", it->second->iters_mean) << '('
                       << fmt("%.1f", it->second->solve_s) << ')';
                }
            }
            os << '\n';
        }
    }
    return os.str();
}

void write_state_csv(const StructuredTriMesh& mesh, const State& s, const std::string& path) {
    if (s.p.size() != mesh.n_vertices() || s.u.size() != 2 * mesh.n_vertices())
        throw DimensionError("write_state_csv: state does not match the mesh");
    std::ofstream os = open_out(path);
    os << "x,y,p,u_x,u_y\n";
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        const auto& x = mesh.coord(v);
        os << fmt("%.10g", x[0]) << ',' << fmt("%.10g", x[1]) << ',' << fmt("%.17g", s.p[v])
           << ',' << fmt("%.17g", s.u[2 * v]) << ',' << fmt("%.17g", s.u[2 * v + 1]) << '\n';
    }
    if (!os) throw std::runtime_error("failed writing " + path);
}

json step_report_json(const StepReport& r) {
    return {{"step", r.step},
            {"picard_iterations", r.picard_iterations},
            {"solver_iterations", r.solver_iterations},
            {"solver_converged", r.solver_converged},
            {"residuals", r.solver_residuals},
            {"dp_norm", r.dp_norm},
            {"du_norm", r.du_norm},
            {"solve_s", r.solve_seconds}};
}

void write_step_reports(const std::vector<StepReport>& reports, const std::string& path) {
    std::ofstream os = open_out(path);
    for (const StepReport& r : reports) os << step_report_json(r).dump() << '\n';
    if (!os) throw std::runtime_error("failed writing " + path);
}

}  // namespace unsatporo
