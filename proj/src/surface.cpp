#include "panelfx/surface.hpp"

#include "panelfx/csv.hpp"
#include "panelfx/errors.hpp"
#include "panelfx/inference.hpp"
#include "panelfx/parallel.hpp"
#include "panelfx/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace panelfx {

SurfaceModel build_surface_design(const PanelFrame& frame,
                                  std::int64_t min_support) {
    SurfaceModel model;
    model.tmax_spec = surface_tmax_spec();
    model.precip_spec = surface_precip_spec();

    std::vector<BinSpec> specs = {model.tmax_spec, model.precip_spec};
    auto paper = default_paper_specs();
    for (const char* ctrl : {"trange", "cloud", "humidity"}) {
        const BinSpec* s = find_spec(paper, ctrl);
        if (!s) throw UnknownVariableError(ctrl);
        specs.push_back(*s);
    }
    BinnedDesign margins = expand_design(frame, specs);
    BinnedDesign cells = interact(margins, margins, model.tmax_spec,
                                  model.precip_spec, min_support);
    model.design = concat_designs(margins, cells);
    return model;
}

CellGrid make_grid(const BinSpec& tmax_spec, const BinSpec& precip_spec) {
    CellGrid g;
    g.tmax_spec = tmax_spec;
    g.precip_spec = precip_spec;
    g.nt = tmax_spec.bin_count();
    g.np = precip_spec.bin_count();
    return g;
}

namespace {

double coef_or_zero(const FitResult& fit, const std::string& term) {
    int idx = fit.term_index(term);
    if (idx >= 0) return fit.coef[idx];
    for (const auto& d : fit.dropped)
        if (d == term) return 0.0;
    throw MissingTermError(term);
}

std::string cell_term(const CellGrid& grid, int t, int p) {
    return "cell:" + grid.tmax_spec.label(t) + " × " + grid.precip_spec.label(p);
}

} // namespace

std::vector<double> simple_effects(const FitResult& fit, const CellGrid& grid) {
    std::vector<double> effects(std::size_t(grid.cell_count()), 0.0);
    for (int t = 0; t < grid.nt; ++t) {
        double bt = t == grid.tmax_spec.reference_bin
                        ? 0.0
                        : coef_or_zero(fit, "tmax:" + grid.tmax_spec.label(t));
        for (int p = 0; p < grid.np; ++p) {
            double bp = p == grid.precip_spec.reference_bin
                            ? 0.0
                            : coef_or_zero(fit, "precip:" + grid.precip_spec.label(p));
            double btp = (t == grid.tmax_spec.reference_bin ||
                          p == grid.precip_spec.reference_bin)
                             ? 0.0
                             : coef_or_zero(fit, cell_term(grid, t, p));
            effects[std::size_t(grid.index(t, p))] = bt + bp + btp;
        }
    }
    return effects;
}

BootstrapRun cluster_bootstrap(const PanelFrame& frame, const ModelSpec& spec,
                               long B, std::uint64_t seed,
                               std::int64_t min_support) {
    const auto& city = frame.cat("city");
    const std::size_t g_cities = city.level_count();
    if (g_cities < 2) throw TooFewClustersError(g_cities);
    if (B < 1) throw InvalidConfigError("bootstrap needs B >= 1");

    SurfaceModel model = build_surface_design(frame, min_support);
    CellGrid grid = make_grid(model.tmax_spec, model.precip_spec);

    ModelSpec point_spec = spec;
    point_spec.fe_dims = {"day", "city_month"};
    FitResult point = fit_model(frame, model.design, point_spec);

    BootstrapRun run;
    run.B = B;
    run.seed = seed;
    run.grid = grid;
    run.point_effects = simple_effects(point, grid);
    run.support.assign(std::size_t(grid.cell_count()), 0);
    {
        const auto& tb = model.design.assignments.at("tmax");
        const auto& pbv = model.design.assignments.at("precip");
        for (std::size_t i = 0; i < frame.rows; ++i)
            ++run.support[std::size_t(grid.index(tb[i], pbv[i]))];
    }

    // Column roles for turning replicate coefficients into cell effects.
    const std::size_t k = model.design.columns.size();
    std::vector<int> t_col(std::size_t(grid.nt), -1);
    std::vector<int> p_col(std::size_t(grid.np), -1);
    std::vector<int> cell_col(std::size_t(grid.cell_count()), -1);
    {
        std::unordered_map<std::string, int> t_bins, p_bins;
        for (int t = 0; t < grid.nt; ++t) t_bins[grid.tmax_spec.label(t)] = t;
        for (int p = 0; p < grid.np; ++p) p_bins[grid.precip_spec.label(p)] = p;
        for (std::size_t j = 0; j < k; ++j) {
            const auto& col = model.design.columns[j];
            if (col.variable == "tmax") {
                t_col[std::size_t(t_bins.at(col.label))] = int(j);
            } else if (col.variable == "precip") {
                p_col[std::size_t(p_bins.at(col.label))] = int(j);
            } else if (col.variable == "cell") {
                auto sep = col.label.find(" × ");
                int t = t_bins.at(col.label.substr(0, sep));
                int p = p_bins.at(col.label.substr(sep + 4));
                cell_col[std::size_t(grid.index(t, p))] = int(j);
            }
        }
    }

    const Eigen::Index n = Eigen::Index(frame.rows);
    Eigen::MatrixXd x0(n, Eigen::Index(k));
    for (std::size_t j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            x0(i, Eigen::Index(j)) = model.design.columns[j].values[std::size_t(i)];
    Eigen::VectorXd y0(n);
    {
        const auto& y = frame.num(spec.outcome.empty() ? "outcome" : spec.outcome);
        for (Eigen::Index i = 0; i < n; ++i) y0[i] = y[std::size_t(i)];
    }

    std::vector<std::vector<std::size_t>> city_rows(g_cities);
    for (std::size_t i = 0; i < frame.rows; ++i)
        city_rows[std::size_t(city.codes[i])].push_back(i);
    const auto& day_codes = frame.cat("day").codes;
    const auto& cm_codes = frame.cat("city_month").codes;
    const std::size_t cm_levels = frame.cat("city_month").level_count();

    const std::size_t n_cells = std::size_t(grid.cell_count());
    std::vector<double> draws(std::size_t(B) * n_cells, 0.0);
    std::vector<char> ok(std::size_t(B), 0);

    parallel_for(std::size_t(B), spec.threads, [&](std::size_t b) {
        Rng rng(mix_seed(seed, b));
        std::vector<std::size_t> picked(g_cities);
        std::size_t nb = 0;
        for (std::size_t o = 0; o < g_cities; ++o) {
            picked[o] = rng.below(g_cities);
            nb += city_rows[picked[o]].size();
        }
        try {
            Eigen::MatrixXd m(Eigen::Index(nb), Eigen::Index(k + 1));
            std::vector<std::int32_t> day(nb), cm(nb);
            std::unordered_map<std::int64_t, std::int32_t> cm_map, day_map;
            std::int32_t next_cm = 0, next_day = 0;
            std::size_t r = 0;
            for (std::size_t o = 0; o < g_cities; ++o) {
                for (std::size_t i : city_rows[picked[o]]) {
                    m.row(Eigen::Index(r)).head(Eigen::Index(k)) = x0.row(Eigen::Index(i));
                    m(Eigen::Index(r), Eigen::Index(k)) = y0[Eigen::Index(i)];
                    auto [dit, dfresh] = day_map.emplace(day_codes[i], next_day);
                    if (dfresh) ++next_day;
                    day[r] = dit->second;
                    std::int64_t key = std::int64_t(o) * std::int64_t(cm_levels) + cm_codes[i];
                    auto [cit, cfresh] = cm_map.emplace(key, next_cm);
                    if (cfresh) ++next_cm;
                    cm[r] = cit->second;
                    ++r;
                }
            }
            std::vector<GroupCodes> dims = {{&day, std::size_t(next_day)},
                                            {&cm, std::size_t(next_cm)}};
            absorb_codes(m, dims, spec.tol, spec.max_iter, 1);
            OlsResult sol = ols(m.col(Eigen::Index(k)), m.leftCols(Eigen::Index(k)));
            std::vector<double> by_col(k, 0.0);
            for (std::size_t j = 0; j < sol.retained.size(); ++j)
                by_col[std::size_t(sol.retained[j])] = sol.coef[Eigen::Index(j)];
            double* slot = &draws[b * n_cells];
            for (int t = 0; t < grid.nt; ++t) {
                double bt = t_col[std::size_t(t)] >= 0 ? by_col[std::size_t(t_col[std::size_t(t)])] : 0.0;
                for (int p = 0; p < grid.np; ++p) {
                    double bp = p_col[std::size_t(p)] >= 0 ? by_col[std::size_t(p_col[std::size_t(p)])] : 0.0;
                    int cc = cell_col[std::size_t(grid.index(t, p))];
                    double btp = cc >= 0 ? by_col[std::size_t(cc)] : 0.0;
                    slot[grid.index(t, p)] = bt + bp + btp;
                }
            }
            ok[b] = 1;
        } catch (const Error&) {
            ok[b] = 0;
        }
    });

    run.cell_draws.assign(n_cells, {});
    long kept = 0;
    for (long b = 0; b < B; ++b) {
        if (!ok[std::size_t(b)]) continue;
        ++kept;
        const double* slot = &draws[std::size_t(b) * n_cells];
        for (std::size_t c = 0; c < n_cells; ++c) run.cell_draws[c].push_back(slot[c]);
    }
    run.failures = B - kept;
    return run;
}

double quantile_linear(std::vector<double> values, double q) {
    if (values.empty()) throw InsufficientReplicatesError(0);
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    double h = double(values.size() - 1) * q;
    std::size_t i = std::size_t(h);
    if (i + 1 >= values.size()) return values.back();
    double frac = h - double(i);
    return values[i] + frac * (values[i + 1] - values[i]);
}

double median_of(std::vector<double> values) {
    if (values.empty()) throw InsufficientReplicatesError(0);
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

const SurfaceCell* SurfaceGrid::cell(int t, int p) const {
    for (const auto& c : cells)
        if (c.t_bin == t && c.p_bin == p) return &c;
    return nullptr;
}

SurfaceGrid star_grid(const BootstrapRun& run) {
    long kept = run.B - run.failures;
    if (kept < 100) throw InsufficientReplicatesError(kept);

    SurfaceGrid out;
    out.grid = run.grid;
    out.B = run.B;
    out.seed = run.seed;
    out.failures = run.failures;
    for (int t = 0; t < run.grid.nt; ++t) {
        for (int p = 0; p < run.grid.np; ++p) {
            SurfaceCell cell;
            cell.t_bin = t;
            cell.p_bin = p;
            cell.t_label = run.grid.tmax_spec.label(t);
            cell.p_label = run.grid.precip_spec.label(p);
            cell.support = run.support[std::size_t(run.grid.index(t, p))];
            if (run.grid.is_reference(t, p)) {
                out.cells.push_back(cell);
                continue;
            }
            const auto& draws = run.cell_draws[std::size_t(run.grid.index(t, p))];
            double med = median_of(draws);
            double lo = quantile_linear(draws, 0.005);
            double hi = quantile_linear(draws, 0.995);
            cell.median_pct = pct_effect(med);
            cell.lo_pct = pct_effect(lo);
            cell.hi_pct = pct_effect(hi);
            cell.starred = lo > 0.0 || hi < 0.0;
            out.cells.push_back(cell);
        }
    }
    return out;
}

void write_surface_csv(const SurfaceGrid& grid, const std::string& path,
                       const std::string& manifest_id) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    CsvWriter w(out);
    if (!manifest_id.empty()) w.comment("manifest: " + manifest_id);
    w.comment("meta replicates = " + std::to_string(grid.B));
    w.comment("meta failures = " + std::to_string(grid.failures));
    w.comment("meta seed = " + std::to_string(grid.seed));
    w.comment("meta interval = 0.5th to 99.5th percentile, linear interpolation");
    w.row({"t_bin", "p_bin", "median_pct", "lo_pct", "hi_pct", "starred", "support"});
    for (const auto& c : grid.cells)
        w.row({c.t_label, c.p_label, format_double(c.median_pct),
               format_double(c.lo_pct), format_double(c.hi_pct),
               c.starred ? "true" : "false", std::to_string(c.support)});
}

namespace {

std::size_t display_width(const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s)
        if ((ch & 0xC0) != 0x80) ++w;
    return w;
}

std::string pad_to(const std::string& s, std::size_t width) {
    std::string out = s;
    std::size_t w = display_width(s);
    while (w < width) {
        out += ' ';
        ++w;
    }
    return out;
}

} // namespace

std::string render_surface_text(const SurfaceGrid& grid) {
    const int nt = grid.grid.nt;
    const int np = grid.grid.np;
    std::size_t label_w = 0;
    for (int p = 0; p < np; ++p)
        label_w = std::max(label_w, display_width(grid.grid.precip_spec.label(p)));
    std::size_t col_w = 9;
    for (int t = 0; t < nt; ++t)
        col_w = std::max(col_w, display_width(grid.grid.tmax_spec.label(t)) + 2);

    std::ostringstream os;
    os << pad_to("", label_w + 2);
    for (int t = 0; t < nt; ++t)
        os << pad_to(grid.grid.tmax_spec.label(t), col_w);
    os << "\n";
    for (int p = np - 1; p >= 0; --p) {
        os << pad_to(grid.grid.precip_spec.label(p), label_w + 2);
        for (int t = 0; t < nt; ++t) {
            const SurfaceCell* c = grid.cell(t, p);
            char buf[32];
            if (grid.grid.is_reference(t, p)) {
                os << pad_to("ref", col_w);
            } else {
                std::snprintf(buf, sizeof(buf), "%+.1f%s", c->median_pct,
                              c->starred ? "*" : "");
                os << pad_to(buf, col_w);
            }
        }
        os << "\n";
    }
    os << "* = 0.5-99.5 percentile range excludes zero\n";
    return os.str();
}

} // namespace panelfx
