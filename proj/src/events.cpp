#include "panelfx/events.hpp"

#include "panelfx/csv.hpp"
#include "panelfx/dates.hpp"
#include "panelfx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

namespace panelfx {

ResidualSeries residualize(const PanelFrame& frame,
                           std::vector<std::string> fe_dims, double tol,
                           long max_iter) {
    if (!frame.validated) throw ValidationError("frame must be validated first");
    if (fe_dims.empty()) fe_dims = frame.fe_dims;

    const Eigen::Index n = Eigen::Index(frame.rows);
    Eigen::MatrixXd m(n, 1);
    const auto& y = frame.num("outcome");
    for (Eigen::Index i = 0; i < n; ++i) m(i, 0) = y[std::size_t(i)];

    std::vector<const CategoricalColumn*> dims;
    for (const auto& name : fe_dims) dims.push_back(&frame.cat(name));

    ResidualSeries series;
    series.iters = absorb(m, dims, tol, max_iter);
    series.values.resize(std::size_t(n));
    double mean = m.col(0).mean();
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        series.values[std::size_t(i)] = m(i, 0);
        ss += (m(i, 0) - mean) * (m(i, 0) - mean);
    }
    series.sd = n > 1 ? std::sqrt(ss / double(n - 1)) : 0.0;
    return series;
}

double sd_multiple(double effect_pct, double residual_sd_pct) {
    if (residual_sd_pct == 0.0) throw ZeroSdError();
    return effect_pct / residual_sd_pct;
}

std::string sd_multiple_text(double multiple) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "≈ %.0f standard deviations", multiple);
    return buf;
}

namespace {

std::vector<double> event_indicator(const PanelFrame& frame,
                                    const EventSpec& event) {
    const auto& city = frame.cat("city");
    const auto& date_code = frame.num("date_code");

    std::vector<char> city_match(city.levels.size(), 0);
    bool any_city = false;
    for (std::size_t l = 0; l < city.levels.size(); ++l) {
        const auto& label = city.levels[l];
        if (label == event.city_id ||
            label.rfind(event.city_id + "@", 0) == 0) {
            city_match[l] = 1;
            any_city = true;
        }
    }
    if (!any_city)
        throw ValidationError("event " + event.name + ": unknown city " + event.city_id);

    double lo = date_code[0], hi = date_code[0];
    for (double d : date_code) {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    std::unordered_set<std::int64_t> dates;
    for (const auto& iso : event.dates) {
        std::int64_t d = parse_date(iso);
        if (double(d) < lo || double(d) > hi)
            throw ValidationError("event " + event.name + ": date " + iso +
                                  " outside the panel span");
        dates.insert(d);
    }

    std::vector<double> col(frame.rows, 0.0);
    for (std::size_t i = 0; i < frame.rows; ++i)
        if (city_match[std::size_t(city.codes[i])] &&
            dates.count(std::int64_t(date_code[i])))
            col[i] = 1.0;
    return col;
}

} // namespace

EventFit fit_with_events(const PanelFrame& frame, const ModelSpec& spec,
                         const std::vector<EventSpec>& events,
                         std::int64_t min_support) {
    EventFit out;
    out.model = build_surface_design(frame, min_support);

    for (const auto& event : events) {
        DesignColumn col;
        col.variable = "event";
        col.label = event.name;
        col.name = "event:" + event.name;
        col.values = event_indicator(frame, event);
        for (double v : col.values) col.support += v > 0 ? 1 : 0;
        out.model.design.columns.push_back(std::move(col));
        out.event_terms.push_back("event:" + event.name);
    }

    out.fit = fit_model(frame, out.model.design, spec);
    for (const auto& term : out.event_terms)
        if (!out.fit.has_term(term))
            throw CollinearEventError(term.substr(6));

    out.vcv = cluster_vcv(out.fit, frame);
    out.table = effect_table(out.fit, out.vcv);
    return out;
}

std::vector<EventSpec> read_events_csv(const std::string& path) {
    CsvTable csv = read_csv(path);
    int c_name = csv.column_index("name");
    int c_city = csv.column_index("city_id");
    int c_date = csv.column_index("date");
    if (c_name < 0) throw MissingColumnError("name");
    if (c_city < 0) throw MissingColumnError("city_id");
    if (c_date < 0) throw MissingColumnError("date");

    std::vector<EventSpec> events;
    for (const auto& row : csv.rows) {
        const std::string& name = row[std::size_t(c_name)];
        const std::string& city = row[std::size_t(c_city)];
        EventSpec* spec = nullptr;
        for (auto& e : events)
            if (e.name == name && e.city_id == city) spec = &e;
        if (!spec) {
            events.push_back({name, city, {}});
            spec = &events.back();
        }
        spec->dates.push_back(trim(row[std::size_t(c_date)]));
    }
    return events;
}

std::vector<ComparisonRow> event_comparison(const EventFit& efit, int t_bin,
                                            int p_bin,
                                            const std::string& weather_label) {
    const CellGrid grid = make_grid(efit.model.tmax_spec, efit.model.precip_spec);
    std::vector<ComparisonRow> rows;

    for (const auto& term : efit.event_terms) {
        const EffectRow* r = efit.table.find(term);
        if (!r) throw MissingTermError(term);
        rows.push_back({term.substr(6), r->pct_effect, r->pct_lo, r->pct_hi});
    }

    // Combined weather effect: sum the cell's marginal and interaction
    // coefficients, variance from the same linear combination of the VCV.
    std::vector<std::string> terms;
    if (t_bin != grid.tmax_spec.reference_bin)
        terms.push_back("tmax:" + grid.tmax_spec.label(t_bin));
    if (p_bin != grid.precip_spec.reference_bin)
        terms.push_back("precip:" + grid.precip_spec.label(p_bin));
    if (t_bin != grid.tmax_spec.reference_bin &&
        p_bin != grid.precip_spec.reference_bin)
        terms.push_back("cell:" + grid.tmax_spec.label(t_bin) + " × " +
                        grid.precip_spec.label(p_bin));

    double combined = 0.0;
    std::vector<int> idx;
    for (const auto& term : terms) {
        int i = efit.fit.term_index(term);
        if (i < 0) continue; // support-dropped pieces contribute zero
        combined += efit.fit.coef[i];
        idx.push_back(i);
    }
    double var = 0.0;
    for (int a : idx)
        for (int b : idx) var += efit.vcv.vcv(a, b);
    double se = var > 0 ? std::sqrt(var) : 0.0;
    rows.push_back({weather_label, pct_effect(combined),
                    pct_effect(combined - kZ95 * se),
                    pct_effect(combined + kZ95 * se)});
    return rows;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows,
                          const std::string& path,
                          const std::string& manifest_id) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    CsvWriter w(out);
    if (!manifest_id.empty()) w.comment("manifest: " + manifest_id);
    w.comment("meta interval = 95% normal, clustered standard errors");
    w.row({"label", "pct_effect", "lo", "hi"});
    for (const auto& r : rows)
        w.row({r.label, format_double(r.pct_effect), format_double(r.lo),
               format_double(r.hi)});
}

} // namespace panelfx
