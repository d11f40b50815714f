#pragma once

#include "panelfx/fe_solver.hpp"
#include "panelfx/inference.hpp"
#include "panelfx/panel.hpp"
#include "panelfx/surface.hpp"

#include <string>
#include <vector>

namespace panelfx {

struct EventSpec {
    std::string name;
    std::string city_id; // matches a city label, or any "<city_id>@platform"
    std::vector<std::string> dates;
};

struct ResidualSeries {
    std::vector<double> values; // FE-residualized log outcome
    double sd = 0.0;            // sample standard deviation, log points
    long iters = 0;

    double sd_pct() const { return 100.0 * sd; }
};

// FE-only regression: absorb the dims from the outcome, nothing else.
ResidualSeries residualize(const PanelFrame& frame,
                           std::vector<std::string> fe_dims = {},
                           double tol = 1e-10, long max_iter = 10000);

double sd_multiple(double effect_pct, double residual_sd_pct);

// "≈ 5 standard deviations" at integer rounding.
std::string sd_multiple_text(double multiple);

struct EventFit {
    FitResult fit;
    ClusterVcv vcv;
    EffectTable table;
    SurfaceModel model; // design the fit ran on, events appended last
    std::vector<std::string> event_terms;
};

// Eq. 2-style fit with one indicator column per event appended to the
// weather design. Event columns absorbed by the FEs are an error.
EventFit fit_with_events(const PanelFrame& frame, const ModelSpec& spec,
                         const std::vector<EventSpec>& events,
                         std::int64_t min_support = 50);

std::vector<EventSpec> read_events_csv(const std::string& path);

struct ComparisonRow {
    std::string label;
    double pct_effect = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Event bars plus one combined-weather bar (marginals + interaction of the
// given cell, variance from the linear combination).
std::vector<ComparisonRow> event_comparison(const EventFit& efit, int t_bin,
                                            int p_bin,
                                            const std::string& weather_label);

void write_comparison_csv(const std::vector<ComparisonRow>& rows,
                          const std::string& path,
                          const std::string& manifest_id = "");

} // namespace panelfx
