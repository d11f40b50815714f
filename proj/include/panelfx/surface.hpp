#pragma once

#include "panelfx/binning.hpp"
#include "panelfx/fe_solver.hpp"
#include "panelfx/panel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace panelfx {

// Eq. 2-style design: coarse tmax and precip marginals, their full
// interaction grid, and the remaining covariates as main effects.
struct SurfaceModel {
    BinSpec tmax_spec;
    BinSpec precip_spec;
    BinnedDesign design;
};

SurfaceModel build_surface_design(const PanelFrame& frame,
                                  std::int64_t min_support = 50);

// Cell index helpers: cells are (t, p) with t in [0, nt), p in [0, np).
struct CellGrid {
    BinSpec tmax_spec;
    BinSpec precip_spec;
    int nt = 0;
    int np = 0;

    int index(int t, int p) const { return t * np + p; }
    int cell_count() const { return nt * np; }
    bool is_reference(int t, int p) const {
        return t == tmax_spec.reference_bin && p == precip_spec.reference_bin;
    }
};

CellGrid make_grid(const BinSpec& tmax_spec, const BinSpec& precip_spec);

// effect(t, p) = b_t + b_p + b_txp, zero for reference or dropped terms.
std::vector<double> simple_effects(const FitResult& fit, const CellGrid& grid);

struct BootstrapRun {
    long B = 0;
    std::uint64_t seed = 0;
    long failures = 0;
    CellGrid grid;
    std::vector<std::vector<double>> cell_draws; // [cell][replicate kept]
    std::vector<double> point_effects;           // log points
    std::vector<std::int64_t> support;           // rows per cell, point data
};

BootstrapRun cluster_bootstrap(const PanelFrame& frame, const ModelSpec& spec,
                               long B, std::uint64_t seed,
                               std::int64_t min_support = 50);

struct SurfaceCell {
    int t_bin = 0;
    int p_bin = 0;
    std::string t_label;
    std::string p_label;
    double median_pct = 0.0;
    double lo_pct = 0.0;
    double hi_pct = 0.0;
    bool starred = false;
    std::int64_t support = 0;
};

struct SurfaceGrid {
    CellGrid grid;
    long B = 0;
    std::uint64_t seed = 0;
    long failures = 0;
    std::vector<SurfaceCell> cells;

    const SurfaceCell* cell(int t, int p) const;
};

SurfaceGrid star_grid(const BootstrapRun& run);

// Order statistics with linear interpolation between ranks.
double quantile_linear(std::vector<double> sorted_or_not, double q);
double median_of(std::vector<double> values);

void write_surface_csv(const SurfaceGrid& grid, const std::string& path,
                       const std::string& manifest_id = "");
std::string render_surface_text(const SurfaceGrid& grid);

} // namespace panelfx
