#include <doctest.h>

#include "panelfx/errors.hpp"
#include "panelfx/inference.hpp"
#include "panelfx/rng.hpp"
#include "panelfx/surface.hpp"
#include "panelfx/synth.hpp"

#include <algorithm>
#include <cmath>

using namespace panelfx;

TEST_CASE("quantile interpolation conventions") {
    std::vector<double> v = {4, 1, 3, 2};
    CHECK(quantile_linear(v, 0.0) == 1.0);
    CHECK(quantile_linear(v, 1.0) == 4.0);
    CHECK(quantile_linear(v, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_linear(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile_linear({5.0}, 0.9) == 5.0);
    CHECK(median_of({3, 1, 2}) == 2.0);
    CHECK(median_of({4, 1, 3, 2}) == doctest::Approx(2.5));
    CHECK_THROWS_AS(quantile_linear({}, 0.5), InsufficientReplicatesError);
    CHECK_THROWS_AS(median_of({}), InsufficientReplicatesError);
}

TEST_CASE("grid geometry and reference cell") {
    CellGrid g = make_grid(surface_tmax_spec(), surface_precip_spec());
    CHECK(g.nt == 10);
    CHECK(g.np == 6);
    CHECK(g.cell_count() == 60);
    CHECK(g.index(0, 0) == 0);
    CHECK(g.index(1, 0) == 6);
    CHECK(g.is_reference(5, 0));
    CHECK(!g.is_reference(5, 1));
    CHECK(!g.is_reference(0, 0));
}

namespace {

SynthConfig surface_cfg(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n_cities = 8;
    cfg.n_days = 90;
    cfg.continuous = true;
    cfg.noise_sd = 0.0;
    // keep city means close so every city populates the planted cells,
    // otherwise replicates that omit a supporting city draw exact zeros
    cfg.temp_mean_low = 2.0;
    cfg.temp_mean_high = 8.0;
    cfg.precip_prob = 0.5;
    cfg.precip_mean_cm = 1.0;
    cfg.planted_surface[{3, 1}] = 0.4;   // [5,10)C with (0,0.5] cm
    cfg.planted_surface[{1, 1}] = -0.15; // [-5,0)C with (0,0.5] cm
    return cfg;
}

PanelFrame make_frame(const SynthConfig& cfg) {
    SynthResult s = generate(cfg);
    PanelFrame f = build_frame(s.raw);
    validate(f);
    return f;
}

} // namespace

TEST_CASE("noiseless surface fit recovers planted cells through simple_effects") {
    SynthConfig cfg = surface_cfg(401);
    PanelFrame f = make_frame(cfg);
    SurfaceModel model = build_surface_design(f, 1);
    FitResult fit = fit_model(f, model.design, ModelSpec{});
    CellGrid grid = make_grid(model.tmax_spec, model.precip_spec);
    std::vector<double> eff = simple_effects(fit, grid);

    CHECK(eff[std::size_t(grid.index(5, 0))] == 0.0); // reference
    CHECK(eff[std::size_t(grid.index(3, 1))] == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(eff[std::size_t(grid.index(1, 1))] == doctest::Approx(-0.15).epsilon(1e-6));
    // a cell with support but nothing planted stays at zero
    CHECK(std::fabs(eff[std::size_t(grid.index(4, 1))]) < 1e-6);
}

TEST_CASE("bootstrap runs are deterministic and complete") {
    SynthConfig cfg = surface_cfg(402);
    cfg.noise_sd = 0.05;
    PanelFrame f = make_frame(cfg);
    ModelSpec spec;
    BootstrapRun a = cluster_bootstrap(f, spec, 120, 99, 1);
    BootstrapRun b = cluster_bootstrap(f, spec, 120, 99, 1);

    CHECK(a.B == 120);
    CHECK(a.failures == b.failures);
    REQUIRE(a.cell_draws.size() == std::size_t(a.grid.cell_count()));
    for (std::size_t c = 0; c < a.cell_draws.size(); ++c) {
        REQUIRE(a.cell_draws[c].size() == std::size_t(a.B - a.failures));
        CHECK(a.cell_draws[c] == b.cell_draws[c]);
    }

    BootstrapRun other = cluster_bootstrap(f, spec, 120, 100, 1);
    bool any_diff = false;
    for (std::size_t c = 0; c < a.cell_draws.size() && !any_diff; ++c)
        if (a.cell_draws[c] != other.cell_draws[c]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("bootstrap point run matches a direct fit and counts support") {
    SynthConfig cfg = surface_cfg(403);
    cfg.noise_sd = 0.03;
    PanelFrame f = make_frame(cfg);
    ModelSpec spec;
    BootstrapRun run = cluster_bootstrap(f, spec, 120, 7, 1);

    SurfaceModel model = build_surface_design(f, 1);
    ModelSpec point_spec;
    point_spec.fe_dims = {"day", "city_month"};
    FitResult fit = fit_model(f, model.design, point_spec);
    CellGrid grid = make_grid(model.tmax_spec, model.precip_spec);
    std::vector<double> eff = simple_effects(fit, grid);
    REQUIRE(run.point_effects.size() == eff.size());
    for (std::size_t c = 0; c < eff.size(); ++c)
        CHECK(run.point_effects[c] == doctest::Approx(eff[c]).epsilon(1e-12));

    std::vector<std::int64_t> occupancy(eff.size(), 0);
    for (std::size_t i = 0; i < f.rows; ++i) {
        int t = model.tmax_spec.assign(f.num("tmax")[i]);
        int p = model.precip_spec.assign(f.num("precip")[i]);
        ++occupancy[std::size_t(grid.index(t, p))];
    }
    CHECK(run.support == occupancy);
}

TEST_CASE("star grid summarizes draws with the documented conventions") {
    SynthConfig cfg = surface_cfg(404);
    cfg.noise_sd = 0.05;
    PanelFrame f = make_frame(cfg);
    BootstrapRun run = cluster_bootstrap(f, ModelSpec{}, 150, 11, 1);
    SurfaceGrid grid = star_grid(run);

    CHECK(grid.B == 150);
    CHECK(grid.failures == run.failures);
    REQUIRE(grid.cells.size() == std::size_t(run.grid.cell_count()));

    const SurfaceCell* ref = grid.cell(run.grid.tmax_spec.reference_bin,
                                       run.grid.precip_spec.reference_bin);
    REQUIRE(ref != nullptr);
    CHECK(ref->median_pct == 0.0);
    CHECK(!ref->starred);

    int starred_count = 0;
    for (const auto& cell : grid.cells) {
        if (run.grid.is_reference(cell.t_bin, cell.p_bin)) continue;
        const auto& draws =
            run.cell_draws[std::size_t(run.grid.index(cell.t_bin, cell.p_bin))];
        double lo = quantile_linear(draws, 0.005);
        double hi = quantile_linear(draws, 0.995);
        CHECK(cell.median_pct == doctest::Approx(pct_effect(median_of(draws))));
        CHECK(cell.lo_pct == doctest::Approx(pct_effect(lo)));
        CHECK(cell.hi_pct == doctest::Approx(pct_effect(hi)));
        CHECK(cell.lo_pct <= cell.hi_pct);
        CHECK(cell.starred == (lo > 0.0 || hi < 0.0));
        if (cell.starred) ++starred_count;
    }
    // the planted 0.4 log-point cell dwarfs the noise, so it must be starred
    const SurfaceCell* planted = grid.cell(3, 1);
    REQUIRE(planted != nullptr);
    CHECK(planted->starred);
    CHECK(starred_count >= 1);
}

TEST_CASE("identical draws collapse the interval") {
    BootstrapRun run;
    run.B = 120;
    run.failures = 0;
    run.grid = make_grid(surface_tmax_spec(), surface_precip_spec());
    run.support.assign(std::size_t(run.grid.cell_count()), 10);
    run.point_effects.assign(std::size_t(run.grid.cell_count()), 0.0);
    run.cell_draws.assign(std::size_t(run.grid.cell_count()),
                          std::vector<double>(120, 0.0));
    auto& planted = run.cell_draws[std::size_t(run.grid.index(2, 3))];
    planted.assign(120, 0.25);
    SurfaceGrid grid = star_grid(run);
    const SurfaceCell* cell = grid.cell(2, 3);
    CHECK(cell->lo_pct == cell->hi_pct);
    CHECK(cell->median_pct == doctest::Approx(pct_effect(0.25)));
    CHECK(cell->starred);
    const SurfaceCell* flat = grid.cell(3, 3);
    CHECK(flat->lo_pct == 0.0);
    CHECK(flat->hi_pct == 0.0);
    CHECK(!flat->starred); // interval touching zero is not starred
}

TEST_CASE("bootstrap input validation") {
    SynthConfig cfg = surface_cfg(405);
    cfg.n_cities = 1;
    PanelFrame one = make_frame(cfg);
    CHECK_THROWS_AS(cluster_bootstrap(one, ModelSpec{}, 100, 1, 1),
                    TooFewClustersError);

    SynthConfig cfg2 = surface_cfg(406);
    PanelFrame f = make_frame(cfg2);
    CHECK_THROWS_AS(cluster_bootstrap(f, ModelSpec{}, 0, 1, 1),
                    InvalidConfigError);
}

TEST_CASE("star grid refuses thin replicate sets") {
    BootstrapRun run;
    run.B = 90;
    run.failures = 0;
    run.grid = make_grid(surface_tmax_spec(), surface_precip_spec());
    run.support.assign(std::size_t(run.grid.cell_count()), 1);
    run.point_effects.assign(std::size_t(run.grid.cell_count()), 0.0);
    run.cell_draws.assign(std::size_t(run.grid.cell_count()),
                          std::vector<double>(90, 0.0));
    CHECK_THROWS_AS(star_grid(run), InsufficientReplicatesError);
}

TEST_CASE("text rendering shows the grid") {
    SynthConfig cfg = surface_cfg(407);
    cfg.noise_sd = 0.02;
    PanelFrame f = make_frame(cfg);
    BootstrapRun run = cluster_bootstrap(f, ModelSpec{}, 120, 5, 1);
    SurfaceGrid grid = star_grid(run);
    std::string text = render_surface_text(grid);
    CHECK(text.find("15–20°C") != std::string::npos);
    CHECK(text.find("0cm") != std::string::npos);
    CHECK(text.find("> 2 cm") != std::string::npos);
    CHECK(text.find('*') != std::string::npos);
}
