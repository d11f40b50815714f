#include <doctest.h>

#include "panelfx/binning.hpp"
#include "panelfx/errors.hpp"
#include "panelfx/fe_solver.hpp"
#include "panelfx/inference.hpp"
#include "panelfx/rng.hpp"
#include "panelfx/synth.hpp"

#include "oracles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>

using namespace panelfx;

TEST_CASE("pct_effect transforms log points to percent") {
    CHECK(pct_effect(std::log(1.0446)) == doctest::Approx(4.46).epsilon(1e-10));
    CHECK(pct_effect(0.0) == 0.0);
    CHECK(pct_effect(std::log(2.0)) == doctest::Approx(100.0));
    CHECK(pct_effect(-std::log(2.0)) == doctest::Approx(-50.0));
}

TEST_CASE("normal reference p-values at the pinned quantiles") {
    CHECK(normal_p(0.0) == doctest::Approx(1.0));
    CHECK(normal_p(kZ95) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(normal_p(-kZ95) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(normal_p(kZ99) == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("psd truncation clips negative eigenvalues only") {
    Eigen::MatrixXd ok(2, 2);
    ok << 2, 0.5, 0.5, 1;
    Eigen::MatrixXd copy = ok;
    double min_ev = 0;
    CHECK(!psd_truncate(copy, &min_ev));
    CHECK((copy - ok).cwiseAbs().maxCoeff() == 0.0);
    CHECK(min_ev > 0);

    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1; // eigenvalues 3 and -1
    CHECK(psd_truncate(bad, &min_ev));
    CHECK(min_ev == doctest::Approx(-1.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bad);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

namespace {

FitResult quick_fit(const PanelFrame& f, const BinnedDesign& d,
                    std::vector<std::string> cluster_dims = {}) {
    ModelSpec spec;
    if (!cluster_dims.empty()) spec.cluster_dims = std::move(cluster_dims);
    return fit_model(f, d, spec);
}

} // namespace

TEST_CASE("singleton clustering reduces to the HC sandwich") {
    Rng rng(61);
    PanelFrame f = oracle::random_frame(rng, 1, 80); // one city: day is per-row
    BinnedDesign d = oracle::random_design(rng, f.rows, 2);
    ModelSpec spec;
    spec.fe_dims = {"city_month"};
    spec.cluster_dims = {"day"};
    FitResult fit = fit_model(f, d, spec);
    ClusterVcv vcv = cluster_vcv(fit, f);

    const Eigen::MatrixXd& x = fit.demeaned_design;
    double n = double(x.rows());
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(2, 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::VectorXd s = fit.residuals[i] * x.row(i).transpose();
        meat += s * s.transpose();
    }
    Eigen::MatrixXd gram_inv = (x.transpose() * x).inverse();
    Eigen::MatrixXd hc = (n / (n - 1.0)) * gram_inv * meat * gram_inv;
    CHECK((vcv.vcv - hc).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(!vcv.psd_adjusted);
    CHECK(vcv.cluster_counts.at("day") == f.rows);
}

TEST_CASE("multiway estimate matches the brute-force inclusion-exclusion") {
    Rng rng(67);
    for (int trial = 0; trial < 6; ++trial) {
        PanelFrame f = oracle::random_frame(rng, 3 + rng.below(4),
                                            8 + rng.below(10),
                                            trial % 2 ? 0.7 : 1.0);
        BinnedDesign d = oracle::random_design(rng, f.rows, 2 + int(rng.below(2)));
        std::vector<std::string> dims =
            trial % 3 == 0 ? std::vector<std::string>{"city", "day", "city_month"}
                           : std::vector<std::string>{"city", "day"};
        FitResult fit = quick_fit(f, d, dims);
        ClusterVcv vcv = cluster_vcv(fit, f);
        Eigen::MatrixXd ref = oracle::brute_cluster_vcv(fit, f);
        if (vcv.psd_adjusted) psd_truncate(ref);
        double scale = std::max(1e-12, ref.cwiseAbs().maxCoeff());
        CHECK((vcv.vcv - ref).cwiseAbs().maxCoeff() / scale < 1e-8);
    }
}

TEST_CASE("refining dimension pair agrees with the brute force on 50 rows") {
    Rng rng(71);
    PanelFrame f = oracle::random_frame(rng, 5, 10); // 50 rows
    REQUIRE(f.rows == 50);
    BinnedDesign d = oracle::random_design(rng, f.rows, 2);
    // city_month refines city
    FitResult fit = quick_fit(f, d, {"city", "city_month"});
    ClusterVcv vcv = cluster_vcv(fit, f);
    Eigen::MatrixXd ref = oracle::brute_cluster_vcv(fit, f);
    if (vcv.psd_adjusted) psd_truncate(ref);
    double scale = std::max(1e-12, ref.cwiseAbs().maxCoeff());
    CHECK((vcv.vcv - ref).cwiseAbs().maxCoeff() / scale < 1e-8);
}

TEST_CASE("a single-level cluster dimension is an error") {
    Rng rng(73);
    PanelFrame f = oracle::random_frame(rng, 1, 30);
    BinnedDesign d = oracle::random_design(rng, f.rows, 1);
    ModelSpec spec;
    spec.fe_dims = {"city_month"};
    spec.cluster_dims = {"city", "day"}; // city has a single level here
    FitResult fit = fit_model(f, d, spec);
    CHECK_THROWS_AS(cluster_vcv(fit, f), SingleClusterError);
}

TEST_CASE("effect table rows, intervals, and metadata") {
    Rng rng(79);
    PanelFrame f = oracle::random_frame(rng, 6, 20);
    BinnedDesign d = oracle::random_design(rng, f.rows, 3);
    FitResult fit = quick_fit(f, d);
    ClusterVcv vcv = cluster_vcv(fit, f);
    EffectTable table = effect_table(fit, vcv);
    REQUIRE(table.rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const EffectRow& r = table.rows[i];
        CHECK(r.term == fit.terms[i]);
        CHECK(r.estimate == fit.coef[Eigen::Index(i)]);
        CHECK(r.se == vcv.se(int(i)));
        CHECK(r.pct_lo < r.pct_effect);
        CHECK(r.pct_effect < r.pct_hi);
        CHECK(r.pct_effect == doctest::Approx(pct_effect(r.estimate)));
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);
    }
    auto meta = [&](const std::string& key) -> std::string {
        for (const auto& [k, v] : table.metadata)
            if (k == key) return v;
        return "<missing>";
    };
    CHECK(meta("small_sample") == "per-dimension G/(G-1)");
    CHECK(meta("reference_distribution") == "normal");
    CHECK(meta("ci_level") == "95");
    CHECK(meta("clusters.city") == std::to_string(f.cat("city").level_count()));
    CHECK(meta("clusters.day") == std::to_string(f.cat("day").level_count()));
    CHECK(meta("psd_adjusted") == (vcv.psd_adjusted ? "true" : "false"));
    CHECK(table.find(fit.terms[1]) != nullptr);
    CHECK(table.find("nope") == nullptr);
}

TEST_CASE("zero-variance terms get the degenerate p-value") {
    FitResult fit;
    fit.terms = {"a", "b"};
    fit.coef = Eigen::Vector2d(0.5, 0.0);
    ClusterVcv vcv;
    vcv.vcv = Eigen::MatrixXd::Zero(2, 2);
    EffectTable table = effect_table(fit, vcv);
    CHECK(table.rows[0].p_value == 0.0); // nonzero estimate, no variance
    CHECK(table.rows[1].p_value == 1.0); // zero estimate, no variance
}

TEST_CASE("effect csv round trips") {
    Rng rng(83);
    PanelFrame f = oracle::random_frame(rng, 5, 12);
    BinnedDesign d = oracle::random_design(rng, f.rows, 2);
    FitResult fit = quick_fit(f, d);
    ClusterVcv vcv = cluster_vcv(fit, f);
    EffectTable table = effect_table(fit, vcv);
    std::string path = "/tmp/panelfx_test_effects.csv";
    write_effect_csv(table, path, "beef");
    EffectTable back = read_effect_csv(path);
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        CHECK(back.rows[i].term == table.rows[i].term);
        CHECK(back.rows[i].estimate == table.rows[i].estimate);
        CHECK(back.rows[i].se == table.rows[i].se);
        CHECK(back.rows[i].pct_hi == table.rows[i].pct_hi);
    }
    std::remove(path.c_str());
}

TEST_CASE("rejection rate for a planted-null term stays near nominal") {
    // 200 synthetic panels with nothing planted. The cloud bin is the
    // cleanest null term for a size check: its draws are independent across
    // rows, so every cluster carries support and the clustered variance is
    // in its asymptotic regime at this panel size. (Weather bins driven by
    // the AR(1) temperature clump inside a few cold cities and over-reject
    // slightly in panels this small; that is a property of few-cluster
    // inference, not of the estimator.)
    SynthConfig base;
    base.n_cities = 20;
    base.n_days = 90;
    base.noise_sd = 0.05;
    base.temp_mean_low = -6.0;
    base.temp_mean_high = 10.0;
    base.continuous = true;

    auto specs = default_paper_specs();
    const BinSpec* cspec = find_spec(specs, "cloud");
    std::string term = "cloud:" + cspec->label(cspec->assign(30.0));

    int rejections = 0, used = 0;
    for (int rep = 0; rep < 200; ++rep) {
        SynthConfig cfg = base;
        cfg.seed = mix_seed(9000, std::uint64_t(rep));
        SynthResult synth = generate(cfg);
        PanelFrame f = build_frame(synth.raw);
        validate(f);
        BinnedDesign d = expand_design(f, specs);
        FitResult fit = fit_model(f, d, ModelSpec{});
        if (!fit.has_term(term)) continue;
        ClusterVcv vcv = cluster_vcv(fit, f);
        EffectTable table = effect_table(fit, vcv);
        const EffectRow* row = table.find(term);
        REQUIRE(row != nullptr);
        ++used;
        if (row->p_value < 0.05) ++rejections;
    }
    CHECK(used == 200);
    double rate = double(rejections) / double(used);
    CHECK(rate >= 0.02);
    CHECK(rate <= 0.09);
}
