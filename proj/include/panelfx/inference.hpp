#pragma once

#include "panelfx/fe_solver.hpp"
#include "panelfx/panel.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace panelfx {

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99 = 2.5758293035489004;

struct ClusterVcv {
    Eigen::MatrixXd vcv; // over retained coefficients, fit order
    std::map<std::string, std::size_t> cluster_counts;
    bool psd_adjusted = false;
    double min_eigenvalue = 0.0; // before truncation

    double se(int term_index) const;
};

struct EffectRow {
    std::string term;
    double estimate = 0.0; // log points
    double se = 0.0;
    double p_value = 1.0;
    double pct_effect = 0.0;
    double pct_lo = 0.0;
    double pct_hi = 0.0;
};

struct EffectTable {
    std::vector<EffectRow> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    const EffectRow* find(const std::string& term) const;
};

// Multiway cluster-robust variance by inclusion-exclusion over the cluster
// dimensions, each one-way piece carrying its own G/(G-1) factor. Negative
// eigenvalues are truncated to zero and flagged.
ClusterVcv cluster_vcv(const FitResult& fit, const PanelFrame& frame);

double pct_effect(double estimate);

// Two-sided normal-reference p-value.
double normal_p(double z);

// Eigenvalue floor at zero; returns true when anything was clipped beyond
// rounding noise.
bool psd_truncate(Eigen::MatrixXd& m, double* min_eigenvalue = nullptr);

EffectTable effect_table(const FitResult& fit, const ClusterVcv& vcv);

void write_effect_csv(const EffectTable& table, const std::string& path,
                      const std::string& manifest_id = "");
EffectTable read_effect_csv(const std::string& path);

} // namespace panelfx
