#pragma once

#include "panelfx/binning.hpp"
#include "panelfx/panel.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace panelfx {

struct ModelSpec {
    std::string outcome = "outcome";
    std::vector<std::string> fe_dims;      // empty: take the frame's dims
    std::vector<std::string> cluster_dims; // empty: take the frame's dims
    double tol = 1e-8;
    long max_iter = 10000;
    int threads = 1;
};

struct FitResult {
    std::vector<std::string> terms; // retained columns, design order
    Eigen::VectorXd coef;
    Eigen::VectorXd residuals;
    std::vector<std::string> dropped;
    long iters = 0;
    long dof_model = 0;
    long dof_absorbed = 0;
    std::vector<std::string> fe_dims;
    std::vector<std::string> cluster_dims;

    // Demeaned system kept for inference and diagnostics.
    Eigen::MatrixXd demeaned_design; // retained columns only
    Eigen::VectorXd demeaned_outcome;

    bool has_term(const std::string& term) const;
    double coef_for(const std::string& term) const; // throws MissingTerm
    int term_index(const std::string& term) const;  // -1 when absent
};

// Alternating projections: sweep group-demeaning over every dimension until
// the largest within-group mean of any column is at most tol. A single
// dimension demeans exactly in one pass. Returns the sweep count.
long absorb(Eigen::MatrixXd& columns,
            const std::vector<const CategoricalColumn*>& dims, double tol,
            long max_iter, int threads = 1);

// Same solver over bare group codes (0..levels-1 per dimension).
struct GroupCodes {
    const std::vector<std::int32_t>* codes;
    std::size_t levels;
};
long absorb_codes(Eigen::MatrixXd& columns, const std::vector<GroupCodes>& dims,
                  double tol, long max_iter, int threads = 1);

struct OlsResult {
    Eigen::VectorXd coef;        // aligned with retained
    Eigen::VectorXd residuals;
    std::vector<int> retained;   // ascending original column indices
    std::vector<int> dropped;
};

// Least squares via the Gram system with diagonal-pivoted Cholesky rank
// detection (relative tolerance 1e-10) and one iterative-refinement pass.
OlsResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);

FitResult fit_model(const PanelFrame& frame, const BinnedDesign& design,
                    const ModelSpec& spec);

void write_fit_csv(const FitResult& fit, const std::string& path,
                   const std::string& manifest_id = "");
std::string format_run_log(const FitResult& fit);

} // namespace panelfx
