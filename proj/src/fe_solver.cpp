#include "panelfx/fe_solver.hpp"

#include "panelfx/csv.hpp"
#include "panelfx/errors.hpp"
#include "panelfx/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace panelfx {

bool FitResult::has_term(const std::string& term) const {
    return term_index(term) >= 0;
}

int FitResult::term_index(const std::string& term) const {
    for (std::size_t i = 0; i < terms.size(); ++i)
        if (terms[i] == term) return int(i);
    return -1;
}

double FitResult::coef_for(const std::string& term) const {
    int i = term_index(term);
    if (i < 0) throw MissingTermError(term);
    return coef[i];
}

namespace {

struct DimInfo {
    const std::vector<std::int32_t>* codes;
    std::vector<double> inv_count;
};

double sweep_dim(Eigen::MatrixXd& m, const DimInfo& dim, int threads,
                 bool subtract) {
    const std::int64_t n = m.rows();
    const std::size_t levels = dim.inv_count.size();
    const auto& codes = *dim.codes;
    std::vector<double> worst(std::size_t(m.cols()), 0.0);
    parallel_for(std::size_t(m.cols()), threads, [&](std::size_t j) {
        std::vector<double> sums(levels, 0.0);
        double* col = m.col(Eigen::Index(j)).data();
        for (std::int64_t i = 0; i < n; ++i) sums[codes[i]] += col[i];
        double w = 0.0;
        for (std::size_t g = 0; g < levels; ++g) {
            sums[g] *= dim.inv_count[g];
            w = std::max(w, std::fabs(sums[g]));
        }
        if (subtract)
            for (std::int64_t i = 0; i < n; ++i) col[i] -= sums[codes[i]];
        worst[j] = w;
    });
    double w = 0.0;
    for (double v : worst) w = std::max(w, v);
    return w;
}

} // namespace

long absorb(Eigen::MatrixXd& columns,
            const std::vector<const CategoricalColumn*>& dims, double tol,
            long max_iter, int threads) {
    std::vector<GroupCodes> codes;
    codes.reserve(dims.size());
    for (const auto* dim : dims) codes.push_back({&dim->codes, dim->level_count()});
    return absorb_codes(columns, codes, tol, max_iter, threads);
}

long absorb_codes(Eigen::MatrixXd& columns, const std::vector<GroupCodes>& dims,
                  double tol, long max_iter, int threads) {
    if (dims.empty()) throw InvalidConfigError("absorb: no fixed-effect dimensions");
    if (!(tol > 0)) throw InvalidConfigError("absorb: tol must be positive");
    const std::int64_t n = columns.rows();

    std::vector<DimInfo> infos;
    infos.reserve(dims.size());
    for (const auto& dim : dims) {
        if (std::int64_t(dim.codes->size()) != n)
            throw DimensionMismatchError("fixed-effect dimension rows");
        DimInfo info;
        info.codes = dim.codes;
        std::vector<std::int64_t> counts(dim.levels, 0);
        for (auto c : *dim.codes) ++counts[c];
        info.inv_count.resize(counts.size());
        for (std::size_t g = 0; g < counts.size(); ++g) {
            if (counts[g] == 0)
                throw ValidationError("fixed-effect dimension has an empty level");
            info.inv_count[g] = 1.0 / double(counts[g]);
        }
        infos.push_back(std::move(info));
    }

    if (infos.size() == 1) {
        sweep_dim(columns, infos[0], threads, true);
        return 1;
    }

    double achieved = 0.0;
    for (long it = 1; it <= max_iter; ++it) {
        for (const auto& info : infos) sweep_dim(columns, info, threads, true);
        achieved = 0.0;
        for (const auto& info : infos)
            achieved = std::max(achieved, sweep_dim(columns, info, threads, false));
        if (achieved <= tol) return it;
    }
    throw NoConvergenceError(max_iter, achieved);
}

namespace {

// Diagonal-pivoted Cholesky on a copy of the Gram matrix; fills `order` with
// the pivot sequence and returns the numerical rank under the relative
// tolerance. Columns beyond the rank are collinear with earlier ones.
int pivoted_rank(Eigen::MatrixXd gram, std::vector<int>& order, double rel_tol) {
    const int k = int(gram.rows());
    order.resize(std::size_t(k));
    for (int i = 0; i < k; ++i) order[std::size_t(i)] = i;

    double max_diag0 = 0.0;
    for (int i = 0; i < k; ++i) max_diag0 = std::max(max_diag0, gram(i, i));
    if (max_diag0 <= 0.0) return 0;
    const double threshold = rel_tol * max_diag0;

    for (int s = 0; s < k; ++s) {
        int best = s;
        for (int i = s + 1; i < k; ++i)
            if (gram(i, i) > gram(best, best)) best = i;
        if (best != s) {
            gram.row(s).swap(gram.row(best));
            gram.col(s).swap(gram.col(best));
            std::swap(order[std::size_t(s)], order[std::size_t(best)]);
        }
        double d = gram(s, s);
        if (!(d > threshold)) return s;
        double root = std::sqrt(d);
        gram(s, s) = root;
        for (int i = s + 1; i < k; ++i) gram(i, s) /= root;
        for (int j = s + 1; j < k; ++j)
            for (int i = j; i < k; ++i) gram(i, j) -= gram(i, s) * gram(j, s);
    }
    return k;
}

} // namespace

OlsResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
    const Eigen::Index n = y.size();
    if (n == 0) throw ZeroRowsError();
    if (X.rows() != n) throw DimensionMismatchError("design rows vs outcome");
    if (X.cols() == 0) throw EmptyDesignError();

    Eigen::MatrixXd gram = X.transpose() * X;
    std::vector<int> order;
    int rank = pivoted_rank(gram, order, 1e-10);
    if (rank == 0) throw EmptyDesignError();

    OlsResult out;
    out.retained.assign(order.begin(), order.begin() + rank);
    std::sort(out.retained.begin(), out.retained.end());
    out.dropped.assign(order.begin() + rank, order.end());
    std::sort(out.dropped.begin(), out.dropped.end());

    Eigen::MatrixXd Xr(n, rank);
    for (int j = 0; j < rank; ++j) Xr.col(j) = X.col(out.retained[std::size_t(j)]);

    Eigen::LLT<Eigen::MatrixXd> llt(Xr.transpose() * Xr);
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXd g = Xr.transpose() * Xr;
        g.diagonal().array() += 1e-14 * g.diagonal().maxCoeff();
        llt.compute(g);
        if (llt.info() != Eigen::Success) throw EstimationError("normal equations not factorizable");
    }
    Eigen::VectorXd coef = llt.solve(Xr.transpose() * y);
    // One refinement pass keeps residuals orthogonal to the design.
    Eigen::VectorXd resid = y - Xr * coef;
    coef += llt.solve(Xr.transpose() * resid);

    out.coef = coef;
    out.residuals = y - Xr * coef;
    return out;
}

FitResult fit_model(const PanelFrame& frame, const BinnedDesign& design,
                    const ModelSpec& spec) {
    if (frame.rows == 0) throw ZeroRowsError();
    if (design.rows != frame.rows) throw DimensionMismatchError("design rows vs frame rows");
    if (design.columns.empty()) throw EmptyDesignError();
    if (!(spec.tol > 0)) throw InvalidConfigError("tol must be positive");

    std::vector<std::string> fe_dims = spec.fe_dims.empty() ? frame.fe_dims : spec.fe_dims;
    std::vector<std::string> cluster_dims =
        spec.cluster_dims.empty() ? frame.cluster_dims : spec.cluster_dims;
    if (fe_dims.empty()) throw InvalidConfigError("fit needs at least one fixed-effect dimension");

    const Eigen::Index n = Eigen::Index(frame.rows);
    const Eigen::Index k = Eigen::Index(design.columns.size());
    Eigen::MatrixXd m(n, k + 1);
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto& v = design.columns[std::size_t(j)].values;
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = v[std::size_t(i)];
    }
    const auto& y = frame.num(spec.outcome);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::isnan(y[std::size_t(i)])) throw NonFiniteError(spec.outcome);
        m(i, k) = y[std::size_t(i)];
    }

    std::vector<const CategoricalColumn*> dims;
    long dof_absorbed = 0;
    for (const auto& name : fe_dims) {
        dims.push_back(&frame.cat(name));
        dof_absorbed += long(dims.back()->level_count());
    }
    dof_absorbed -= long(dims.size()) - 1;

    FitResult fit;
    fit.iters = absorb(m, dims, spec.tol, spec.max_iter, spec.threads);

    OlsResult sol = ols(m.col(k), m.leftCols(k));
    fit.terms.reserve(sol.retained.size());
    for (int j : sol.retained) fit.terms.push_back(design.columns[std::size_t(j)].name);
    for (int j : sol.dropped) fit.dropped.push_back(design.columns[std::size_t(j)].name);
    fit.coef = sol.coef;
    fit.residuals = sol.residuals;
    fit.dof_model = long(sol.retained.size());
    fit.dof_absorbed = dof_absorbed;
    fit.fe_dims = fe_dims;
    fit.cluster_dims = cluster_dims;

    fit.demeaned_design.resize(n, Eigen::Index(sol.retained.size()));
    for (std::size_t j = 0; j < sol.retained.size(); ++j)
        fit.demeaned_design.col(Eigen::Index(j)) = m.col(sol.retained[j]);
    fit.demeaned_outcome = m.col(k);
    return fit;
}

void write_fit_csv(const FitResult& fit, const std::string& path,
                   const std::string& manifest_id) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    CsvWriter w(out);
    if (!manifest_id.empty()) w.comment("manifest: " + manifest_id);
    w.row({"term", "estimate"});
    for (std::size_t i = 0; i < fit.terms.size(); ++i)
        w.row({fit.terms[i], format_double(fit.coef[Eigen::Index(i)])});
}

std::string format_run_log(const FitResult& fit) {
    std::ostringstream os;
    os << "iterations: " << fit.iters << "\n";
    os << "dof_model: " << fit.dof_model << "\n";
    os << "dof_absorbed: " << fit.dof_absorbed << "\n";
    os << "retained: " << fit.terms.size() << "\n";
    os << "dropped: " << fit.dropped.size() << "\n";
    for (const auto& name : fit.dropped) os << "dropped_column: " << name << "\n";
    return os.str();
}

} // namespace panelfx
