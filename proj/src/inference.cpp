#include "panelfx/inference.hpp"

#include "panelfx/csv.hpp"
#include "panelfx/errors.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <unordered_map>

namespace panelfx {

double ClusterVcv::se(int term_index) const {
    double v = vcv(term_index, term_index);
    return v > 0 ? std::sqrt(v) : 0.0;
}

const EffectRow* EffectTable::find(const std::string& term) const {
    for (const auto& r : rows)
        if (r.term == term) return &r;
    return nullptr;
}

double pct_effect(double estimate) { return 100.0 * std::expm1(estimate); }

double normal_p(double z) { return std::erfc(std::fabs(z) / std::numbers::sqrt2); }

bool psd_truncate(Eigen::MatrixXd& m, double* min_eigenvalue) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd& ev = es.eigenvalues();
    double min_ev = ev.minCoeff();
    double max_abs = std::max(std::fabs(ev.minCoeff()), std::fabs(ev.maxCoeff()));
    if (min_eigenvalue) *min_eigenvalue = min_ev;
    if (min_ev >= 0.0) return false;
    Eigen::VectorXd clipped = ev.cwiseMax(0.0);
    m = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    m = ((m + m.transpose()) * 0.5).eval();
    return min_ev < -1e-12 * max_abs;
}

namespace {

// One-way clustered meat matrix over the given composite grouping.
Eigen::MatrixXd clustered_meat(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& resid,
                               const std::vector<std::int64_t>& group,
                               std::size_t n_groups) {
    const Eigen::Index k = x.cols();
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(Eigen::Index(n_groups), k);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        scores.row(Eigen::Index(group[std::size_t(i)])) += resid[i] * x.row(i);
    return scores.transpose() * scores;
}

} // namespace

ClusterVcv cluster_vcv(const FitResult& fit, const PanelFrame& frame) {
    const Eigen::MatrixXd& x = fit.demeaned_design;
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    if (n != Eigen::Index(frame.rows)) throw DimensionMismatchError("vcv rows vs frame");
    if (fit.residuals.size() != n) throw DimensionMismatchError("residual length");
    if (fit.cluster_dims.empty()) throw InvalidConfigError("no cluster dimensions");

    struct Dim {
        const CategoricalColumn* col;
        std::size_t levels;
    };
    std::vector<Dim> dims;
    ClusterVcv out;
    for (const auto& name : fit.cluster_dims) {
        const auto& col = frame.cat(name);
        if (col.level_count() <= 1) throw SingleClusterError(name);
        dims.push_back({&col, col.level_count()});
        out.cluster_counts[name] = col.level_count();
    }

    Eigen::LLT<Eigen::MatrixXd> bread(x.transpose() * x);
    if (bread.info() != Eigen::Success)
        throw EstimationError("design Gram matrix not factorizable for inference");

    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(k, k);
    const std::size_t d = dims.size();
    for (std::size_t mask = 1; mask < (std::size_t(1) << d); ++mask) {
        // Intersection clustering of the dims in this subset.
        std::vector<std::int64_t> group(static_cast<std::size_t>(n));
        std::size_t n_groups;
        {
            std::unordered_map<std::int64_t, std::int64_t> dense;
            std::int64_t next = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                std::int64_t key = 0;
                for (std::size_t j = 0; j < d; ++j) {
                    if (!(mask & (std::size_t(1) << j))) continue;
                    key = key * std::int64_t(dims[j].levels) +
                          dims[j].col->codes[std::size_t(i)];
                }
                auto [it, fresh] = dense.emplace(key, next);
                if (fresh) ++next;
                group[std::size_t(i)] = it->second;
            }
            n_groups = std::size_t(next);
        }
        double g = double(n_groups);
        if (n_groups <= 1) throw SingleClusterError("cluster intersection");
        double correction = g / (g - 1.0);
        Eigen::MatrixXd meat = clustered_meat(x, fit.residuals, group, n_groups);
        int sign = (std::popcount(mask) % 2 == 1) ? 1 : -1;
        Eigen::MatrixXd half = bread.solve(meat);          // A^-1 M
        Eigen::MatrixXd sandwich = bread.solve(half.transpose()); // A^-1 M A^-1
        v += double(sign) * correction * sandwich;
    }

    v = ((v + v.transpose()) * 0.5).eval();
    out.psd_adjusted = psd_truncate(v, &out.min_eigenvalue);
    out.vcv = std::move(v);
    return out;
}

EffectTable effect_table(const FitResult& fit, const ClusterVcv& vcv) {
    if (vcv.vcv.rows() != Eigen::Index(fit.terms.size()))
        throw DimensionMismatchError("vcv size vs retained terms");
    EffectTable table;
    for (std::size_t i = 0; i < fit.terms.size(); ++i) {
        EffectRow r;
        r.term = fit.terms[i];
        r.estimate = fit.coef[Eigen::Index(i)];
        r.se = vcv.se(int(i));
        double z = r.se > 0 ? r.estimate / r.se : 0.0;
        r.p_value = r.se > 0 ? normal_p(z) : (r.estimate == 0.0 ? 1.0 : 0.0);
        r.pct_effect = pct_effect(r.estimate);
        r.pct_lo = pct_effect(r.estimate - kZ95 * r.se);
        r.pct_hi = pct_effect(r.estimate + kZ95 * r.se);
        table.rows.push_back(r);
    }
    table.metadata.emplace_back("small_sample", "per-dimension G/(G-1)");
    table.metadata.emplace_back("reference_distribution", "normal");
    table.metadata.emplace_back("ci_level", "95");
    for (const auto& [dim, g] : vcv.cluster_counts)
        table.metadata.emplace_back("clusters." + dim, std::to_string(g));
    table.metadata.emplace_back("psd_adjusted", vcv.psd_adjusted ? "true" : "false");
    return table;
}

void write_effect_csv(const EffectTable& table, const std::string& path,
                      const std::string& manifest_id) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    CsvWriter w(out);
    if (!manifest_id.empty()) w.comment("manifest: " + manifest_id);
    for (const auto& [key, value] : table.metadata) w.comment("meta " + key + " = " + value);
    w.row({"term", "estimate", "se", "p", "pct_effect", "pct_lo", "pct_hi"});
    for (const auto& r : table.rows)
        w.row({r.term, format_double(r.estimate), format_double(r.se),
               format_double(r.p_value), format_double(r.pct_effect),
               format_double(r.pct_lo), format_double(r.pct_hi)});
}

EffectTable read_effect_csv(const std::string& path) {
    CsvTable csv = read_csv(path);
    EffectTable table;
    int c_term = csv.column_index("term");
    if (c_term < 0) throw MissingColumnError("term");
    auto col = [&](const char* name) {
        int c = csv.column_index(name);
        if (c < 0) throw MissingColumnError(name);
        return c;
    };
    int c_est = col("estimate"), c_se = col("se"), c_p = col("p");
    int c_pe = col("pct_effect"), c_lo = col("pct_lo"), c_hi = col("pct_hi");
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& row = csv.rows[i];
        EffectRow r;
        r.term = row[std::size_t(c_term)];
        r.estimate = std::stod(row[std::size_t(c_est)]);
        r.se = std::stod(row[std::size_t(c_se)]);
        r.p_value = std::stod(row[std::size_t(c_p)]);
        r.pct_effect = std::stod(row[std::size_t(c_pe)]);
        r.pct_lo = std::stod(row[std::size_t(c_lo)]);
        r.pct_hi = std::stod(row[std::size_t(c_hi)]);
        table.rows.push_back(std::move(r));
    }
    return table;
}

} // namespace panelfx
