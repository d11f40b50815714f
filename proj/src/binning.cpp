#include "panelfx/binning.hpp"

#include "panelfx/csv.hpp"
#include "panelfx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace panelfx {

std::string label_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", std::fabs(v));
    std::string s = buf;
    if (std::signbit(v) && v != 0.0) s = "−" + s;
    return s;
}

void BinSpec::check() const {
    if (edges.size() < (zero_bin ? 1u : 2u))
        throw InvalidConfigError("bin spec " + variable + ": too few edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i - 1] < edges[i]))
            throw InvalidConfigError("bin spec " + variable + ": edges not increasing");
    if (zero_bin && !(edges.front() > 0.0))
        throw InvalidConfigError("bin spec " + variable + ": zero bin needs edges above 0");
    if (reference_bin < 0 || reference_bin >= bin_count())
        throw InvalidConfigError("bin spec " + variable + ": reference bin out of range");
}

int BinSpec::bin_count() const {
    if (zero_bin) return 1 + int(edges.size()) + (open_high ? 1 : 0);
    return int(edges.size()) - 1 + (open_low ? 1 : 0) + (open_high ? 1 : 0);
}

int BinSpec::assign(double value) const {
    if (!std::isfinite(value)) throw NonFiniteError(variable);
    const int k = int(edges.size());
    if (zero_bin) {
        if (value <= 0.0) return 0;
        // intervals (0, e0], (e0, e1], ...
        auto it = std::lower_bound(edges.begin(), edges.end(), value);
        int i = int(it - edges.begin());
        if (i == k) return open_high ? k + 1 : k; // clamp into (e_{k-2}, e_{k-1}]
        return 1 + i;
    }
    if (value < edges.front()) return 0; // open_low bin or clamped first interval
    if (value >= edges.back()) {
        if (open_high) return bin_count() - 1;
        return bin_count() - 1; // clamp into last [a, b)
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), value);
    int j = int(it - edges.begin()) - 1; // last edge <= value, j in [0, k-2]
    (void)k;
    return j + (open_low ? 1 : 0);
}

std::string BinSpec::label(int bin) const {
    const int n = bin_count();
    if (bin < 0 || bin >= n) throw InvalidConfigError("bin index out of range for " + variable);
    if (zero_bin) {
        if (bin == 0) return "0" + unit; // "0cm"
        if (open_high && bin == n - 1)
            return "> " + label_number(edges.back()) + " " + unit;
        double lo = bin == 1 ? 0.0 : edges[bin - 2];
        double hi = edges[bin - 1];
        return "(" + label_number(lo) + "," + label_number(hi) + "] " + unit;
    }
    if (open_low && bin == 0) return "< " + label_number(edges.front()) + unit;
    if (open_high && bin == n - 1) return "≥ " + label_number(edges.back()) + unit;
    int j = bin - (open_low ? 1 : 0);
    return label_number(edges[j]) + "–" + label_number(edges[j + 1]) + unit;
}

std::vector<BinSpec> default_paper_specs() {
    std::vector<BinSpec> specs;
    {
        BinSpec s;
        s.variable = "tmax";
        s.edges = {-5, 0, 5, 10, 15, 20, 25, 30, 35, 40};
        s.open_low = s.open_high = true;
        s.reference_bin = 5; // [15,20)
        s.unit = "°C";
        specs.push_back(s);
    }
    {
        BinSpec s;
        s.variable = "precip";
        s.edges = {1, 2, 3, 4, 5};
        s.zero_bin = true;
        s.open_high = true;
        s.reference_bin = 0; // exact zero
        s.unit = "cm";
        specs.push_back(s);
    }
    {
        BinSpec s;
        s.variable = "trange";
        s.edges = {0, 5, 10, 15, 20, 25};
        s.open_high = true;
        s.reference_bin = 0; // [0,5)
        s.unit = "°C";
        specs.push_back(s);
    }
    {
        BinSpec s;
        s.variable = "cloud";
        s.edges = {0, 20, 40, 60, 80, 100};
        s.reference_bin = 0; // [0,20)
        s.unit = "%";
        specs.push_back(s);
    }
    {
        BinSpec s;
        s.variable = "humidity";
        s.edges = {0, 20, 40, 60, 80, 100};
        s.reference_bin = 2; // [40,60)
        s.unit = "%";
        specs.push_back(s);
    }
    for (auto& s : specs) s.check();
    return specs;
}

BinSpec surface_tmax_spec() {
    BinSpec s;
    s.variable = "tmax";
    s.edges = {-5, 0, 5, 10, 15, 20, 25, 30, 35};
    s.open_low = s.open_high = true;
    s.reference_bin = 5; // [15,20)
    s.unit = "°C";
    s.check();
    return s;
}

BinSpec surface_precip_spec() {
    BinSpec s;
    s.variable = "precip";
    s.edges = {0.5, 1, 1.5, 2};
    s.zero_bin = true;
    s.open_high = true;
    s.reference_bin = 0;
    s.unit = "cm";
    s.check();
    return s;
}

const BinSpec* find_spec(const std::vector<BinSpec>& specs,
                         const std::string& variable) {
    for (const auto& s : specs)
        if (s.variable == variable) return &s;
    return nullptr;
}

const DesignColumn* BinnedDesign::find(const std::string& variable,
                                       const std::string& label) const {
    for (const auto& c : columns)
        if (c.variable == variable && c.label == label) return &c;
    return nullptr;
}

BinnedDesign expand_design(const PanelFrame& frame,
                           const std::vector<BinSpec>& specs) {
    BinnedDesign design;
    design.rows = frame.rows;
    for (const auto& spec : specs) {
        spec.check();
        if (!frame.has_num(spec.variable)) throw UnknownVariableError(spec.variable);
        const auto& values = frame.num(spec.variable);
        std::vector<int>& bins = design.assignments[spec.variable];
        bins.resize(frame.rows);
        for (std::size_t i = 0; i < frame.rows; ++i)
            bins[i] = spec.assign(values[i]);

        const int nb = spec.bin_count();
        std::vector<std::size_t> col_of(nb, SIZE_MAX);
        for (int b = 0; b < nb; ++b) {
            if (b == spec.reference_bin) continue;
            DesignColumn col;
            col.variable = spec.variable;
            col.label = spec.label(b);
            col.name = spec.variable + ":" + col.label;
            col.values.assign(frame.rows, 0.0);
            col_of[b] = design.columns.size();
            design.columns.push_back(std::move(col));
        }
        for (std::size_t i = 0; i < frame.rows; ++i) {
            std::size_t c = col_of[bins[i]];
            if (c == SIZE_MAX) continue;
            design.columns[c].values[i] = 1.0;
            ++design.columns[c].support;
        }
    }
    return design;
}

BinnedDesign interact(const BinnedDesign& tmax_design,
                      const BinnedDesign& precip_design,
                      const BinSpec& coarse_tmax, const BinSpec& coarse_precip,
                      std::int64_t min_support) {
    auto t_it = tmax_design.assignments.find(coarse_tmax.variable);
    auto p_it = precip_design.assignments.find(coarse_precip.variable);
    if (t_it == tmax_design.assignments.end())
        throw UnknownVariableError(coarse_tmax.variable);
    if (p_it == precip_design.assignments.end())
        throw UnknownVariableError(coarse_precip.variable);
    const auto& tb = t_it->second;
    const auto& pb = p_it->second;
    if (tb.size() != pb.size()) throw DimensionMismatchError("interaction row counts");

    BinnedDesign design;
    design.rows = tb.size();
    const int nt = coarse_tmax.bin_count();
    const int np = coarse_precip.bin_count();
    std::vector<std::size_t> col_of(std::size_t(nt) * np, SIZE_MAX);
    for (int t = 0; t < nt; ++t) {
        if (t == coarse_tmax.reference_bin) continue;
        for (int p = 0; p < np; ++p) {
            if (p == coarse_precip.reference_bin) continue;
            DesignColumn col;
            col.variable = "cell";
            col.label = coarse_tmax.label(t) + " × " + coarse_precip.label(p);
            col.name = "cell:" + col.label;
            col.values.assign(design.rows, 0.0);
            col_of[std::size_t(t) * np + p] = design.columns.size();
            design.columns.push_back(std::move(col));
        }
    }
    for (std::size_t i = 0; i < design.rows; ++i) {
        std::size_t c = col_of[std::size_t(tb[i]) * np + pb[i]];
        if (c == SIZE_MAX) continue;
        design.columns[c].values[i] = 1.0;
        ++design.columns[c].support;
    }
    for (auto& col : design.columns)
        col.low_support = col.support < min_support;
    return design;
}

BinnedDesign concat_designs(const BinnedDesign& a, const BinnedDesign& b) {
    if (a.rows != b.rows && a.rows != 0 && b.rows != 0)
        throw DimensionMismatchError("design row counts");
    BinnedDesign out = a;
    if (out.rows == 0) out.rows = b.rows;
    for (const auto& col : b.columns) {
        for (const auto& existing : out.columns)
            if (existing.name == col.name)
                throw InvalidConfigError("duplicate design column " + col.name);
        out.columns.push_back(col);
    }
    for (const auto& [var, bins] : b.assignments)
        out.assignments.emplace(var, bins);
    return out;
}

namespace {

std::string join_edges(const std::vector<double>& edges) {
    std::string s;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (i) s += ",";
        s += format_double(edges[i]);
    }
    return s;
}

} // namespace

void specs_to_config(const std::vector<BinSpec>& specs, KeyValueConfig& cfg) {
    for (const auto& s : specs) {
        const std::string p = "bins." + s.variable + ".";
        cfg.set(p + "edges", join_edges(s.edges));
        cfg.set(p + "open_low", s.open_low ? "true" : "false");
        cfg.set(p + "open_high", s.open_high ? "true" : "false");
        cfg.set(p + "zero_bin", s.zero_bin ? "true" : "false");
        cfg.set(p + "reference", std::to_string(s.reference_bin));
        cfg.set(p + "unit", s.unit);
    }
}

std::vector<BinSpec> specs_from_config(const KeyValueConfig& cfg) {
    std::vector<std::string> order;
    for (const auto& [key, value] : cfg.entries()) {
        if (key.rfind("bins.", 0) != 0) continue;
        auto dot = key.find('.', 5);
        if (dot == std::string::npos) continue;
        std::string var = key.substr(5, dot - 5);
        if (std::find(order.begin(), order.end(), var) == order.end())
            order.push_back(var);
    }
    std::vector<BinSpec> specs;
    for (const auto& var : order) {
        const std::string p = "bins." + var + ".";
        BinSpec s;
        s.variable = var;
        auto edges = cfg.get(p + "edges");
        if (!edges) throw InvalidConfigError("missing key " + p + "edges");
        for (const auto& tok : split(*edges, ','))
            s.edges.push_back(std::stod(trim(tok)));
        s.open_low = cfg.get_or(p + "open_low", "false") == "true";
        s.open_high = cfg.get_or(p + "open_high", "false") == "true";
        s.zero_bin = cfg.get_or(p + "zero_bin", "false") == "true";
        s.reference_bin = int(cfg.get_long_or(p + "reference", 0));
        s.unit = cfg.get_or(p + "unit", "");
        s.check();
        specs.push_back(std::move(s));
    }
    return specs;
}

void write_design_csv(const BinnedDesign& design, const std::string& path,
                      const std::string& manifest_id) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    CsvWriter w(out);
    if (!manifest_id.empty()) w.comment("manifest: " + manifest_id);
    std::vector<std::string> header;
    header.reserve(design.columns.size());
    for (const auto& c : design.columns) header.push_back(c.name);
    w.row(header);
    std::vector<std::string> row(design.columns.size());
    for (std::size_t i = 0; i < design.rows; ++i) {
        for (std::size_t j = 0; j < design.columns.size(); ++j)
            row[j] = format_double(design.columns[j].values[i]);
        w.row(row);
    }
}

} // namespace panelfx
