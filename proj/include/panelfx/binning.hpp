#pragma once

#include "panelfx/config.hpp"
#include "panelfx/panel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace panelfx {

// One binned covariate. Intervals are [a, b) except on a zero_bin axis,
// where exact zero is its own bin and the intervals above it are (a, b].
// Values outside the edge range land in the nearest end bin, so assignment
// is total over finite inputs.
struct BinSpec {
    std::string variable;
    std::vector<double> edges;
    bool open_low = false;
    bool open_high = false;
    bool zero_bin = false;
    int reference_bin = 0;
    std::string unit;

    int bin_count() const;
    int assign(double value) const;
    std::string label(int bin) const;
    std::string reference_label() const { return label(reference_bin); }
    void check() const;
};

struct DesignColumn {
    std::string name;     // unique: "<variable>:<label>"
    std::string variable;
    std::string label;
    std::vector<double> values;
    std::int64_t support = 0;
    bool low_support = false;
};

struct BinnedDesign {
    std::size_t rows = 0;
    std::vector<DesignColumn> columns;
    // Per covariate, the bin index of every row (reference rows included).
    std::map<std::string, std::vector<int>> assignments;

    const DesignColumn* find(const std::string& variable,
                             const std::string& label) const;
};

// Canonical marginal specs: tmax, precip, trange, cloud, humidity.
std::vector<BinSpec> default_paper_specs();

// Coarse grid for the interaction surface: 5°C temperature bins from
// < -5°C to >= 35°C and half-centimeter precipitation bins up to > 2 cm.
BinSpec surface_tmax_spec();
BinSpec surface_precip_spec();

const BinSpec* find_spec(const std::vector<BinSpec>& specs,
                         const std::string& variable);

BinnedDesign expand_design(const PanelFrame& frame,
                           const std::vector<BinSpec>& specs);

// Product columns for every non-reference (tmax bin, precip bin) pair.
// Cells with support below min_support are flagged, never dropped.
BinnedDesign interact(const BinnedDesign& tmax_design,
                      const BinnedDesign& precip_design,
                      const BinSpec& coarse_tmax, const BinSpec& coarse_precip,
                      std::int64_t min_support = 50);

BinnedDesign concat_designs(const BinnedDesign& a, const BinnedDesign& b);

void specs_to_config(const std::vector<BinSpec>& specs, KeyValueConfig& cfg);
std::vector<BinSpec> specs_from_config(const KeyValueConfig& cfg);

void write_design_csv(const BinnedDesign& design, const std::string& path,
                      const std::string& manifest_id = "");

// "−5" with U+2212, trailing zeros trimmed; used by bin labels.
std::string label_number(double v);

} // namespace panelfx
