#pragma once

#include "panelfx/config.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace panelfx {

/// Categorical column: dense codes 0..K-1 plus the original labels.
struct CategoricalColumn {
    std::vector<std::int32_t> codes;
    std::vector<std::string> levels;

    int level_count() const { return static_cast<int>(levels.size()); }
};

enum class OutcomeTransform { Log, Level };

/// Columnar entity-time table. Numeric columns are keyed by role name
/// (outcome_raw, outcome, tmax, precip, trange, cloud, humidity, date_code,
/// optionally weight); categorical columns hold the fixed-effect and cluster
/// dimensions (city, day, city_month, optionally user). Immutable once
/// validated.
struct PanelFrame {
    std::size_t rows = 0;
    std::map<std::string, std::vector<double>> numeric;
    std::map<std::string, CategoricalColumn> cats;
    std::vector<std::string> fe_dims;      // default model dims, in order
    std::vector<std::string> cluster_dims; // default cluster dims
    bool validated = false;
    OutcomeTransform transform = OutcomeTransform::Log;

    const std::vector<double>& num(const std::string& name) const;
    const CategoricalColumn& cat(const std::string& name) const;
    bool has_num(const std::string& name) const { return numeric.count(name) > 0; }
    bool has_cat(const std::string& name) const { return cats.count(name) > 0; }
};

/// Maps panel roles to CSV column names. Loaded from the key-value config
/// (`schema.<role> = <column>`); roles default to their own names.
struct Schema {
    std::map<std::string, std::string> role_to_column;

    static Schema defaults();
    static Schema from_config(const KeyValueConfig& cfg);
    std::string column(const std::string& role) const;
};

struct ValidationReport {
    std::size_t dropped_zero_outcome = 0;
    std::size_t dropped_missing = 0;
    std::map<std::string, int> fe_level_counts;
    std::map<std::string, int> singleton_fe_levels;
};

/// Typed raw columns prior to frame assembly; synth fills this directly and
/// load_panel parses CSV into it, so both paths build identical frames.
struct RawPanel {
    std::vector<std::string> city;
    std::vector<std::string> date;           // ISO strings
    std::vector<double> outcome_raw;
    std::vector<double> tmax, precip, trange, cloud, humidity;
    std::vector<std::string> user;           // optional, empty when absent
    std::vector<double> weight;              // optional

    std::size_t rows() const { return city.size(); }
};

/// Assembles a PanelFrame: dense-codes city/day/user in first-appearance
/// order and derives city_month from (city, calendar month of date).
PanelFrame build_frame(const RawPanel& raw);

PanelFrame load_panel(const std::string& path, const Schema& schema);

/// Drops rows that cannot enter the model (missing covariates; zero counts
/// under the log transform), fills the outcome column, and re-densifies all
/// categorical codes. Throws AllRowsDropped when nothing survives.
ValidationReport validate(PanelFrame& frame,
                          OutcomeTransform transform = OutcomeTransform::Log);

/// Stacks two frames (used for platform pooling). Labels are assumed
/// namespaced by the caller (e.g. "nyc@facebook"); all categorical columns
/// are re-coded densely over the union.
PanelFrame concat_frames(const PanelFrame& a, const PanelFrame& b);

/// Writes the frame back out in the schema load_panel ingests.
void write_panel_csv(const PanelFrame& frame, const std::string& path,
                     const std::string& manifest_id = "");

} // namespace panelfx
