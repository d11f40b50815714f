#include "panelfx/panel.hpp"

#include "panelfx/csv.hpp"
#include "panelfx/dates.hpp"
#include "panelfx/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

namespace panelfx {

const std::vector<double>& PanelFrame::num(const std::string& name) const {
    auto it = numeric.find(name);
    if (it == numeric.end()) throw MissingColumnError(name);
    return it->second;
}

const CategoricalColumn& PanelFrame::cat(const std::string& name) const {
    auto it = cats.find(name);
    if (it == cats.end()) throw MissingColumnError(name);
    return it->second;
}

Schema Schema::defaults() {
    Schema s;
    for (const char* role :
         {"city", "date", "posts", "tmax", "precip", "trange", "cloud",
          "humidity", "user", "weight"})
        s.role_to_column[role] = role;
    return s;
}

Schema Schema::from_config(const KeyValueConfig& cfg) {
    Schema s = defaults();
    for (auto& [role, col] : s.role_to_column)
        col = cfg.get_or("schema." + role, col);
    return s;
}

std::string Schema::column(const std::string& role) const {
    auto it = role_to_column.find(role);
    if (it == role_to_column.end()) throw MissingColumnError(role);
    return it->second;
}

namespace {

// Dense first-appearance coding.
CategoricalColumn encode(const std::vector<std::string>& labels) {
    CategoricalColumn col;
    col.codes.reserve(labels.size());
    std::unordered_map<std::string, std::int32_t> seen;
    for (const auto& s : labels) {
        auto [it, fresh] = seen.emplace(s, std::int32_t(col.levels.size()));
        if (fresh) col.levels.push_back(s);
        col.codes.push_back(it->second);
    }
    return col;
}

std::string month_label(std::int64_t mc) {
    std::int64_t y = mc >= 0 ? mc / 12 : -((-mc + 11) / 12);
    int m = int(mc - y * 12) + 1;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04lld-%02d", (long long)y, m);
    return buf;
}

double parse_numeric(const std::string& s, std::size_t row, const std::string& col) {
    std::string t = trim(s);
    if (t.empty()) return std::nan("");
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') throw ParseError(row, col, s);
    return v;
}

} // namespace

PanelFrame build_frame(const RawPanel& raw) {
    const std::size_t n = raw.rows();
    PanelFrame f;
    f.rows = n;

    f.cats["city"] = encode(raw.city);
    f.cats["day"] = encode(raw.date);

    std::vector<double> date_code(n);
    std::vector<std::string> cm_labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t dc = parse_date(raw.date[i]);
        date_code[i] = double(dc);
        cm_labels[i] = raw.city[i] + ":" + month_label(month_code(dc));
    }
    f.cats["city_month"] = encode(cm_labels);
    f.numeric["date_code"] = std::move(date_code);

    f.numeric["outcome_raw"] = raw.outcome_raw;
    f.numeric["outcome"] = std::vector<double>(n, std::nan(""));
    f.numeric["tmax"] = raw.tmax;
    f.numeric["precip"] = raw.precip;
    f.numeric["trange"] = raw.trange;
    f.numeric["cloud"] = raw.cloud;
    f.numeric["humidity"] = raw.humidity;
    if (!raw.weight.empty()) f.numeric["weight"] = raw.weight;

    if (!raw.user.empty()) {
        f.cats["user"] = encode(raw.user);
        f.fe_dims = {"user", "day", "city_month"};
    } else {
        f.fe_dims = {"day", "city_month"};
    }
    f.cluster_dims = {"city", "day"};

    for (auto& [name, col] : f.numeric)
        if (col.size() != n) throw ValidationError("column length mismatch: " + name);
    return f;
}

PanelFrame load_panel(const std::string& path, const Schema& schema) {
    CsvTable table = read_csv(path);
    if (table.header.empty() || table.rows.empty()) throw EmptyFileError(path);

    auto required = [&](const std::string& role) {
        int idx = table.column_index(schema.column(role));
        if (idx < 0) throw MissingColumnError(schema.column(role));
        return idx;
    };
    int c_city = required("city");
    int c_date = required("date");
    int c_posts = required("posts");
    int c_tmax = required("tmax");
    int c_precip = required("precip");
    int c_trange = required("trange");
    int c_cloud = required("cloud");
    int c_humidity = required("humidity");
    int c_user = table.column_index(schema.column("user"));
    int c_weight = table.column_index(schema.column("weight"));

    RawPanel raw;
    const std::size_t n = table.rows.size();
    raw.city.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = table.rows[i];
        auto field = [&](int idx) -> const std::string& {
            static const std::string empty;
            return idx >= 0 && std::size_t(idx) < r.size() ? r[idx] : empty;
        };
        if (trim(field(c_city)).empty())
            throw ParseError(i + 1, schema.column("city"), field(c_city));
        raw.city.push_back(trim(field(c_city)));
        raw.date.push_back(trim(field(c_date)));
        raw.outcome_raw.push_back(parse_numeric(field(c_posts), i + 1, schema.column("posts")));
        raw.tmax.push_back(parse_numeric(field(c_tmax), i + 1, schema.column("tmax")));
        raw.precip.push_back(parse_numeric(field(c_precip), i + 1, schema.column("precip")));
        raw.trange.push_back(parse_numeric(field(c_trange), i + 1, schema.column("trange")));
        raw.cloud.push_back(parse_numeric(field(c_cloud), i + 1, schema.column("cloud")));
        raw.humidity.push_back(parse_numeric(field(c_humidity), i + 1, schema.column("humidity")));
        if (c_user >= 0) raw.user.push_back(trim(field(c_user)));
        if (c_weight >= 0)
            raw.weight.push_back(parse_numeric(field(c_weight), i + 1, schema.column("weight")));
    }
    return build_frame(raw);
}

namespace {

void apply_keep_mask(PanelFrame& f, const std::vector<char>& keep, std::size_t kept) {
    for (auto& [name, col] : f.numeric) {
        std::vector<double> out;
        out.reserve(kept);
        for (std::size_t i = 0; i < col.size(); ++i)
            if (keep[i]) out.push_back(col[i]);
        col = std::move(out);
    }
    for (auto& [name, col] : f.cats) {
        std::vector<std::string> labels;
        labels.reserve(kept);
        for (std::size_t i = 0; i < col.codes.size(); ++i)
            if (keep[i]) labels.push_back(col.levels[col.codes[i]]);
        col = encode(labels);
    }
    f.rows = kept;
}

} // namespace

ValidationReport validate(PanelFrame& frame, OutcomeTransform transform) {
    static const char* model_cols[] = {"outcome_raw", "tmax",  "precip",
                                       "trange",      "cloud", "humidity"};
    ValidationReport report;
    const std::size_t n = frame.rows;
    std::vector<char> keep(n, 1);
    std::size_t kept = n;

    const auto& raw = frame.num("outcome_raw");
    for (std::size_t i = 0; i < n; ++i) {
        bool missing = false;
        for (const char* c : model_cols)
            if (std::isnan(frame.num(c)[i])) { missing = true; break; }
        if (missing) {
            keep[i] = 0;
            ++report.dropped_missing;
            --kept;
            continue;
        }
        if (raw[i] < 0)
            throw ValidationError("negative post count at row " + std::to_string(i));
        if (transform == OutcomeTransform::Log && raw[i] == 0.0) {
            keep[i] = 0;
            ++report.dropped_zero_outcome;
            --kept;
        }
    }
    if (kept == 0) throw AllRowsDroppedError();
    if (kept < n) apply_keep_mask(frame, keep, kept);

    auto& outcome = frame.numeric["outcome"];
    const auto& raw2 = frame.num("outcome_raw");
    outcome.resize(kept);
    for (std::size_t i = 0; i < kept; ++i)
        outcome[i] = transform == OutcomeTransform::Log ? std::log(raw2[i]) : raw2[i];

    for (const auto& dim : frame.fe_dims) {
        const auto& col = frame.cat(dim);
        report.fe_level_counts[dim] = col.level_count();
        std::vector<int> counts(col.levels.size(), 0);
        for (auto c : col.codes) ++counts[c];
        int singletons = 0;
        for (int c : counts)
            if (c == 1) ++singletons;
        report.singleton_fe_levels[dim] = singletons;
    }

    frame.validated = true;
    frame.transform = transform;
    return report;
}

namespace {

RawPanel frame_to_raw(const PanelFrame& f) {
    RawPanel raw;
    const std::size_t n = f.rows;
    const auto& city = f.cat("city");
    const auto& dc = f.num("date_code");
    raw.city.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        raw.city.push_back(city.levels[city.codes[i]]);
        raw.date.push_back(iso_date(std::int64_t(dc[i])));
    }
    raw.outcome_raw = f.num("outcome_raw");
    raw.tmax = f.num("tmax");
    raw.precip = f.num("precip");
    raw.trange = f.num("trange");
    raw.cloud = f.num("cloud");
    raw.humidity = f.num("humidity");
    if (f.has_cat("user")) {
        const auto& user = f.cat("user");
        for (std::size_t i = 0; i < n; ++i)
            raw.user.push_back(user.levels[user.codes[i]]);
    }
    if (f.has_num("weight")) raw.weight = f.num("weight");
    return raw;
}

} // namespace

PanelFrame concat_frames(const PanelFrame& a, const PanelFrame& b) {
    RawPanel ra = frame_to_raw(a);
    RawPanel rb = frame_to_raw(b);
    if (ra.user.empty() != rb.user.empty())
        throw ValidationError("cannot pool a user-level frame with a city-level frame");
    auto append = [](auto& dst, const auto& src) {
        dst.insert(dst.end(), src.begin(), src.end());
    };
    append(ra.city, rb.city);
    append(ra.date, rb.date);
    append(ra.outcome_raw, rb.outcome_raw);
    append(ra.tmax, rb.tmax);
    append(ra.precip, rb.precip);
    append(ra.trange, rb.trange);
    append(ra.cloud, rb.cloud);
    append(ra.humidity, rb.humidity);
    append(ra.user, rb.user);
    if (!ra.weight.empty() || !rb.weight.empty()) {
        if (ra.weight.size() != a.rows || rb.weight.size() != b.rows)
            throw ValidationError("cannot pool frames with and without weights");
        append(ra.weight, rb.weight);
    }
    return build_frame(ra);
}

void write_panel_csv(const PanelFrame& frame, const std::string& path,
                     const std::string& manifest_id) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    CsvWriter w(out);
    if (!manifest_id.empty()) w.comment("manifest: " + manifest_id);

    bool has_user = frame.has_cat("user");
    bool has_weight = frame.has_num("weight");
    std::vector<std::string> header = {"city", "date",   "posts", "tmax",
                                       "precip", "trange", "cloud", "humidity"};
    if (has_user) header.push_back("user");
    if (has_weight) header.push_back("weight");
    w.row(header);

    const auto& city = frame.cat("city");
    const auto& dc = frame.num("date_code");
    for (std::size_t i = 0; i < frame.rows; ++i) {
        std::vector<std::string> row = {
            city.levels[city.codes[i]],
            iso_date(std::int64_t(dc[i])),
            format_double(frame.num("outcome_raw")[i]),
            format_double(frame.num("tmax")[i]),
            format_double(frame.num("precip")[i]),
            format_double(frame.num("trange")[i]),
            format_double(frame.num("cloud")[i]),
            format_double(frame.num("humidity")[i]),
        };
        if (has_user) {
            const auto& user = frame.cat("user");
            row.push_back(user.levels[user.codes[i]]);
        }
        if (has_weight) row.push_back(format_double(frame.num("weight")[i]));
        w.row(row);
    }
}

} // namespace panelfx
