// Command-line driver: orchestrates the pipeline and emits every table and
// text grid under --out-dir, each stamped with the id of the manifest that
// produced it.

#include "panelfx/binning.hpp"
#include "panelfx/csv.hpp"
#include "panelfx/dates.hpp"
#include "panelfx/errors.hpp"
#include "panelfx/events.hpp"
#include "panelfx/fe_solver.hpp"
#include "panelfx/inference.hpp"
#include "panelfx/panel.hpp"
#include "panelfx/parallel.hpp"
#include "panelfx/rng.hpp"
#include "panelfx/surface.hpp"
#include "panelfx/synth.hpp"
#include "panelfx/textfilter.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using namespace panelfx;

namespace {

constexpr const char* kToolVersion = "1.0.0";

// Everything that identifies a run except wall-clock time. The id hashes the
// tool version, the subcommand, the seed, every flag value, and the content
// hash of every input file, so identical runs stamp identical ids.
struct Run {
    std::string command;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seeded = false;
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> flags;
    std::vector<std::pair<std::string, std::string>> inputs; // name -> path
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point t0;
    std::string id_;

    Run(std::string cmd, std::string dir)
        : command(std::move(cmd)), out_dir(std::move(dir)),
          t0(std::chrono::steady_clock::now()) {
        std::filesystem::create_directories(out_dir);
    }

    void flag(const std::string& name, const std::string& value) {
        flags.emplace_back(name, value);
    }
    void flag(const std::string& name, double value) {
        flags.emplace_back(name, format_double(value));
    }
    void flag(const std::string& name, long long value) {
        flags.emplace_back(name, std::to_string(value));
    }
    void input(const std::string& name, const std::string& path) {
        if (!path.empty()) inputs.emplace_back(name, path);
    }
    void use_seed(std::uint64_t s) {
        seed = s;
        seeded = true;
    }

    const std::string& id() {
        if (id_.empty()) {
            std::string blob = "panelfx " + std::string(kToolVersion) + "\n";
            blob += "command=" + command + "\n";
            if (seeded) blob += "seed=" + std::to_string(seed) + "\n";
            for (const auto& [k, v] : flags) blob += k + "=" + v + "\n";
            for (const auto& [k, p] : inputs)
                blob += k + "=" + file_hash_hex(p) + "\n";
            id_ = bytes_hash_hex(blob);
        }
        return id_;
    }

    std::string path(const std::string& name) {
        outputs.push_back(name);
        return out_dir + "/" + name;
    }

    void finish() {
        nlohmann::ordered_json j;
        j["manifest_id"] = id();
        j["tool"] = "panelfx";
        j["version"] = kToolVersion;
        j["command"] = command;
        if (seeded) j["seed"] = seed;
        if (!config_path.empty()) j["config"] = config_path;
        nlohmann::ordered_json jf = nlohmann::ordered_json::object();
        for (const auto& [k, v] : flags) jf[k] = v;
        j["flags"] = jf;
        nlohmann::ordered_json ji = nlohmann::ordered_json::object();
        for (const auto& [k, p] : inputs)
            ji[k] = {{"path", p}, {"hash", file_hash_hex(p)}};
        j["inputs"] = ji;
        j["outputs"] = outputs;
        double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        j["elapsed_seconds"] = secs;
        char stamp[32];
        std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm);
        j["generated_at"] = stamp;
        std::ofstream out(out_dir + "/manifest.json", std::ios::binary);
        out << j.dump(2) << "\n";
    }
};

void write_text(const std::string& path, const std::string& manifest_id,
                const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << "# manifest: " << manifest_id << "\n" << body;
}

KeyValueConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    return KeyValueConfig::load(path);
}

std::vector<BinSpec> bin_specs(const KeyValueConfig& cfg) {
    auto specs = specs_from_config(cfg);
    return specs.empty() ? default_paper_specs() : specs;
}

OutcomeTransform parse_transform(const std::string& name) {
    if (name == "log") return OutcomeTransform::Log;
    if (name == "level") return OutcomeTransform::Level;
    throw InvalidConfigError("unknown outcome transform: " + name);
}

std::string validation_text(const PanelFrame& frame,
                            const ValidationReport& report) {
    std::string s;
    s += "rows kept: " + std::to_string(frame.rows) + "\n";
    s += "dropped (missing values): " + std::to_string(report.dropped_missing) + "\n";
    s += "dropped (zero outcome under log): " +
         std::to_string(report.dropped_zero_outcome) + "\n";
    s += "outcome transform: " +
         std::string(frame.transform == OutcomeTransform::Log ? "log" : "level") +
         "\n";
    for (const auto& [dim, n] : report.fe_level_counts) {
        s += "levels[" + dim + "]: " + std::to_string(n);
        auto it = report.singleton_fe_levels.find(dim);
        if (it != report.singleton_fe_levels.end() && it->second > 0)
            s += " (" + std::to_string(it->second) + " singleton)";
        s += "\n";
    }
    return s;
}

PanelFrame load_validated(const std::string& data_path,
                          const KeyValueConfig& cfg,
                          OutcomeTransform transform,
                          ValidationReport* report_out = nullptr) {
    PanelFrame frame = load_panel(data_path, Schema::from_config(cfg));
    ValidationReport report = validate(frame, transform);
    if (report_out) *report_out = report;
    return frame;
}

ModelSpec model_spec(double tol, long max_iter, int threads) {
    ModelSpec spec;
    spec.tol = tol;
    spec.max_iter = max_iter;
    spec.threads = resolve_threads(threads);
    return spec;
}

// ---------------------------------------------------------------- validate

struct ValidateOpts {
    std::string data, config, out_dir = ".", transform = "log";
};

void run_validate(const ValidateOpts& o) {
    Run run("validate", o.out_dir);
    run.config_path = o.config;
    run.input("data", o.data);
    run.input("config", o.config);
    run.flag("outcome-transform", o.transform);

    auto cfg = load_config(o.config);
    ValidationReport report;
    PanelFrame frame =
        load_validated(o.data, cfg, parse_transform(o.transform), &report);

    std::string text = validation_text(frame, report);
    write_text(run.path("validation.txt"), run.id(), text);
    write_panel_csv(frame, run.path("validated_panel.csv"), run.id());
    run.finish();
    std::cout << text << "validated panel written to " << o.out_dir << "\n";
}

// --------------------------------------------------------------------- fit

struct FitOpts {
    std::string data, config, out_dir = ".", transform = "log";
    double tol = 1e-8;
    long max_iter = 10000;
    int threads = 0;
};

void run_fit(const FitOpts& o) {
    Run run("fit", o.out_dir);
    run.config_path = o.config;
    run.input("data", o.data);
    run.input("config", o.config);
    run.flag("outcome-transform", o.transform);
    run.flag("tol", o.tol);
    run.flag("max-iter", (long long)o.max_iter);

    auto cfg = load_config(o.config);
    PanelFrame frame = load_validated(o.data, cfg, parse_transform(o.transform));
    BinnedDesign design = expand_design(frame, bin_specs(cfg));
    FitResult fit = fit_model(frame, design, model_spec(o.tol, o.max_iter, o.threads));
    ClusterVcv vcv = cluster_vcv(fit, frame);
    EffectTable table = effect_table(fit, vcv);

    write_effect_csv(table, run.path("effects.csv"), run.id());
    write_fit_csv(fit, run.path("fit.csv"), run.id());
    std::string log = format_run_log(fit);
    write_text(run.path("runlog.txt"), run.id(), log);
    run.finish();
    std::cout << log << "effects written to " << o.out_dir << "/effects.csv\n";
}

// ----------------------------------------------------------------- surface

struct SurfaceOpts {
    std::string data, config, out_dir = ".";
    long B = 1000;
    std::uint64_t seed = 7;
    long min_support = 50;
    double tol = 1e-8;
    long max_iter = 10000;
    int threads = 0;
};

void run_surface(const SurfaceOpts& o) {
    Run run("surface", o.out_dir);
    run.config_path = o.config;
    run.input("data", o.data);
    run.input("config", o.config);
    run.use_seed(o.seed);
    run.flag("B", (long long)o.B);
    run.flag("min-support", (long long)o.min_support);
    run.flag("tol", o.tol);

    auto cfg = load_config(o.config);
    PanelFrame frame = load_validated(o.data, cfg, OutcomeTransform::Log);
    BootstrapRun boot =
        cluster_bootstrap(frame, model_spec(o.tol, o.max_iter, o.threads), o.B,
                          o.seed, o.min_support);
    SurfaceGrid grid = star_grid(boot);

    write_surface_csv(grid, run.path("surface.csv"), run.id());
    std::string text = render_surface_text(grid);
    write_text(run.path("surface.txt"), run.id(), text);
    run.finish();
    std::cout << text << "surface written to " << o.out_dir << "/surface.csv\n";
}

// ------------------------------------------------------------- residualize

struct ResidualOpts {
    std::string data, config, out_dir = ".";
    double effect_pct = 34.0;
    double tol = 1e-10;
    long max_iter = 10000;
    int threads = 0;
};

void run_residualize(const ResidualOpts& o) {
    Run run("residualize", o.out_dir);
    run.config_path = o.config;
    run.input("data", o.data);
    run.input("config", o.config);
    run.flag("effect-pct", o.effect_pct);
    run.flag("tol", o.tol);

    auto cfg = load_config(o.config);
    PanelFrame frame = load_validated(o.data, cfg, OutcomeTransform::Log);
    ResidualSeries rs = residualize(frame, {}, o.tol, o.max_iter);

    {
        std::ofstream out(run.path("residuals.csv"), std::ios::binary);
        CsvWriter w(out);
        w.comment("manifest: " + run.id());
        w.row({"city", "date", "residual"});
        const auto& city = frame.cat("city");
        const auto& date = frame.num("date_code");
        for (std::size_t i = 0; i < frame.rows; ++i)
            w.row({city.levels[std::size_t(city.codes[i])],
                   iso_date(std::int64_t(date[i])), format_double(rs.values[i])});
    }

    double mult = sd_multiple(o.effect_pct, rs.sd_pct());
    char line[160];
    std::snprintf(line, sizeof(line),
                  "residual sd: %.6f log points (%.2f%%)\n"
                  "a %+.2f%% effect is %s (%.3fx)\n",
                  rs.sd, rs.sd_pct(), o.effect_pct,
                  sd_multiple_text(mult).c_str(), mult);
    write_text(run.path("residual_summary.txt"), run.id(), line);
    run.finish();
    std::cout << line;
}

// ------------------------------------------------------------------ events

struct EventsOpts {
    std::string data, events, config, out_dir = ".";
    int cell_t = 0, cell_p = 4;
    std::string weather_label = "cold-wet weather";
    long min_support = 50;
    double tol = 1e-8;
    long max_iter = 10000;
    int threads = 0;
};

void run_events(const EventsOpts& o) {
    Run run("events", o.out_dir);
    run.config_path = o.config;
    run.input("data", o.data);
    run.input("events", o.events);
    run.input("config", o.config);
    run.flag("cell-t", (long long)o.cell_t);
    run.flag("cell-p", (long long)o.cell_p);
    run.flag("weather-label", o.weather_label);
    run.flag("tol", o.tol);

    auto cfg = load_config(o.config);
    PanelFrame frame = load_validated(o.data, cfg, OutcomeTransform::Log);
    std::vector<EventSpec> events = read_events_csv(o.events);
    EventFit efit = fit_with_events(
        frame, model_spec(o.tol, o.max_iter, o.threads), events, o.min_support);
    std::vector<ComparisonRow> rows =
        event_comparison(efit, o.cell_t, o.cell_p, o.weather_label);

    write_effect_csv(efit.table, run.path("events.csv"), run.id());
    write_comparison_csv(rows, run.path("comparison.csv"), run.id());
    run.finish();
    for (const auto& r : rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-24s %+7.2f%%  [%+.2f%%, %+.2f%%]\n",
                      r.label.c_str(), r.pct_effect, r.lo, r.hi);
        std::cout << line;
    }
    std::cout << "comparison written to " << o.out_dir << "/comparison.csv\n";
}

// ---------------------------------------------------------------- classify

struct ClassifyOpts {
    std::string posts, dict, data, config, out_dir = ".";
    std::string mode = "share";
};

void run_classify(const ClassifyOpts& o) {
    Run run("classify", o.out_dir);
    run.config_path = o.config;
    run.input("posts", o.posts);
    run.input("dict", o.dict);
    run.input("data", o.data);
    run.input("config", o.config);
    run.flag("mode", o.mode);

    WeatherDictionary dict =
        o.dict.empty() ? WeatherDictionary::builtin() : WeatherDictionary::load(o.dict);
    std::vector<PostRecord> posts = read_posts_csv(o.posts);
    std::vector<CityDayCounts> counts = aggregate_posts(posts, dict);
    write_counts_csv(counts, run.path("counts.csv"), run.id());

    std::int64_t weather_total = 0, total = 0;
    for (const auto& c : counts) {
        weather_total += c.weather;
        total += c.total;
    }

    if (!o.data.empty()) {
        auto cfg = load_config(o.config);
        PanelFrame frame = load_panel(o.data, Schema::from_config(cfg));
        apply_outcomes(frame, counts, parse_outcome_mode(o.mode));
        write_panel_csv(frame, run.path("panel_outcomes.csv"), run.id());
    }
    run.finish();
    char line[160];
    std::snprintf(line, sizeof(line),
                  "%lld posts, %lld weather (%.2f%%), %zu city-days\n",
                  (long long)total, (long long)weather_total,
                  total ? 100.0 * double(weather_total) / double(total) : 0.0,
                  counts.size());
    std::cout << line << "counts written to " << o.out_dir << "/counts.csv\n";
}

// ------------------------------------------------------------------- synth

struct SynthOpts {
    std::string preset, config, out_dir = ".";
    std::uint64_t seed = 7;
};

// Stacks the truth tables of pooled platforms: occupancy adds, planted
// values must agree.
SynthTruth merge_truths(const SynthTruth& a, const SynthTruth& b) {
    SynthTruth merged = a;
    for (const auto& row : b.rows) {
        bool found = false;
        for (auto& m : merged.rows) {
            if (m.kind == row.kind && m.label == row.label) {
                if (m.log_effect != row.log_effect)
                    throw InvalidConfigError("pooled platforms plant different "
                                             "effects for " +
                                             row.kind + " " + row.label);
                m.occupancy += row.occupancy;
                found = true;
                break;
            }
        }
        if (!found) merged.rows.push_back(row);
    }
    return merged;
}

struct SynthArtifacts {
    PanelFrame frame;
    SynthTruth truth;
    std::vector<PostRecord> corpus;
    std::vector<SynthConfig> configs;
};

SynthArtifacts make_synth(const std::string& preset, std::uint64_t seed,
                          const KeyValueConfig& cfg) {
    std::vector<SynthConfig> configs;
    if (!preset.empty()) {
        configs = preset_configs(preset, seed);
    } else {
        SynthConfig c = synth_from_config(cfg);
        c.seed = seed;
        configs = {c};
    }
    SynthArtifacts art;
    art.configs = configs;
    SynthResult first = generate(configs[0]);
    art.frame = build_frame(first.raw);
    art.truth = std::move(first.truth);
    art.corpus = std::move(first.corpus);
    for (std::size_t i = 1; i < configs.size(); ++i) {
        SynthResult next = generate(configs[i]);
        art.frame = concat_frames(art.frame, build_frame(next.raw));
        art.truth = merge_truths(art.truth, next.truth);
        art.corpus.insert(art.corpus.end(), next.corpus.begin(),
                          next.corpus.end());
    }
    return art;
}

void run_synth(const SynthOpts& o) {
    Run run("synth", o.out_dir);
    run.config_path = o.config;
    run.input("config", o.config);
    run.use_seed(o.seed);
    run.flag("preset", o.preset);

    auto cfg = load_config(o.config);
    if (o.preset.empty() && !cfg.has("synth.n_cities") && !cfg.has("synth.n_days"))
        throw InvalidConfigError("synth needs --preset or a config with synth.* keys");
    SynthArtifacts art = make_synth(o.preset, o.seed, cfg);

    write_panel_csv(art.frame, run.path("panel.csv"), run.id());
    write_truth_csv(art.truth, run.path("truth.csv"), run.id());
    if (!art.corpus.empty())
        write_posts_csv(art.corpus, run.path("corpus.csv"), run.id());
    for (std::size_t i = 0; i < art.configs.size(); ++i) {
        KeyValueConfig out_cfg;
        synth_to_config(art.configs[i], out_cfg);
        std::string body;
        for (const auto& [k, v] : out_cfg.entries()) body += k + " = " + v + "\n";
        std::string name = i == 0 ? "synth_config.txt"
                                  : "synth_config_" + std::to_string(i + 1) + ".txt";
        write_text(run.path(name), run.id(), body);
    }
    run.finish();
    std::cout << art.frame.rows << " rows, " << art.truth.rows.size()
              << " truth rows";
    if (!art.corpus.empty()) std::cout << ", " << art.corpus.size() << " posts";
    std::cout << " written to " << o.out_dir << "\n";
}

// --------------------------------------------------------------- reproduce

struct ReproduceOpts {
    std::string preset, out_dir = ".";
    std::uint64_t seed = 7;
    long B = 1000;
    long min_support = 50;
    double tol = 1e-8;
    long max_iter = 10000;
    int threads = 0;
};

struct ReportRow {
    std::string kind, label;
    double planted_pct = 0.0;
    bool has_recovered = false;
    double recovered_pct = 0.0;
    std::string note;
};

void write_report(Run& run, const std::vector<ReportRow>& rows,
                  const std::string& summary) {
    {
        std::ofstream out(run.path("report.csv"), std::ios::binary);
        CsvWriter w(out);
        w.comment("manifest: " + run.id());
        w.row({"kind", "label", "planted_pct", "recovered_pct", "abs_error",
               "note"});
        for (const auto& r : rows) {
            std::string rec = r.has_recovered ? format_double(r.recovered_pct) : "";
            std::string err = r.has_recovered
                                  ? format_double(std::fabs(r.recovered_pct -
                                                            r.planted_pct))
                                  : "";
            w.row({r.kind, r.label, format_double(r.planted_pct), rec, err,
                   r.note});
        }
    }
    std::string text = summary;
    for (const auto& r : rows) {
        char line[200];
        if (r.has_recovered)
            std::snprintf(line, sizeof(line),
                          "%-18s %-22s planted %+7.2f%%  recovered %+7.2f%%  %s\n",
                          r.kind.c_str(), r.label.c_str(), r.planted_pct,
                          r.recovered_pct, r.note.c_str());
        else
            std::snprintf(line, sizeof(line),
                          "%-18s %-22s planted %+7.2f%%  recovered      n/a  %s\n",
                          r.kind.c_str(), r.label.c_str(), r.planted_pct,
                          r.note.c_str());
        text += line;
    }
    write_text(run.path("report.txt"), run.id(), text);
    std::cout << text;
}

enum class Chain { Marginals, Surface, Events, Share, Residual };

Chain chain_for(const std::string& preset) {
    if (preset == "paper-fig2-facebook" || preset == "paper-fig2-twitter" ||
        preset == "paper-fig4ab-individual")
        return Chain::Marginals;
    if (preset == "paper-fig2" || preset == "paper-fig2c-facebook" ||
        preset == "paper-fig2f-twitter" || preset == "surface-null-small")
        return Chain::Surface;
    if (preset == "paper-fig4c") return Chain::Events;
    if (preset == "paper-fig3-share") return Chain::Share;
    if (preset == "deconvolve-baseline") return Chain::Residual;
    throw InvalidConfigError("no reproduce chain for preset: " + preset);
}

void reproduce_marginals(Run& run, const ReproduceOpts& o, SynthArtifacts& art) {
    validate(art.frame);
    BinnedDesign design = expand_design(art.frame, default_paper_specs());
    FitResult fit =
        fit_model(art.frame, design, model_spec(o.tol, o.max_iter, o.threads));
    EffectTable table = effect_table(fit, cluster_vcv(fit, art.frame));
    write_effect_csv(table, run.path("effects.csv"), run.id());

    std::vector<ReportRow> rows;
    double max_err = 0.0;
    for (const auto& t : art.truth.rows) {
        if (t.kind.rfind("marginal:", 0) != 0) continue;
        ReportRow r{t.kind, t.label, t.pct, false, 0.0, ""};
        const EffectRow* e = table.find(t.kind.substr(9) + ":" + t.label);
        if (e) {
            r.has_recovered = true;
            r.recovered_pct = e->pct_effect;
            if (t.log_effect != 0.0)
                max_err = std::max(max_err, std::fabs(r.recovered_pct - t.pct));
        } else {
            r.note = t.occupancy == 0 ? "empty bin" : "reference or dropped";
        }
        rows.push_back(std::move(r));
    }
    char head[120];
    std::snprintf(head, sizeof(head),
                  "max abs error over planted bins: %.3f pp\n", max_err);
    write_report(run, rows, head);
}

void reproduce_surface(Run& run, const ReproduceOpts& o, SynthArtifacts& art) {
    validate(art.frame);
    BootstrapRun boot =
        cluster_bootstrap(art.frame, model_spec(o.tol, o.max_iter, o.threads),
                          o.B, run.seed, o.min_support);
    SurfaceGrid grid = star_grid(boot);
    write_surface_csv(grid, run.path("surface.csv"), run.id());
    write_text(run.path("surface.txt"), run.id(), render_surface_text(grid));

    std::vector<ReportRow> rows;
    int starred_total = 0, starred_ok = 0;
    for (const auto& cell : grid.cells) {
        std::string label = cell.t_label + " × " + cell.p_label;
        const TruthRow* t = art.truth.find("cell", label);
        double planted = t ? t->pct : 0.0;
        ReportRow r{"cell", label, planted, true, cell.median_pct, ""};
        if (cell.starred) {
            ++starred_total;
            bool ok = planted != 0.0 &&
                      (planted > 0) == (cell.median_pct > 0);
            if (ok) ++starred_ok;
            r.note = ok ? "starred, sign matches truth" : "starred, no planted effect";
        } else if (planted != 0.0) {
            r.note = "planted but unstarred";
        }
        rows.push_back(std::move(r));
    }
    char head[160];
    std::snprintf(head, sizeof(head),
                  "starred cells consistent with planted truth: %d of %d\n",
                  starred_ok, starred_total);
    write_report(run, rows, head);
}

void reproduce_events(Run& run, const ReproduceOpts& o, SynthArtifacts& art) {
    validate(art.frame);
    std::vector<EventSpec> events;
    for (const auto& cfg : art.configs) {
        for (const auto& pe : cfg.planted_events) {
            EventSpec* found = nullptr;
            for (auto& e : events)
                if (e.name == pe.name) found = &e;
            if (!found) {
                events.push_back({pe.name, pe.city, {}});
                found = &events.back();
            }
            found->dates.insert(found->dates.end(), pe.dates.begin(),
                                pe.dates.end());
        }
    }
    EventFit efit =
        fit_with_events(art.frame, model_spec(o.tol, o.max_iter, o.threads),
                        events, o.min_support);
    std::vector<ComparisonRow> comparison =
        event_comparison(efit, 0, 4, "cold-wet weather");
    write_effect_csv(efit.table, run.path("events.csv"), run.id());
    write_comparison_csv(comparison, run.path("comparison.csv"), run.id());

    std::vector<ReportRow> rows;
    int covered = 0, total = 0;
    for (const auto& t : art.truth.rows) {
        if (t.kind != "event") continue;
        ++total;
        ReportRow r{"event", t.label, t.pct, false, 0.0, ""};
        const EffectRow* e = efit.table.find("event:" + t.label);
        if (e) {
            r.has_recovered = true;
            r.recovered_pct = e->pct_effect;
            bool in99 = std::fabs(e->estimate - t.log_effect) <= kZ99 * e->se;
            if (in99) ++covered;
            r.note = in99 ? "within 99% CI" : "outside 99% CI";
        }
        rows.push_back(std::move(r));
    }
    const TruthRow* cell = art.truth.find(
        "cell", surface_tmax_spec().label(0) + " × " +
                    surface_precip_spec().label(4));
    for (const auto& c : comparison) {
        if (c.label == "cold-wet weather") {
            ReportRow r{"weather", c.label, cell ? cell->pct : 0.0, true,
                        c.pct_effect, "combined cold-wet cell"};
            rows.push_back(std::move(r));
        }
    }
    char head[120];
    std::snprintf(head, sizeof(head), "events inside their 99%% CI: %d of %d\n",
                  covered, total);
    write_report(run, rows, head);
}

void reproduce_share(Run& run, const ReproduceOpts& o, SynthArtifacts& art) {
    WeatherDictionary dict = WeatherDictionary::builtin();
    std::vector<CityDayCounts> counts = aggregate_posts(art.corpus, dict);
    write_counts_csv(counts, run.path("counts.csv"), run.id());
    apply_outcomes(art.frame, counts, OutcomeMode::Share);
    validate(art.frame, OutcomeTransform::Level);
    BinnedDesign design = expand_design(art.frame, default_paper_specs());
    FitResult fit =
        fit_model(art.frame, design, model_spec(o.tol, o.max_iter, o.threads));
    EffectTable table = effect_table(fit, cluster_vcv(fit, art.frame));
    write_effect_csv(table, run.path("effects.csv"), run.id());

    // The corpus plants a flat weather-text rate, so every share effect's
    // planted value is zero percentage points.
    std::vector<ReportRow> rows;
    double max_abs = 0.0;
    for (const auto& e : table.rows) {
        ReportRow r{"share", e.term, 0.0, true, 100.0 * e.estimate,
                    "percentage points of share"};
        max_abs = std::max(max_abs, std::fabs(r.recovered_pct));
        rows.push_back(std::move(r));
    }
    char head[120];
    std::snprintf(head, sizeof(head),
                  "largest absolute share effect: %.3f pp (planted 0)\n",
                  max_abs);
    write_report(run, rows, head);
}

void reproduce_residual(Run& run, const ReproduceOpts& o, SynthArtifacts& art) {
    validate(art.frame);
    ResidualSeries rs = residualize(art.frame, {}, 1e-10, o.max_iter);
    double mult = sd_multiple(34.0, rs.sd_pct());
    std::vector<ReportRow> rows;
    rows.push_back({"residual-sd", "log points",
                    100.0 * art.configs[0].noise_sd, true, rs.sd_pct(),
                    sd_multiple_text(mult) + " for a +34% effect"});
    char head[120];
    std::snprintf(head, sizeof(head), "planted noise sd %.3f, recovered %.6f\n",
                  art.configs[0].noise_sd, rs.sd);
    write_report(run, rows, head);
}

void run_reproduce(const ReproduceOpts& o) {
    Run run("reproduce", o.out_dir);
    run.use_seed(o.seed);
    run.flag("preset", o.preset);
    run.flag("B", (long long)o.B);
    run.flag("min-support", (long long)o.min_support);

    Chain chain = chain_for(o.preset);
    KeyValueConfig empty;
    SynthArtifacts art = make_synth(o.preset, o.seed, empty);
    write_truth_csv(art.truth, run.path("truth.csv"), run.id());

    switch (chain) {
    case Chain::Marginals: reproduce_marginals(run, o, art); break;
    case Chain::Surface: reproduce_surface(run, o, art); break;
    case Chain::Events: reproduce_events(run, o, art); break;
    case Chain::Share: reproduce_share(run, o, art); break;
    case Chain::Residual: reproduce_residual(run, o, art); break;
    }
    run.finish();
}

void add_model_flags(CLI::App* cmd, double* tol, long* max_iter, int* threads) {
    cmd->add_option("--tol", *tol, "absorption convergence tolerance")
        ->capture_default_str();
    cmd->add_option("--max-iter", *max_iter, "absorption sweep limit")
        ->capture_default_str();
    cmd->add_option("--threads", *threads,
                    "worker threads (0 = PANELFX_THREADS or all cores)")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"panelfx: high-dimensional fixed-effects panel estimation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("panelfx ") + kToolVersion);

    ValidateOpts vo;
    auto* validate_cmd =
        app.add_subcommand("validate", "check a panel and write the cleaned copy");
    validate_cmd->add_option("--data", vo.data, "panel CSV")
        ->required()
        ->check(CLI::ExistingFile);
    validate_cmd->add_option("--config", vo.config, "key-value config file");
    validate_cmd->add_option("--out-dir", vo.out_dir, "output directory")
        ->capture_default_str();
    validate_cmd
        ->add_option("--outcome-transform", vo.transform, "log or level")
        ->check(CLI::IsMember({"log", "level"}))
        ->capture_default_str();

    FitOpts fo;
    auto* fit_cmd =
        app.add_subcommand("fit", "binned weather regression with absorbed fixed effects");
    fit_cmd->add_option("--data", fo.data, "panel CSV")
        ->required()
        ->check(CLI::ExistingFile);
    fit_cmd->add_option("--config", fo.config, "key-value config file");
    fit_cmd->add_option("--out-dir", fo.out_dir, "output directory")
        ->capture_default_str();
    fit_cmd->add_option("--outcome-transform", fo.transform, "log or level")
        ->check(CLI::IsMember({"log", "level"}))
        ->capture_default_str();
    add_model_flags(fit_cmd, &fo.tol, &fo.max_iter, &fo.threads);

    SurfaceOpts so;
    auto* surface_cmd = app.add_subcommand(
        "surface", "temperature-by-precipitation grid with bootstrap stars");
    surface_cmd->add_option("--data", so.data, "panel CSV")
        ->required()
        ->check(CLI::ExistingFile);
    surface_cmd->add_option("--config", so.config, "key-value config file");
    surface_cmd->add_option("--out-dir", so.out_dir, "output directory")
        ->capture_default_str();
    surface_cmd->add_option("--B", so.B, "bootstrap replicates")
        ->capture_default_str();
    surface_cmd->add_option("--seed", so.seed, "bootstrap seed")
        ->capture_default_str();
    surface_cmd
        ->add_option("--min-support", so.min_support,
                     "rows needed before a cell is reported")
        ->capture_default_str();
    add_model_flags(surface_cmd, &so.tol, &so.max_iter, &so.threads);

    ResidualOpts ro;
    auto* resid_cmd = app.add_subcommand(
        "residualize", "strip fixed effects and report residual dispersion");
    resid_cmd->add_option("--data", ro.data, "panel CSV")
        ->required()
        ->check(CLI::ExistingFile);
    resid_cmd->add_option("--config", ro.config, "key-value config file");
    resid_cmd->add_option("--out-dir", ro.out_dir, "output directory")
        ->capture_default_str();
    resid_cmd
        ->add_option("--effect-pct", ro.effect_pct,
                     "effect size to express in residual sd units")
        ->capture_default_str();
    add_model_flags(resid_cmd, &ro.tol, &ro.max_iter, &ro.threads);

    EventsOpts eo;
    auto* events_cmd = app.add_subcommand(
        "events", "event indicators beside the weather design");
    events_cmd->add_option("--data", eo.data, "panel CSV")
        ->required()
        ->check(CLI::ExistingFile);
    events_cmd->add_option("--events", eo.events, "events CSV (name,city_id,date)")
        ->required()
        ->check(CLI::ExistingFile);
    events_cmd->add_option("--config", eo.config, "key-value config file");
    events_cmd->add_option("--out-dir", eo.out_dir, "output directory")
        ->capture_default_str();
    events_cmd->add_option("--cell-t", eo.cell_t, "comparison cell tmax bin")
        ->capture_default_str();
    events_cmd->add_option("--cell-p", eo.cell_p, "comparison cell precip bin")
        ->capture_default_str();
    events_cmd
        ->add_option("--weather-label", eo.weather_label,
                     "label for the combined weather bar")
        ->capture_default_str();
    events_cmd
        ->add_option("--min-support", eo.min_support,
                     "rows needed before a cell is reported")
        ->capture_default_str();
    add_model_flags(events_cmd, &eo.tol, &eo.max_iter, &eo.threads);

    ClassifyOpts co;
    auto* classify_cmd = app.add_subcommand(
        "classify", "dictionary-classify posts and build city-day outcomes");
    classify_cmd->add_option("--posts", co.posts, "posts CSV (text,city_id,date)")
        ->required()
        ->check(CLI::ExistingFile);
    classify_cmd->add_option("--dict", co.dict, "term list, one per line")
        ->check(CLI::ExistingFile);
    classify_cmd->add_option("--data", co.data,
                             "panel CSV to merge the outcomes into")
        ->check(CLI::ExistingFile);
    classify_cmd->add_option("--config", co.config, "key-value config file");
    classify_cmd->add_option("--out-dir", co.out_dir, "output directory")
        ->capture_default_str();
    classify_cmd->add_option("--mode", co.mode, "outcome definition")
        ->check(CLI::IsMember({"share", "nonweather-count", "all-count"}))
        ->capture_default_str();

    SynthOpts yo;
    auto* synth_cmd =
        app.add_subcommand("synth", "generate an oracle panel with known effects");
    synth_cmd->add_option("--preset", yo.preset, "named calibration");
    synth_cmd->add_option("--config", yo.config, "config with synth.* keys");
    synth_cmd->add_option("--seed", yo.seed, "generator seed")
        ->capture_default_str();
    synth_cmd->add_option("--out-dir", yo.out_dir, "output directory")
        ->capture_default_str();

    ReproduceOpts po;
    auto* repro_cmd = app.add_subcommand(
        "reproduce", "synth, refit, and compare recovered effects with truth");
    repro_cmd->add_option("--preset", po.preset, "named calibration")->required();
    repro_cmd->add_option("--seed", po.seed, "generator and bootstrap seed")
        ->capture_default_str();
    repro_cmd->add_option("--B", po.B, "bootstrap replicates (surface chains)")
        ->capture_default_str();
    repro_cmd
        ->add_option("--min-support", po.min_support,
                     "rows needed before a cell is reported")
        ->capture_default_str();
    repro_cmd->add_option("--out-dir", po.out_dir, "output directory")
        ->capture_default_str();
    add_model_flags(repro_cmd, &po.tol, &po.max_iter, &po.threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (validate_cmd->parsed()) run_validate(vo);
        if (fit_cmd->parsed()) run_fit(fo);
        if (surface_cmd->parsed()) run_surface(so);
        if (resid_cmd->parsed()) run_residualize(ro);
        if (events_cmd->parsed()) run_events(eo);
        if (classify_cmd->parsed()) run_classify(co);
        if (synth_cmd->parsed()) run_synth(yo);
        if (repro_cmd->parsed()) run_reproduce(po);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const EstimationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
