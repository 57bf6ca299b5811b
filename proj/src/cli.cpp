#include "honeytrap/cli.hpp"

#include "honeytrap/config.hpp"
#include "honeytrap/errors.hpp"
#include "honeytrap/io.hpp"
#include "honeytrap/json_reader.hpp"
#include "honeytrap/learner.hpp"
#include "honeytrap/metrics.hpp"
#include "honeytrap/sim.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

namespace honeytrap {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void configure_logging()
{
    static std::once_flag once;
    std::call_once(once, [] {
        auto logger = spdlog::stderr_logger_mt("honeytrap");
        logger->set_pattern("[%l] %v");
        spdlog::set_default_logger(logger);
    });
    const char* env = std::getenv("HONEYTRAP_LOG_LEVEL");
    const std::string level = env == nullptr ? "warn" : env;
    if (level == "error") {
        spdlog::set_level(spdlog::level::err);
    }
    else if (level == "warn") {
        spdlog::set_level(spdlog::level::warn);
    }
    else if (level == "info") {
        spdlog::set_level(spdlog::level::info);
    }
    else if (level == "debug") {
        spdlog::set_level(spdlog::level::debug);
    }
    else {
        throw std::invalid_argument("HONEYTRAP_LOG_LEVEL must be error, warn, info or debug, not '" + level + "'");
    }
}

namespace {

std::vector<double> parse_thresholds(const std::string& text)
{
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item == "inf") {
            out.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        }
        catch (const std::exception&) {
            used = 0;
        }
        if (item.empty() || used != item.size() || std::isnan(v) || v < 0.0) {
            throw std::invalid_argument("--thresholds: '" + item + "' is not a non-negative number or inf");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw std::invalid_argument("--thresholds: empty list");
    }
    return out;
}

std::vector<std::string> parse_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

void emit(const std::string& content, const std::string& out_path, std::ostream& out)
{
    if (out_path.empty()) {
        out << content;
    }
    else {
        write_file_atomic(out_path, content);
    }
}

std::string revisions_json(const std::vector<HoneypotRevision>& revisions)
{
    json arr = json::array();
    for (const auto& r : revisions) {
        arr.push_back(to_json(r));
    }
    return json{{"schema_version", kSchemaVersion}, {"revisions", std::move(arr)}}.dump(2) + "\n";
}

std::vector<HoneypotRevision> load_revisions(const fs::path& path)
{
    if (!fs::exists(path)) {
        return {};
    }
    const auto j = json::parse(read_text_file(path));
    std::vector<HoneypotRevision> out;
    for (const auto& r : j.at("revisions")) {
        out.push_back(honeypot_revision_from_json(r));
    }
    return out;
}

void write_run(const RunResult& result, const fs::path& dir)
{
    fs::create_directories(dir);
    write_file_atomic(dir / "events.jsonl", event_log_to_jsonl(result.events));
    write_file_atomic(dir / "report.json", to_json(result.report).dump(2) + "\n");
    write_file_atomic(dir / "world.json", to_json(result.world).dump(2) + "\n");
    write_file_atomic(dir / "revisions.json", revisions_json(result.revisions));
    write_file_atomic(dir / "suspicion.csv", suspicion_records_csv(result.records, truth_labels(result.world)));
    write_file_atomic(dir / "losses.csv", loss_report_csv(result.report.economics.venues));
}

/// A finished run read back from a simulate output directory.
struct StoredRun {
    SimConfig config;
    WorldState world;
    std::vector<CheckInEvent> events;
    std::vector<HoneypotRevision> revisions;
};

StoredRun load_run(const fs::path& dir)
{
    StoredRun run;
    run.config = run_report_from_json(json::parse(read_text_file(dir / "report.json"))).config;
    run.world = world_from_json(json::parse(read_text_file(dir / "world.json")));
    run.events = event_log_from_jsonl(read_text_file(dir / "events.jsonl"));
    run.revisions = load_revisions(dir / "revisions.json");
    return run;
}

std::string one_line(std::string text)
{
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Honeypot-venue simulator for location-based check-in fraud", "honeytrap"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned runs = 1;
    unsigned parallel = 1;
    auto* simulate = app.add_subcommand("simulate", "Run the simulation and write the event log and report");
    simulate->add_option("--config", config_path, "Config file (JSON)")->required();
    simulate->add_option("--seed", seed, "Seed override");
    simulate->add_option("--out", out_dir, "Output directory")->required();
    simulate->add_option("--runs", runs, "Number of runs with consecutive seeds")->check(CLI::PositiveNumber);
    simulate->add_option("--parallel", parallel, "Runs executed concurrently")->check(CLI::PositiveNumber);

    std::string run_dir;
    std::string thresholds_text;
    std::string format = "csv";
    std::string out_file;
    auto* sweep = app.add_subcommand("sweep", "Detection/false-positive trade-off over a threshold grid");
    auto* sweep_run = sweep->add_option("--run", run_dir, "Directory written by simulate");
    auto* sweep_config = sweep->add_option("--config", config_path, "Simulate this config first");
    sweep_run->excludes(sweep_config);
    sweep->add_option("--seed", seed, "Seed override (with --config)");
    sweep->add_option("--thresholds", thresholds_text, "Comma-separated thresholds; 'inf' allowed");
    sweep->add_option("--format", format, "csv, json or md");
    sweep->add_option("--out", out_file, "Output file (default: standard output)");

    std::optional<double> grid_step;
    std::string features_text;
    std::string candidates_text;
    auto* calibrate = app.add_subcommand("calibrate", "Fit the cheater choice model to flagged users' check-ins");
    calibrate->add_option("--run", run_dir, "Directory written by simulate")->required();
    calibrate->add_option("--grid-step", grid_step, "Simplex grid spacing");
    calibrate->add_option("--features", features_text, "Comma-separated feature columns");
    calibrate->add_option("--candidates", candidates_text, "Extra features to test for inclusion");
    calibrate->add_option("--out", out_file, "Output file (default: <run>/fit.json)");

    std::string in_file;
    auto* report = app.add_subcommand("report", "Render a saved report");
    report->add_option("--in", in_file, "report.json written by simulate")->required();
    report->add_option("--format", format, "csv, json or md");
    report->add_option("--out", out_file, "Output file (default: standard output)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    }
    catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    }
    catch (const CLI::ParseError& e) {
        err << "error: " << one_line(e.what()) << '\n';
        return 2;
    }

    try {
        if (simulate->parsed()) {
            auto base = load_config(config_path);
            if (seed) {
                base.seed = *seed;
            }
            if (runs == 1) {
                write_run(run(base), out_dir);
                return 0;
            }
            std::vector<std::uint64_t> seeds;
            for (unsigned i = 0; i < runs; ++i) {
                seeds.push_back(base.seed + i);
            }
            const auto configs = with_seeds(base, seeds);
            parallel_for_each(configs.size(), parallel, [&](std::size_t i) {
                char name[32];
                std::snprintf(name, sizeof name, "run_%03zu", i);
                write_run(run(configs[i]), fs::path(out_dir) / name);
            });
            return 0;
        }
        if (sweep->parsed()) {
            const auto fmt = report_format_from_string(format);
            if (run_dir.empty() && config_path.empty()) {
                throw std::invalid_argument("sweep needs --run or --config");
            }
            std::vector<CheckInEvent> events;
            WorldState world;
            SimConfig config;
            if (!run_dir.empty()) {
                auto stored = load_run(run_dir);
                events = std::move(stored.events);
                world = std::move(stored.world);
                config = std::move(stored.config);
            }
            else {
                config = load_config(config_path);
                if (seed) {
                    config.seed = *seed;
                }
                auto result = run(config);
                events = std::move(result.events);
                world = std::move(result.world);
            }
            const auto grid = thresholds_text.empty() ? config.report_thresholds : parse_thresholds(thresholds_text);
            const auto points = roc_sweep(events, truth_labels(world), config.detector, grid);
            emit(render_sweep(points, fmt), out_file, out);
            return 0;
        }
        if (calibrate->parsed()) {
            const auto stored = load_run(run_dir);
            const auto records = replay(stored.events, stored.config.detector);
            const auto bias = stored.config.bias();
            const auto data =
                collect_flagged_histories(stored.events, records, stored.world, stored.revisions, 0, &bias);
            const auto features = features_text.empty() ? stored.config.learner.features : parse_list(features_text);
            const double step = grid_step.value_or(stored.config.learner.grid_step);
            const auto fit = fit_weights(data, step, features);
            auto doc = to_json(fit);
            if (!candidates_text.empty()) {
                json gains = json::array();
                for (const auto& g : extend_feature_set(data, parse_list(candidates_text), features, step)) {
                    gains.push_back(json{{"feature", g.feature},
                                         {"base_log_likelihood", g.base_log_likelihood},
                                         {"extended_log_likelihood", g.extended_log_likelihood},
                                         {"gain", g.gain},
                                         {"recommended", g.recommended}});
                }
                doc["feature_gains"] = std::move(gains);
            }
            const auto target = out_file.empty() ? (fs::path(run_dir) / "fit.json").string() : out_file;
            write_file_atomic(target, doc.dump(2) + "\n");
            return 0;
        }
        if (report->parsed()) {
            const auto fmt = report_format_from_string(format);
            const auto loaded = run_report_from_json(json::parse(read_text_file(in_file)));
            emit(render_report(loaded, fmt), out_file, out);
            return 0;
        }
    }
    catch (const std::exception& e) {
        err << "error: " << one_line(e.what()) << '\n';
        return 1;
    }
    return 1;
}

} // namespace honeytrap
