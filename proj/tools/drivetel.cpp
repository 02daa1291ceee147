#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "drivetel/csv.hpp"
#include "drivetel/dtw.hpp"
#include "drivetel/errors.hpp"
#include "drivetel/evt.hpp"
#include "drivetel/ingest.hpp"
#include "drivetel/log.hpp"
#include "drivetel/mapmatch.hpp"
#include "drivetel/pipeline.hpp"
#include "drivetel/preprocess.hpp"
#include "drivetel/report.hpp"
#include "drivetel/stats.hpp"
#include "drivetel/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

namespace dt = drivetel;

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out.is_open()) throw dt::ConfigError("cannot open output file: " + path);
    out << content;
}

std::string stage_of(const std::string& message) {
    const auto pos = message.find(':');
    return pos == std::string::npos ? "unknown" : message.substr(0, pos);
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
    std::string out;
    dt::synth::SynthConfig config;
    bool no_truth_samples = false;
};

int cmd_synth(const SynthArgs& args) {
    dt::synth::SynthConfig config = args.config;
    config.write_truth_samples = !args.no_truth_samples;
    const auto summary = dt::synth::generate_dataset(config, args.out);
    std::cout << "wrote " << summary.phone_path << " (" << summary.n_phone_records
              << " records)\n";
    std::cout << "wrote " << summary.can_path << " (" << summary.n_can_records << " records)\n";
    std::cout << "wrote " << summary.network_path << " (" << summary.n_segments << " segments, "
              << summary.n_active_segments << " active)\n";
    std::cout << "wrote " << summary.truth_path << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- ingest ----

int cmd_ingest(const std::string& phone, const std::string& can, const std::string& out_dir,
               double gap_threshold_s) {
    std::filesystem::create_directories(out_dir);
    dt::ingest::ParsedPhoneLog phone_log;
    dt::ingest::ParsedCanLog can_log;
    if (!phone.empty()) phone_log = dt::ingest::parse_phone_log(phone);
    if (!can.empty()) can_log = dt::ingest::parse_can_log(can);
    const auto trips = dt::ingest::build_trips(phone_log.records, can_log.records);

    dt::ingest::InventoryOptions opts;
    opts.gap_threshold_s = gap_threshold_s;
    const auto report =
        dt::ingest::inventory_report(phone_log.records, can_log.records, trips, opts);

    const std::filesystem::path dir(out_dir);
    write_text_file((dir / "inventory.json").string(), dt::ingest::inventory_json(report));
    write_text_file((dir / "inventory.txt").string(), dt::ingest::inventory_table(report));
    if (!can_log.unmapped_channels.empty()) {
        nlohmann::ordered_json j;
        for (const auto& [name, count] : can_log.unmapped_channels) j[name] = count;
        write_text_file((dir / "unmapped_channels.json").string(), j.dump(1) + "\n");
    }
    std::cout << dt::ingest::inventory_table(report);
    return kExitOk;
}

// ---------------------------------------------------------------- clean ----

int cmd_clean(const std::string& phone, const std::string& out_dir,
              const dt::pipeline::PipelineConfig& params) {
    std::filesystem::create_directories(out_dir);
    const auto phone_log = dt::ingest::parse_phone_log(phone);

    std::map<std::string, std::vector<dt::PhoneRecord>> by_trip;
    for (const auto& r : phone_log.records) by_trip[r.trip_id].push_back(r);

    std::vector<dt::PhoneRecord> cleaned_records;
    std::vector<dt::Trajectory> cleaned_speed;
    std::vector<dt::Trajectory> smoothed;
    std::vector<bool> cleaned_flags;
    std::vector<bool> smoothed_flags;
    dt::pipeline::CleanCounts counts;

    for (auto& [trip_id, records] : by_trip) {
        std::stable_sort(records.begin(), records.end(),
                         [](const dt::PhoneRecord& a, const dt::PhoneRecord& b) {
                             return a.timestamp < b.timestamp;
                         });
        const bool active = records.front().active;
        dt::Trajectory speed;
        speed.trip_id = trip_id;
        speed.channel = dt::Channel::speed;
        speed.units = "m/s";
        for (const auto& r : records) speed.samples.push_back({r.timestamp, r.speed});

        std::map<double, const dt::PhoneRecord*> by_time;
        for (const auto& r : records) by_time.emplace(r.timestamp, &r);

        for (auto& piece : dt::pipeline::preprocess_speed(speed, params, counts)) {
            for (const auto& s : piece.speed_clean.samples) {
                cleaned_records.push_back(*by_time.at(s.timestamp));
            }
            cleaned_speed.push_back(piece.speed_clean);
            cleaned_flags.push_back(active);
            smoothed.push_back(piece.speed_smooth);
            smoothed_flags.push_back(active);
            smoothed.push_back(piece.accel);
            smoothed_flags.push_back(active);
        }
    }

    const std::filesystem::path dir(out_dir);
    dt::ingest::write_phone_csv((dir / "cleaned_phone.csv").string(), cleaned_records);
    dt::prep::write_trajectory_csv((dir / "cleaned_speed.csv").string(), cleaned_speed,
                                   cleaned_flags, "cleaned");
    dt::prep::write_trajectory_csv((dir / "smoothed.csv").string(), smoothed, smoothed_flags,
                                   "smoothed");
    std::cout << "cleaned records: " << cleaned_records.size()
              << " (removed by limits: " << counts.removed_speed_limits
              << ", zero runs: " << counts.removed_zero_runs << ")\n";
    return kExitOk;
}

// ---------------------------------------------------------------- match ----

int cmd_match(const std::string& phone, const std::string& network_path,
              const std::string& out_dir, const dt::mapmatch::HmmParams& params) {
    std::filesystem::create_directories(out_dir);
    const auto phone_log = dt::ingest::parse_phone_log(phone);
    const auto network = dt::mapmatch::load_network(network_path);

    std::map<std::string, std::vector<dt::PhoneRecord>> by_trip;
    for (const auto& r : phone_log.records) by_trip[r.trip_id].push_back(r);

    std::string body = "trip_id,timestamp,segment_id,distance_m,position_m\n";
    std::size_t matched = 0;
    std::size_t total = 0;
    for (auto& [trip_id, records] : by_trip) {
        std::stable_sort(records.begin(), records.end(),
                         [](const dt::PhoneRecord& a, const dt::PhoneRecord& b) {
                             return a.timestamp < b.timestamp;
                         });
        const auto match =
            dt::mapmatch::hmm_match(dt::mapmatch::track_from_phone(records), network, params);
        matched += match.matched_count();
        total += match.timestamps.size();
        dt::mapmatch::append_match_csv(body, trip_id, match);
    }
    const auto path = (std::filesystem::path(out_dir) / "match.csv").string();
    write_text_file(path, body);
    std::cout << "matched " << matched << " / " << total << " fixes -> " << path << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- align ----

int cmd_align(const std::string& can, const std::string& phone, const std::string& out_dir,
              double band_s, std::size_t max_cells) {
    std::filesystem::create_directories(out_dir);
    const auto can_log = dt::ingest::parse_can_log(can);
    const auto phone_log = dt::ingest::parse_phone_log(phone);

    std::map<std::string, std::vector<dt::CanRecord>> can_by_trip;
    std::map<std::string, std::vector<dt::PhoneRecord>> phone_by_trip;
    for (const auto& r : can_log.records) can_by_trip[r.trip_id].push_back(r);
    for (const auto& r : phone_log.records) phone_by_trip[r.trip_id].push_back(r);

    std::vector<dt::LocatedCanRecord> located;
    for (auto& [trip_id, can_records] : can_by_trip) {
        auto it = phone_by_trip.find(trip_id);
        if (it == phone_by_trip.end()) continue;
        auto& phone_records = it->second;
        std::stable_sort(can_records.begin(), can_records.end(),
                         [](const dt::CanRecord& a, const dt::CanRecord& b) {
                             return a.timestamp < b.timestamp;
                         });
        std::stable_sort(phone_records.begin(), phone_records.end(),
                         [](const dt::PhoneRecord& a, const dt::PhoneRecord& b) {
                             return a.timestamp < b.timestamp;
                         });
        // Alignment needs strictly increasing phone timestamps.
        phone_records.erase(std::unique(phone_records.begin(), phone_records.end(),
                                        [](const dt::PhoneRecord& a, const dt::PhoneRecord& b) {
                                            return a.timestamp == b.timestamp;
                                        }),
                            phone_records.end());
        std::vector<double> can_ts, phone_ts;
        for (const auto& r : can_records) can_ts.push_back(r.timestamp);
        for (const auto& r : phone_records) phone_ts.push_back(r.timestamp);
        const auto path = dt::align::dtw_align_chunked(can_ts, phone_ts, band_s, max_cells);
        auto trip_located = dt::align::transfer_locations(can_records, phone_records, path);
        located.insert(located.end(), trip_located.begin(), trip_located.end());
    }

    const auto out_path = (std::filesystem::path(out_dir) / "located_can.csv").string();
    dt::align::write_located_csv(out_path, located);
    std::cout << "located " << located.size() << " CAN records -> " << out_path << "\n";
    return kExitOk;
}

// ------------------------------------------------------- analyze / evt ----

struct AnalysisInputs {
    dt::pipeline::AccelSamples samples;
    std::map<std::string, dt::stats::GroupedSamples> by_segment;
};

AnalysisInputs load_analysis_inputs(const std::string& accel_path, const std::string& match_path,
                                    const dt::mapmatch::RoadNetwork& network) {
    const auto records = dt::prep::read_trajectory_csv(accel_path);
    const auto matches = dt::mapmatch::read_match_csv(match_path);
    AnalysisInputs inputs;
    inputs.samples = dt::pipeline::collect_active_segment_accel(records, matches, network,
                                                                &inputs.by_segment);
    if (inputs.samples.active.empty() || inputs.samples.inactive.empty()) {
        throw dt::DataError("no acceleration samples on active segments for both groups");
    }
    return inputs;
}

int cmd_analyze(const std::string& accel_path, const std::string& match_path,
                const std::string& network_path, const std::string& located_path,
                const std::string& out_dir, std::size_t min_segment_count) {
    std::filesystem::create_directories(out_dir);
    const auto network = dt::mapmatch::load_network(network_path);
    AnalysisInputs inputs = load_analysis_inputs(accel_path, match_path, network);

    const auto split_active = dt::stats::split_by_sign(inputs.samples.active);
    const auto split_inactive = dt::stats::split_by_sign(inputs.samples.inactive);
    dt::stats::GroupedSamples positive{split_active.positive, split_inactive.positive, "m/s^2",
                                       dt::stats::SignClass::positive_acceleration};
    dt::stats::GroupedSamples negative{split_active.negative, split_inactive.negative, "m/s^2",
                                       dt::stats::SignClass::negative_acceleration};

    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    auto means_json = [](const dt::stats::MeansRow& m) {
        return nlohmann::ordered_json{{"mean_active", m.mean_active},
                                      {"mean_inactive", m.mean_inactive},
                                      {"n_active", m.n_active},
                                      {"n_inactive", m.n_inactive},
                                      {"diff_ci_low", m.diff_ci_low},
                                      {"diff_ci_high", m.diff_ci_high}};
    };
    const auto pos_means = dt::stats::group_means(positive);
    const auto neg_means = dt::stats::group_means(negative);
    j["positive_means"] = means_json(pos_means);
    j["negative_means"] = means_json(neg_means);

    const auto welch_pos = dt::stats::welch_one_sided(positive, dt::stats::Direction::greater);
    const auto welch_neg = dt::stats::welch_one_sided(negative, dt::stats::Direction::less);
    const auto ks_pos = dt::stats::ks_one_sided(positive, dt::stats::Direction::less);
    const auto ks_neg = dt::stats::ks_one_sided(negative, dt::stats::Direction::greater);
    j["welch_positive"] = {{"t", welch_pos.t_statistic},
                           {"df", welch_pos.degrees_of_freedom},
                           {"p", welch_pos.p_value_one_sided},
                           {"ci_bound", welch_pos.one_sided_ci_bound}};
    j["welch_negative"] = {{"t", welch_neg.t_statistic},
                           {"df", welch_neg.degrees_of_freedom},
                           {"p", welch_neg.p_value_one_sided},
                           {"ci_bound", welch_neg.one_sided_ci_bound}};
    j["ks_positive"] = {{"d_minus", ks_pos.d_minus}, {"p", ks_pos.p_value_one_sided}};
    j["ks_negative"] = {{"d_plus", ks_neg.d_plus}, {"p", ks_neg.p_value_one_sided}};

    const auto segment_tests = dt::stats::per_segment_tests(inputs.by_segment, min_segment_count);
    j["segment_tests"] = nlohmann::ordered_json::array();
    for (const auto& row : segment_tests.rows) {
        j["segment_tests"].push_back({{"segment_id", row.segment_id},
                                      {"mean_inactive", row.mean_inactive},
                                      {"n_inactive", row.n_inactive},
                                      {"mean_active", row.mean_active},
                                      {"n_active", row.n_active},
                                      {"p_value", row.p_value}});
    }
    j["segments_skipped"] = segment_tests.skipped;

    if (!located_path.empty()) {
        const auto located = dt::align::read_located_csv(located_path);
        const auto matches = dt::mapmatch::read_match_csv(match_path);
        std::map<dt::Channel, dt::stats::GroupedSamples> by_channel;
        for (const auto& rec : located) {
            auto it = matches.find(rec.record.trip_id);
            if (it == matches.end()) continue;
            const auto* matched = it->second.at_time(rec.matched_phone_timestamp);
            const auto* segment = matched ? network.find(matched->segment_id) : nullptr;
            if (segment == nullptr || !segment->active) continue;
            auto& grouped = by_channel[rec.record.channel];
            (rec.record.active ? grouped.active : grouped.inactive).push_back(rec.record.value);
        }
        j["can_means"] = nlohmann::ordered_json::array();
        for (const auto& [channel, grouped] : by_channel) {
            if (grouped.active.size() < 2 || grouped.inactive.size() < 2) continue;
            const auto means = dt::stats::group_means(grouped);
            j["can_means"].push_back(
                {{"channel", std::string(dt::channel_label(channel))},
                 {"means", means_json(means)},
                 {"p_one_sided",
                  dt::stats::welch_one_sided(grouped, dt::stats::Direction::greater)
                      .p_value_one_sided}});
        }
    }

    const auto out_path = (std::filesystem::path(out_dir) / "stats.json").string();
    write_text_file(out_path, j.dump(1) + "\n");
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

int cmd_evt(const std::string& accel_path, const std::string& match_path,
            const std::string& network_path, const std::string& out_dir,
            const dt::pipeline::PipelineConfig& params) {
    std::filesystem::create_directories(out_dir);
    const auto network = dt::mapmatch::load_network(network_path);
    AnalysisInputs inputs = load_analysis_inputs(accel_path, match_path, network);
    if (inputs.samples.deltas.empty()) throw dt::DataError("not enough samples for a rate");
    const double median_dt = dt::stats::quantile(inputs.samples.deltas, 0.5);
    const double rate_hz = 1.0 / median_dt;

    const auto split_active = dt::stats::split_by_sign(inputs.samples.active);
    const auto split_inactive = dt::stats::split_by_sign(inputs.samples.inactive);
    std::vector<double> decel_active, decel_inactive;
    for (double v : split_active.negative) decel_active.push_back(-v);
    for (double v : split_inactive.negative) decel_inactive.push_back(-v);

    const auto positive = dt::pipeline::analyze_tail_side(
        split_active.positive, split_inactive.positive, params.threshold_quantile,
        params.return_period_s, rate_hz, params, false);
    const auto negative =
        dt::pipeline::analyze_tail_side(decel_active, decel_inactive, params.threshold_quantile,
                                        params.return_period_s, rate_hz, params, true);

    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["return_period_s"] = params.return_period_s;
    auto fit_json = [](const dt::evt::GpdFit& f) {
        return nlohmann::ordered_json{{"u", f.u},          {"sigma", f.sigma},
                                      {"xi", f.xi},        {"zeta_u", f.zeta_u},
                                      {"n_exceedances", f.n_exceedances},
                                      {"log_likelihood", f.log_likelihood},
                                      {"boundary_hit", f.boundary_hit}};
    };
    auto side_json = [&](const dt::pipeline::TailSide& side) {
        const double sign = side.negated ? -1.0 : 1.0;
        return nlohmann::ordered_json{
            {"threshold", side.threshold},
            {"sample_rate_hz", side.sample_rate_hz},
            {"fit_active", fit_json(side.fit_active)},
            {"fit_inactive", fit_json(side.fit_inactive)},
            {"return_level_active", sign * side.comparison.level_active},
            {"return_level_inactive", sign * side.comparison.level_inactive},
            {"reduction_percent", side.comparison.reduction_percent},
            {"direction", side.comparison.direction}};
    };
    j["acceleration"] = side_json(positive);
    j["deceleration"] = side_json(negative);

    const std::filesystem::path dir(out_dir);
    write_text_file((dir / "evt.json").string(), j.dump(1) + "\n");
    auto write_curve = [&](const std::string& name, const dt::evt::MeanExcessCurve& curve) {
        std::string body = "threshold,mean_excess,count\n";
        for (const auto& p : curve.points) {
            body += dt::csv::format_double(p.threshold) + "," +
                    dt::csv::format_double(p.mean_excess) + "," + std::to_string(p.count) + "\n";
        }
        write_text_file((dir / ("mean_excess_" + name + ".csv")).string(), body);
    };
    write_curve("acceleration_active", positive.mean_excess_active);
    write_curve("acceleration_inactive", positive.mean_excess_inactive);
    write_curve("deceleration_active", negative.mean_excess_active);
    write_curve("deceleration_inactive", negative.mean_excess_inactive);
    std::cout << "wrote " << (dir / "evt.json").string() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------------ run ----

int cmd_run(const dt::pipeline::PipelineConfig& config) {
    const auto report = dt::pipeline::run_pipeline(config);
    const auto files = dt::pipeline::emit_report(report, config.out_dir, config.report_format);
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    std::cout << "mean reduction: " << dt::pipeline::format_percent(report.mean_reduction_percent)
              << ", return-level reduction: "
              << dt::pipeline::format_percent(report.return_reduction_percent) << "\n";
    return kExitOk;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const dt::ConfigError*>(&e) != nullptr) return kExitConfig;
    if (dynamic_cast<const dt::NumericError*>(&e) != nullptr) return kExitNumeric;
    if (dynamic_cast<const dt::DataError*>(&e) != nullptr) return kExitData;
    return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"drivetel: driving-telemetry analysis pipeline"};
    app.require_subcommand(1);

    // synth
    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic phone/CAN/network dataset");
    synth->add_option("--out", synth_args.out, "Output directory")->required();
    synth->add_option("--seed", synth_args.config.seed, "Random seed");
    synth->add_option("--trips", synth_args.config.n_trips, "Number of trips");
    synth->add_option("--drivers", synth_args.config.n_drivers, "Number of drivers");
    synth->add_option("--duration-min-s", synth_args.config.trip_duration_min_s, "");
    synth->add_option("--duration-max-s", synth_args.config.trip_duration_max_s, "");
    synth->add_option("--segments", synth_args.config.n_segments, "Network segment count");
    synth->add_option("--active-fraction", synth_args.config.active_fraction, "");
    synth->add_option("--xi-active", synth_args.config.xi_active, "Active-group tail shape");
    synth->add_option("--xi-inactive", synth_args.config.xi_inactive, "Inactive-group tail shape");
    synth->add_option("--mean-shift", synth_args.config.mean_shift_mps2,
                      "Active-group acceleration mean shift (m/s^2)");
    synth->add_flag("--no-truth-samples", synth_args.no_truth_samples,
                    "Skip per-sample ground truth (smaller truth.json)");

    // ingest
    std::string in_phone, in_can, in_out = "out";
    double in_gap_threshold = 5.0;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse logs and write the data inventory");
    ingest_cmd->add_option("--phone", in_phone, "Phone CSV");
    ingest_cmd->add_option("--can", in_can, "CAN CSV");
    ingest_cmd->add_option("--out", in_out, "Output directory")->required();
    ingest_cmd->add_option("--gap-threshold-s", in_gap_threshold, "Gap threshold (s)");

    // clean
    std::string cl_phone, cl_out = "out";
    dt::pipeline::PipelineConfig cl_params;
    auto* clean_cmd = app.add_subcommand("clean", "Clean and Kalman-smooth phone trajectories");
    clean_cmd->add_option("--phone", cl_phone, "Phone CSV")->required();
    clean_cmd->add_option("--out", cl_out, "Output directory")->required();
    clean_cmd->add_option("--max-gap-s", cl_params.max_gap_s, "Split on gaps larger than this");
    clean_cmd->add_option("--min-zero-run-s", cl_params.min_zero_run_s,
                          "Remove zero-speed runs at least this long");

    // match
    std::string mm_phone, mm_network, mm_out = "out";
    dt::mapmatch::HmmParams mm_params;
    auto* match_cmd = app.add_subcommand("match", "HMM map matching of phone fixes");
    match_cmd->add_option("--phone", mm_phone, "Phone CSV (ideally cleaned)")->required();
    match_cmd->add_option("--network", mm_network, "Road network JSON")->required();
    match_cmd->add_option("--out", mm_out, "Output directory")->required();
    match_cmd->add_option("--sigma-z", mm_params.sigma_z_m, "Emission sigma (m)");
    match_cmd->add_option("--beta", mm_params.beta_m, "Transition beta (m)");
    match_cmd->add_option("--radius", mm_params.radius_m, "Candidate radius (m)");

    // align
    std::string al_can, al_phone, al_out = "out";
    double al_band = 30.0;
    std::size_t al_cells = 50'000'000;
    auto* align_cmd = app.add_subcommand("align", "DTW-align CAN records to phone records");
    align_cmd->add_option("--can", al_can, "CAN CSV")->required();
    align_cmd->add_option("--phone", al_phone, "Phone CSV (ideally cleaned)")->required();
    align_cmd->add_option("--out", al_out, "Output directory")->required();
    align_cmd->add_option("--band-s", al_band, "DTW band half-width (s), 0 disables");
    align_cmd->add_option("--max-cells", al_cells, "DP cell cap before chunking");

    // analyze
    std::string an_accel, an_match, an_network, an_located, an_out = "out";
    std::size_t an_min_count = 100;
    auto* analyze_cmd =
        app.add_subcommand("analyze", "Group-comparison statistics on smoothed accelerations");
    analyze_cmd->add_option("--accel", an_accel, "Smoothed trajectory CSV")->required();
    analyze_cmd->add_option("--match", an_match, "Match CSV")->required();
    analyze_cmd->add_option("--network", an_network, "Road network JSON")->required();
    analyze_cmd->add_option("--located-can", an_located, "Located CAN CSV (optional)");
    analyze_cmd->add_option("--out", an_out, "Output directory")->required();
    analyze_cmd->add_option("--min-segment-count", an_min_count,
                            "Minimum per-group count for per-segment tests");

    // evt
    std::string ev_accel, ev_match, ev_network, ev_out = "out";
    dt::pipeline::PipelineConfig ev_params;
    auto* evt_cmd = app.add_subcommand("evt", "Peaks-over-threshold tail analysis");
    evt_cmd->add_option("--accel", ev_accel, "Smoothed trajectory CSV")->required();
    evt_cmd->add_option("--match", ev_match, "Match CSV")->required();
    evt_cmd->add_option("--network", ev_network, "Road network JSON")->required();
    evt_cmd->add_option("--out", ev_out, "Output directory")->required();
    evt_cmd->add_option("--threshold-quantile", ev_params.threshold_quantile,
                        "Pooled quantile that sets the common threshold");
    evt_cmd->add_option("--return-period-s", ev_params.return_period_s, "Return period (s)");

    // run
    dt::pipeline::PipelineConfig run_config;
    std::string run_config_path;
    auto* run_cmd = app.add_subcommand("run", "End-to-end pipeline with full report");
    auto* opt_phone = run_cmd->add_option("--phone", run_config.phone_path, "Phone CSV");
    auto* opt_can = run_cmd->add_option("--can", run_config.can_path, "CAN CSV");
    auto* opt_network = run_cmd->add_option("--network", run_config.network_path, "Network JSON");
    auto* opt_out = run_cmd->add_option("--out", run_config.out_dir, "Output directory");
    auto* opt_format =
        run_cmd->add_option("--format", run_config.report_format, "json|table|csv|all");
    run_cmd->add_option("--config", run_config_path, "JSON config file (flags override it)");
    auto* opt_tq = run_cmd->add_option("--threshold-quantile", run_config.threshold_quantile, "");
    auto* opt_rp = run_cmd->add_option("--return-period-s", run_config.return_period_s, "");
    auto* opt_msc =
        run_cmd->add_option("--min-segment-count", run_config.min_segment_count, "");
    auto* opt_gap = run_cmd->add_option("--gap-threshold-s", run_config.gap_threshold_s, "");
    auto* opt_band = run_cmd->add_option("--dtw-band-s", run_config.dtw_band_s, "");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    std::string error_out_dir;
    try {
        if (app.got_subcommand(synth)) return cmd_synth(synth_args);
        if (app.got_subcommand(ingest_cmd)) {
            if (in_phone.empty() && in_can.empty()) {
                throw dt::ConfigError("ingest: need --phone and/or --can");
            }
            return cmd_ingest(in_phone, in_can, in_out, in_gap_threshold);
        }
        if (app.got_subcommand(clean_cmd)) return cmd_clean(cl_phone, cl_out, cl_params);
        if (app.got_subcommand(match_cmd)) return cmd_match(mm_phone, mm_network, mm_out, mm_params);
        if (app.got_subcommand(align_cmd)) {
            return cmd_align(al_can, al_phone, al_out, al_band, al_cells);
        }
        if (app.got_subcommand(analyze_cmd)) {
            return cmd_analyze(an_accel, an_match, an_network, an_located, an_out, an_min_count);
        }
        if (app.got_subcommand(evt_cmd)) {
            return cmd_evt(ev_accel, ev_match, ev_network, ev_out, ev_params);
        }
        if (app.got_subcommand(run_cmd)) {
            dt::pipeline::PipelineConfig config;
            if (!run_config_path.empty()) {
                config = dt::pipeline::load_pipeline_config(run_config_path, config);
            }
            // Flags override the config file which overrides defaults.
            if (opt_phone->count() > 0) config.phone_path = run_config.phone_path;
            if (opt_can->count() > 0) config.can_path = run_config.can_path;
            if (opt_network->count() > 0) config.network_path = run_config.network_path;
            if (opt_out->count() > 0) config.out_dir = run_config.out_dir;
            if (opt_format->count() > 0) config.report_format = run_config.report_format;
            if (opt_tq->count() > 0) config.threshold_quantile = run_config.threshold_quantile;
            if (opt_rp->count() > 0) config.return_period_s = run_config.return_period_s;
            if (opt_msc->count() > 0) config.min_segment_count = run_config.min_segment_count;
            if (opt_gap->count() > 0) config.gap_threshold_s = run_config.gap_threshold_s;
            if (opt_band->count() > 0) config.dtw_band_s = run_config.dtw_band_s;
            if (config.phone_path.empty() || config.can_path.empty() ||
                config.network_path.empty() || config.out_dir.empty()) {
                throw dt::ConfigError("run: --phone, --can, --network, and --out are required");
            }
            error_out_dir = config.out_dir;
            return cmd_run(config);
        }
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        dt::log::error(e.what());
        std::cerr << "error: " << e.what() << "\n";
        if (!error_out_dir.empty()) {
            dt::pipeline::write_error_record(error_out_dir, stage_of(e.what()), e.what(), code);
        }
        return code;
    }
    return kExitConfig;
}
