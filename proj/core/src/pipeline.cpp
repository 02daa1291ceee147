#include "drivetel/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

#include <nlohmann/json.hpp>

#include "drivetel/csv.hpp"
#include "drivetel/dtw.hpp"
#include "drivetel/errors.hpp"
#include "drivetel/evt.hpp"
#include "drivetel/log.hpp"
#include "drivetel/stats.hpp"

namespace drivetel::pipeline {

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(name) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string(name) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string(name) + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(std::string(name) + ": " + e.what());
    }
}

struct PieceWork {
    Trajectory speed_clean;  // cleaned input to the smoother
    Trajectory speed_smooth;
    Trajectory accel;  // smoothed acceleration after physical limits
    mapmatch::MatchResult match;
};

struct TripWork {
    const Trip* trip = nullptr;
    std::vector<PhoneRecord> phone;  // sorted by timestamp
    std::vector<CanRecord> can;      // sorted by timestamp
    std::vector<PieceWork> pieces;
    std::vector<LocatedCanRecord> located;
    // Merged per-trip match lookup (piece timestamps are disjoint, ordered).
    std::vector<double> match_ts;
    std::vector<std::optional<mapmatch::MatchedPoint>> match_points;

    const mapmatch::MatchedPoint* match_at(double t) const {
        auto it = std::lower_bound(match_ts.begin(), match_ts.end(), t);
        if (it == match_ts.end() || *it != t) return nullptr;
        const auto idx = static_cast<std::size_t>(it - match_ts.begin());
        return match_points[idx].has_value() ? &match_points[idx].value() : nullptr;
    }
};

std::vector<std::pair<double, double>> downsample_ecdf(const stats::Ecdf& f,
                                                       std::size_t max_points) {
    std::vector<std::pair<double, double>> out;
    const std::size_t n = f.points.size();
    const std::size_t stride = std::max<std::size_t>(1, n / max_points);
    for (std::size_t i = 0; i < n; i += stride) {
        out.emplace_back(f.points[i], f.cumulative[i]);
    }
    if (out.empty() || out.back().first != f.points.back()) {
        out.emplace_back(f.points.back(), f.cumulative.back());
    }
    return out;
}

std::map<double, std::size_t> histogram(const std::vector<double>& values, double bin_width) {
    std::map<double, std::size_t> hist;
    for (double v : values) {
        ++hist[std::floor(v / bin_width) * bin_width];
    }
    return hist;
}

std::string fmt(double v) { return csv::format_double(v); }

RunParams echo_params(const PipelineConfig& c) {
    RunParams p;
    auto add = [&](const std::string& key, const std::string& value) {
        p.entries.emplace_back(key, value);
    };
    add("phone", c.phone_path);
    add("can", c.can_path);
    add("network", c.network_path);
    add("out", c.out_dir);
    add("format", c.report_format);
    add("gap_threshold_s", fmt(c.gap_threshold_s));
    add("frequency_bin_hz", fmt(c.frequency_bin_hz));
    add("gap_bin_s", fmt(c.gap_bin_s));
    add("speed_limits_mps", "[" + fmt(c.limits.speed_min_mps) + "," + fmt(c.limits.speed_max_mps) + "]");
    add("accel_limits_mps2", "[" + fmt(c.limits.accel_min) + "," + fmt(c.limits.accel_max) + "]");
    add("max_gap_s", fmt(c.max_gap_s));
    add("min_zero_run_s", fmt(c.min_zero_run_s));
    add("smoother.V", "diag(" + fmt(c.smoother.V.a) + "," + fmt(c.smoother.V.d) + ")");
    add("smoother.W", "diag(" + fmt(c.smoother.W.a) + "," + fmt(c.smoother.W.d) + ")");
    add("smoother.mu0", "(" + fmt(c.smoother.mu0.x) + "," + fmt(c.smoother.mu0.y) + ")");
    add("smoother.C0", "diag(" + fmt(c.smoother.C0.a) + "," + fmt(c.smoother.C0.d) + ")");
    add("hmm.sigma_z_m", fmt(c.hmm.sigma_z_m));
    add("hmm.beta_m", fmt(c.hmm.beta_m));
    add("hmm.radius_m", fmt(c.hmm.radius_m));
    add("hmm.max_route_m", fmt(c.hmm.max_route_m));
    add("dtw_band_s", fmt(c.dtw_band_s));
    add("dtw_max_cells", std::to_string(c.dtw_max_cells));
    add("min_segment_count", std::to_string(c.min_segment_count));
    add("max_segment_rows", std::to_string(c.max_segment_rows));
    add("accel_hist_bin", fmt(c.accel_hist_bin));
    add("threshold_quantile", fmt(c.threshold_quantile));
    add("return_period_s", fmt(c.return_period_s));
    add("mean_excess_grid_points", std::to_string(c.mean_excess_grid_points));
    add("mean_excess_hi_quantile", fmt(c.mean_excess_hi_quantile));
    add("mean_excess_min_count", std::to_string(c.mean_excess_min_count));
    return p;
}

}  // namespace

TailSide analyze_tail_side(const std::vector<double>& active,
                           const std::vector<double>& inactive, double threshold_quantile,
                           double period_s, double rate_hz, const PipelineConfig& c,
                           bool negated) {
    std::vector<double> pooled;
    pooled.reserve(active.size() + inactive.size());
    pooled.insert(pooled.end(), active.begin(), active.end());
    pooled.insert(pooled.end(), inactive.begin(), inactive.end());

    TailSide side;
    side.negated = negated;
    side.sample_rate_hz = rate_hz;
    side.threshold = stats::quantile(pooled, threshold_quantile);
    side.fit_active = evt::fit_gpd(active, side.threshold);
    side.fit_inactive = evt::fit_gpd(inactive, side.threshold);
    side.comparison = evt::tail_compare(side.fit_active, side.fit_inactive, period_s, rate_hz);

    const auto grid = evt::make_threshold_grid(pooled, c.mean_excess_grid_points, 0.5,
                                               c.mean_excess_hi_quantile);
    side.mean_excess_active = evt::mean_excess_curve(active, grid, c.mean_excess_min_count);
    side.mean_excess_inactive = evt::mean_excess_curve(inactive, grid, c.mean_excess_min_count);
    return side;
}

AccelSamples collect_active_segment_accel(
    const std::vector<prep::TrajectoryRecord>& records,
    const std::map<std::string, mapmatch::MatchResult>& matches,
    const mapmatch::RoadNetwork& network,
    std::map<std::string, stats::GroupedSamples>* positive_by_segment) {
    AccelSamples out;
    std::string prev_trip;
    double prev_t = 0.0;
    for (const auto& rec : records) {
        if (rec.channel != Channel::acceleration) continue;
        if (rec.trip_id == prev_trip) {
            out.deltas.push_back(rec.timestamp - prev_t);
        }
        prev_trip = rec.trip_id;
        prev_t = rec.timestamp;

        auto it = matches.find(rec.trip_id);
        if (it == matches.end()) continue;
        const mapmatch::MatchedPoint* matched = it->second.at_time(rec.timestamp);
        const mapmatch::RoadSegment* segment =
            matched ? network.find(matched->segment_id) : nullptr;
        if (segment == nullptr || !segment->active) continue;
        (rec.active ? out.active : out.inactive).push_back(rec.value);
        if (positive_by_segment != nullptr && rec.value > 0.0) {
            auto& grouped = (*positive_by_segment)[segment->segment_id];
            (rec.active ? grouped.active : grouped.inactive).push_back(rec.value);
        }
    }
    return out;
}

PipelineConfig load_pipeline_config(const std::string& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in.is_open()) throw ConfigError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config file " + path + ": expected a JSON object");

    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "phone") base.phone_path = value.get<std::string>();
            else if (key == "can") base.can_path = value.get<std::string>();
            else if (key == "network") base.network_path = value.get<std::string>();
            else if (key == "out") base.out_dir = value.get<std::string>();
            else if (key == "format") base.report_format = value.get<std::string>();
            else if (key == "delimiter") {
                const auto s = value.get<std::string>();
                if (s.size() != 1) throw ConfigError("delimiter must be a single character");
                base.delimiter = s[0];
            }
            else if (key == "gap_threshold_s") base.gap_threshold_s = value.get<double>();
            else if (key == "frequency_bin_hz") base.frequency_bin_hz = value.get<double>();
            else if (key == "gap_bin_s") base.gap_bin_s = value.get<double>();
            else if (key == "max_gap_s") base.max_gap_s = value.get<double>();
            else if (key == "min_zero_run_s") base.min_zero_run_s = value.get<double>();
            else if (key == "speed_max_mph") {
                base.limits.speed_max_mps = value.get<double>() * kMetersPerSecondPerMph;
            }
            else if (key == "accel_min") base.limits.accel_min = value.get<double>();
            else if (key == "accel_max") base.limits.accel_max = value.get<double>();
            else if (key == "smoother_v") {
                base.smoother.V = prep::Mat2::diag(value.at(0).get<double>(),
                                                   value.at(1).get<double>());
            }
            else if (key == "smoother_w") {
                base.smoother.W = prep::Mat2::diag(value.at(0).get<double>(),
                                                   value.at(1).get<double>());
            }
            else if (key == "smoother_mu0") {
                base.smoother.mu0 = {value.at(0).get<double>(), value.at(1).get<double>()};
            }
            else if (key == "smoother_c0") {
                base.smoother.C0 = prep::Mat2::diag(value.at(0).get<double>(),
                                                    value.at(1).get<double>());
            }
            else if (key == "sigma_z_m") base.hmm.sigma_z_m = value.get<double>();
            else if (key == "beta_m") base.hmm.beta_m = value.get<double>();
            else if (key == "radius_m") base.hmm.radius_m = value.get<double>();
            else if (key == "max_route_m") base.hmm.max_route_m = value.get<double>();
            else if (key == "dtw_band_s") base.dtw_band_s = value.get<double>();
            else if (key == "dtw_max_cells") base.dtw_max_cells = value.get<std::size_t>();
            else if (key == "min_segment_count") base.min_segment_count = value.get<std::size_t>();
            else if (key == "max_segment_rows") base.max_segment_rows = value.get<std::size_t>();
            else if (key == "accel_hist_bin") base.accel_hist_bin = value.get<double>();
            else if (key == "threshold_quantile") base.threshold_quantile = value.get<double>();
            else if (key == "return_period_s") base.return_period_s = value.get<double>();
            else if (key == "mean_excess_grid_points") {
                base.mean_excess_grid_points = value.get<std::size_t>();
            }
            else if (key == "mean_excess_hi_quantile") {
                base.mean_excess_hi_quantile = value.get<double>();
            }
            else if (key == "mean_excess_min_count") {
                base.mean_excess_min_count = value.get<std::size_t>();
            }
            else throw ConfigError("unknown config key: " + key);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config key " + key + ": " + e.what());
        }
    }
    return base;
}

std::vector<CleanedPiece> preprocess_speed(const Trajectory& speed, const PipelineConfig& config,
                                           CleanCounts& counts) {
    auto [limited, removal] = prep::enforce_physical_limits(speed, config.limits);
    counts.removed_speed_limits += removal.removed();

    const auto raw_pieces = prep::split_on_time_gaps(limited, config.max_gap_s);
    std::size_t kept_after_split = 0;
    for (const auto& piece : raw_pieces) kept_after_split += piece.size();
    counts.dropped_nonmonotonic += limited.size() - kept_after_split;

    std::vector<CleanedPiece> out;
    for (const auto& raw_piece : raw_pieces) {
        const Trajectory trimmed = prep::trim_zero_runs(raw_piece, config.min_zero_run_s);
        counts.removed_zero_runs += raw_piece.size() - trimmed.size();
        for (auto& piece : prep::split_on_time_gaps(trimmed, config.max_gap_s)) {
            if (piece.size() < 2) continue;
            CleanedPiece cleaned;
            cleaned.speed_clean = std::move(piece);
            const auto smoothed = prep::kalman_smooth(cleaned.speed_clean, config.smoother);
            counts.smoothed_samples += smoothed.size();
            auto [speed_smooth, accel] = prep::derive_kinematics(cleaned.speed_clean, smoothed);
            auto [accel_limited, accel_removal] =
                prep::enforce_physical_limits(accel, config.limits);
            counts.removed_accel_limits += accel_removal.removed();
            cleaned.speed_smooth = std::move(speed_smooth);
            cleaned.accel = std::move(accel_limited);
            out.push_back(std::move(cleaned));
        }
    }
    return out;
}

AnalysisReport run_pipeline(const PipelineConfig& config) {
    AnalysisReport report;
    report.params = echo_params(config);
    report.return_period_s = config.return_period_s;

    // -- ingest --------------------------------------------------------
    ingest::ParsedPhoneLog phone_log;
    ingest::ParsedCanLog can_log;
    std::vector<Trip> trips;
    stage("ingest", [&] {
        const ingest::CsvFormat fmt_cfg{config.delimiter, true};
        phone_log = ingest::parse_phone_log(config.phone_path, fmt_cfg);
        can_log = ingest::parse_can_log(config.can_path, fmt_cfg);
        trips = ingest::build_trips(phone_log.records, can_log.records);
        ingest::InventoryOptions opts;
        opts.gap_threshold_s = config.gap_threshold_s;
        opts.frequency_bin_hz = config.frequency_bin_hz;
        opts.gap_bin_s = config.gap_bin_s;
        report.inventory =
            ingest::inventory_report(phone_log.records, can_log.records, trips, opts);
        return 0;
    });
    log::info("ingest: " + std::to_string(phone_log.records.size()) + " phone records, " +
              std::to_string(can_log.records.size()) + " CAN records, " +
              std::to_string(trips.size()) + " trips");

    std::map<std::string, TripWork> work;
    for (const Trip& t : trips) work[t.trip_id].trip = &t;
    for (const auto& r : phone_log.records) work[r.trip_id].phone.push_back(r);
    for (const auto& r : can_log.records) work[r.trip_id].can.push_back(r);
    for (auto& [id, tw] : work) {
        std::stable_sort(tw.phone.begin(), tw.phone.end(),
                         [](const PhoneRecord& a, const PhoneRecord& b) {
                             return a.timestamp < b.timestamp;
                         });
        std::stable_sort(tw.can.begin(), tw.can.end(),
                         [](const CanRecord& a, const CanRecord& b) {
                             return a.timestamp < b.timestamp;
                         });
    }

    // -- preprocess ------------------------------------------------------
    report.cleaning.phone_records_in = phone_log.records.size();
    stage("preprocess", [&] {
        CleanCounts counts;
        for (auto& [id, tw] : work) {
            if (tw.phone.empty()) continue;
            Trajectory speed;
            speed.trip_id = id;
            speed.channel = Channel::speed;
            speed.units = "m/s";
            for (const auto& r : tw.phone) speed.samples.push_back({r.timestamp, r.speed});

            for (auto& cleaned : preprocess_speed(speed, config, counts)) {
                PieceWork pw;
                pw.speed_clean = std::move(cleaned.speed_clean);
                pw.speed_smooth = std::move(cleaned.speed_smooth);
                pw.accel = std::move(cleaned.accel);
                tw.pieces.push_back(std::move(pw));
            }
            report.cleaning.pieces += tw.pieces.size();
        }
        report.cleaning.removed_speed_limits = counts.removed_speed_limits;
        report.cleaning.removed_accel_limits = counts.removed_accel_limits;
        report.cleaning.dropped_nonmonotonic = counts.dropped_nonmonotonic;
        report.cleaning.removed_zero_runs = counts.removed_zero_runs;
        report.cleaning.smoothed_samples = counts.smoothed_samples;
        return 0;
    });

    // -- mapmatch --------------------------------------------------------
    std::optional<mapmatch::RoadNetwork> network;
    stage("mapmatch", [&] {
        network.emplace(mapmatch::load_network(config.network_path));
        report.matching.network_segments = network->segment_count();
        report.matching.network_active_segments = network->active_count();

        for (auto& [id, tw] : work) {
            std::map<double, const PhoneRecord*> by_time;
            for (const auto& r : tw.phone) by_time.emplace(r.timestamp, &r);
            for (auto& piece : tw.pieces) {
                std::vector<mapmatch::GpsFix> track;
                track.reserve(piece.speed_clean.size());
                for (const auto& s : piece.speed_clean.samples) {
                    const PhoneRecord* rec = by_time.at(s.timestamp);
                    track.push_back({s.timestamp, {rec->latitude, rec->longitude}});
                }
                piece.match = mapmatch::hmm_match(track, *network, config.hmm);
                report.matching.fixes += track.size();
                report.matching.matched += piece.match.matched_count();
                tw.match_ts.insert(tw.match_ts.end(), piece.match.timestamps.begin(),
                                   piece.match.timestamps.end());
                tw.match_points.insert(tw.match_points.end(), piece.match.points.begin(),
                                       piece.match.points.end());
            }
        }
        return 0;
    });

    // -- align -----------------------------------------------------------
    stage("align", [&] {
        double abs_dt_sum = 0.0;
        std::size_t abs_dt_count = 0;
        for (auto& [id, tw] : work) {
            report.alignment.can_records += tw.can.size();
            if (tw.can.empty()) continue;
            std::vector<double> phone_ts;
            for (const auto& piece : tw.pieces) {
                for (const auto& s : piece.speed_clean.samples) {
                    phone_ts.push_back(s.timestamp);
                }
            }
            if (phone_ts.empty()) continue;
            std::vector<double> can_ts;
            can_ts.reserve(tw.can.size());
            for (const auto& r : tw.can) can_ts.push_back(r.timestamp);

            const auto path = align::dtw_align_chunked(can_ts, phone_ts, config.dtw_band_s,
                                                       config.dtw_max_cells);
            // The path indexes the cleaned timestamps, so transfer against
            // the matching subset of phone records.
            std::vector<PhoneRecord> cleaned_phone;
            cleaned_phone.reserve(phone_ts.size());
            {
                std::map<double, const PhoneRecord*> by_time;
                for (const auto& r : tw.phone) by_time.emplace(r.timestamp, &r);
                for (double t : phone_ts) cleaned_phone.push_back(*by_time.at(t));
            }
            tw.located = align::transfer_locations(tw.can, cleaned_phone, path);
            report.alignment.located_records += tw.located.size();
            for (const auto& rec : tw.located) {
                abs_dt_sum += std::fabs(rec.record.timestamp - rec.matched_phone_timestamp);
                ++abs_dt_count;
            }
        }
        if (abs_dt_count > 0) {
            report.alignment.mean_abs_dt_s = abs_dt_sum / static_cast<double>(abs_dt_count);
        }
        return 0;
    });

    // -- active-segment filter + stats ------------------------------------
    std::vector<double> accel_active, accel_inactive;
    std::map<std::string, stats::GroupedSamples> accel_by_segment;
    std::map<Channel, stats::GroupedSamples> can_by_channel;
    std::vector<double> accel_deltas;
    stage("stats", [&] {
        for (const auto& [id, tw] : work) {
            const bool group_active = tw.trip != nullptr && tw.trip->active;
            for (const auto& piece : tw.pieces) {
                double prev_t = 0.0;
                bool has_prev = false;
                for (const auto& s : piece.accel.samples) {
                    if (has_prev) accel_deltas.push_back(s.timestamp - prev_t);
                    prev_t = s.timestamp;
                    has_prev = true;

                    const auto* matched = piece.match.at_time(s.timestamp);
                    const auto* segment =
                        matched ? network->find(matched->segment_id) : nullptr;
                    if (segment == nullptr || !segment->active) continue;
                    (group_active ? accel_active : accel_inactive).push_back(s.value);
                    if (s.value > 0.0) {
                        auto& grouped = accel_by_segment[segment->segment_id];
                        (group_active ? grouped.active : grouped.inactive).push_back(s.value);
                    }
                }
            }
            for (const auto& rec : tw.located) {
                const auto* matched = tw.match_at(rec.matched_phone_timestamp);
                const auto* segment = matched ? network->find(matched->segment_id) : nullptr;
                if (segment == nullptr || !segment->active) continue;
                auto& grouped = can_by_channel[rec.record.channel];
                (group_active ? grouped.active : grouped.inactive).push_back(rec.record.value);
            }
        }

        const auto split_active = stats::split_by_sign(accel_active);
        const auto split_inactive = stats::split_by_sign(accel_inactive);
        report.accel.zeros_discarded = split_active.zero_count + split_inactive.zero_count;

        stats::GroupedSamples positive{split_active.positive, split_inactive.positive, "m/s^2",
                                       stats::SignClass::positive_acceleration};
        stats::GroupedSamples negative{split_active.negative, split_inactive.negative, "m/s^2",
                                       stats::SignClass::negative_acceleration};

        report.accel.positive_means = stats::group_means(positive);
        report.accel.negative_means = stats::group_means(negative);
        report.accel.welch_positive =
            stats::welch_one_sided(positive, stats::Direction::greater);
        report.accel.welch_negative = stats::welch_one_sided(negative, stats::Direction::less);
        report.accel.ks_positive = stats::ks_one_sided(positive, stats::Direction::less);
        report.accel.ks_negative = stats::ks_one_sided(negative, stats::Direction::greater);
        report.mean_reduction_percent =
            (report.accel.positive_means.mean_inactive - report.accel.positive_means.mean_active) /
            report.accel.positive_means.mean_inactive * 100.0;

        for (const auto& [channel, grouped] : can_by_channel) {
            if (grouped.active.size() < 2 || grouped.inactive.size() < 2) continue;
            CanChannelRow row;
            row.channel = std::string(channel_label(channel));
            row.means = stats::group_means(grouped);
            row.p_one_sided =
                stats::welch_one_sided(grouped, stats::Direction::greater).p_value_one_sided;
            report.can_means.push_back(std::move(row));
        }

        report.segment_tests = stats::per_segment_tests(accel_by_segment,
                                                        config.min_segment_count);
        if (report.segment_tests.rows.size() > config.max_segment_rows) {
            report.segment_tests.rows.resize(config.max_segment_rows);
        }

        report.ecdf_curves["acceleration_active"] =
            downsample_ecdf(stats::ecdf(positive.active), 2000);
        report.ecdf_curves["acceleration_inactive"] =
            downsample_ecdf(stats::ecdf(positive.inactive), 2000);
        report.ecdf_curves["deceleration_active"] =
            downsample_ecdf(stats::ecdf(negative.active), 2000);
        report.ecdf_curves["deceleration_inactive"] =
            downsample_ecdf(stats::ecdf(negative.inactive), 2000);
        auto store_hist = [&](const std::string& name, const std::vector<double>& values) {
            const auto h = histogram(values, config.accel_hist_bin);
            report.histograms[name].assign(h.begin(), h.end());
        };
        store_hist("acceleration_active", positive.active);
        store_hist("acceleration_inactive", positive.inactive);
        store_hist("deceleration_active", negative.active);
        store_hist("deceleration_inactive", negative.inactive);
        return 0;
    });

    // -- evt ---------------------------------------------------------------
    stage("evt", [&] {
        if (accel_deltas.empty()) throw DataError("no acceleration samples to analyze");
        const double median_dt = stats::quantile(accel_deltas, 0.5);
        if (!(median_dt > 0.0)) throw DataError("degenerate sample spacing");
        const double rate_hz = 1.0 / median_dt;

        const auto split_active = stats::split_by_sign(accel_active);
        const auto split_inactive = stats::split_by_sign(accel_inactive);

        report.tail_positive =
            analyze_tail_side(split_active.positive, split_inactive.positive,
                              config.threshold_quantile, config.return_period_s, rate_hz,
                              config, /*negated=*/false);

        std::vector<double> decel_active, decel_inactive;
        for (double v : split_active.negative) decel_active.push_back(-v);
        for (double v : split_inactive.negative) decel_inactive.push_back(-v);
        report.tail_negative =
            analyze_tail_side(decel_active, decel_inactive, config.threshold_quantile,
                              config.return_period_s, rate_hz, config, /*negated=*/true);

        report.return_reduction_percent = report.tail_positive.comparison.reduction_percent;
        return 0;
    });

    return report;
}

void write_error_record(const std::string& out_dir, const std::string& stage,
                        const std::string& message, int exit_code) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    nlohmann::ordered_json j;
    j["error"] = {{"stage", stage}, {"message", message}, {"exit_code", exit_code}};
    std::ofstream out(std::filesystem::path(out_dir) / "error.json");
    if (out.is_open()) out << j.dump(1) << "\n";
}

}  // namespace drivetel::pipeline
