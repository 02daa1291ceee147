#include "drivetel/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drivetel/csv.hpp"
#include "drivetel/errors.hpp"

namespace drivetel::pipeline {

namespace {

std::string printf_format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::string trim_zeros(std::string s) {
    if (s.find('.') == std::string::npos) return s;
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    if (s == "-0" || s.empty()) s = "0";
    return s;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out.is_open()) throw ConfigError("cannot open output file: " + path);
    out << content;
}

std::string table_to_text(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    std::ostringstream out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size()) out << std::string(widths[c] - row[c].size() + 2, ' ');
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace

std::string format_mean(double v) { return trim_zeros(printf_format("%.4f", v)); }

std::string format_p_scientific(double p) { return printf_format("%.2e", p); }

std::string format_p_fixed(double p) { return printf_format("%.4f", p); }

std::string format_level(double v) { return printf_format("%.2f", v); }

std::string format_percent(double v) { return printf_format("%.1f", v) + "%"; }

std::string format_ci(double lo, double hi) {
    return "(" + format_mean(lo) + "," + format_mean(hi) + ")";
}

std::string format_one_sided_ci(double bound, stats::Direction direction) {
    if (direction == stats::Direction::greater) {
        return "(" + format_mean(bound) + ", \u221e)";
    }
    return "(-\u221e, " + format_mean(bound) + ")";
}

namespace {

std::string render_tail_table(const AnalysisReport& r) {
    const double sign_pos = r.tail_positive.negated ? -1.0 : 1.0;
    const double sign_neg = r.tail_negative.negated ? -1.0 : 1.0;
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"", "Acceleration", "Deceleration"});
    rows.push_back({"Active",
                    format_level(sign_pos * r.tail_positive.comparison.level_active),
                    format_level(sign_neg * r.tail_negative.comparison.level_active)});
    rows.push_back({"Inactive",
                    format_level(sign_pos * r.tail_positive.comparison.level_inactive),
                    format_level(sign_neg * r.tail_negative.comparison.level_inactive)});
    return table_to_text(rows);
}

std::string render_fit_rows(const TailSide& side, const char* label) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Tail", "Group", "u", "sigma", "xi", "zeta_u", "n_exc", "flag"});
    auto one = [&](const char* group, const evt::GpdFit& fit) {
        rows.push_back({label, group, format_mean(fit.u), format_mean(fit.sigma),
                        format_mean(fit.xi), format_mean(fit.zeta_u),
                        std::to_string(fit.n_exceedances),
                        fit.boundary_hit ? "boundary" : "ok"});
    };
    one("active", side.fit_active);
    one("inactive", side.fit_inactive);
    return table_to_text(rows);
}

}  // namespace

std::string render_text_report(const AnalysisReport& r) {
    std::ostringstream out;
    out << "== Data inventory ==\n" << ingest::inventory_table(r.inventory) << "\n";

    out << "== Cleaning ==\n";
    out << "phone records in: " << r.cleaning.phone_records_in << "\n";
    out << "removed by speed limits: " << r.cleaning.removed_speed_limits << "\n";
    out << "removed by acceleration limits: " << r.cleaning.removed_accel_limits << "\n";
    out << "dropped non-monotonic timestamps: " << r.cleaning.dropped_nonmonotonic << "\n";
    out << "removed in zero-speed runs: " << r.cleaning.removed_zero_runs << "\n";
    out << "trajectory pieces: " << r.cleaning.pieces << "\n";
    out << "smoothed samples: " << r.cleaning.smoothed_samples << "\n\n";

    out << "== Map matching ==\n";
    out << "network segments: " << r.matching.network_segments << " ("
        << r.matching.network_active_segments << " active)\n";
    out << "fixes matched: " << r.matching.matched << " / " << r.matching.fixes << "\n\n";

    out << "== Alignment ==\n";
    out << "CAN records located: " << r.alignment.located_records << " / "
        << r.alignment.can_records << "\n";
    out << "mean |dt| at matched pairs: " << format_mean(r.alignment.mean_abs_dt_s) << " s\n\n";

    out << "== Acceleration means (active-segment records) ==\n";
    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"Status", "Mean positive acceleration", "Mean negative acceleration"});
        rows.push_back({"Inactive", format_mean(r.accel.positive_means.mean_inactive),
                        format_mean(r.accel.negative_means.mean_inactive)});
        rows.push_back({"Active", format_mean(r.accel.positive_means.mean_active),
                        format_mean(r.accel.negative_means.mean_active)});
        out << table_to_text(rows);
    }
    out << "zeros discarded: " << r.accel.zeros_discarded << "\n";
    out << "Welch one-sided tests for mean(inactive) - mean(active):\n";
    out << "  positive: t=" << format_mean(r.accel.welch_positive.t_statistic)
        << ", df=" << format_mean(r.accel.welch_positive.degrees_of_freedom)
        << ", p=" << format_p_scientific(r.accel.welch_positive.p_value_one_sided)
        << ", 95% CI "
        << format_one_sided_ci(r.accel.welch_positive.one_sided_ci_bound,
                               r.accel.welch_positive.direction)
        << "\n";
    out << "  negative: t=" << format_mean(r.accel.welch_negative.t_statistic)
        << ", df=" << format_mean(r.accel.welch_negative.degrees_of_freedom)
        << ", p=" << format_p_scientific(r.accel.welch_negative.p_value_one_sided)
        << ", 95% CI "
        << format_one_sided_ci(r.accel.welch_negative.one_sided_ci_bound,
                               r.accel.welch_negative.direction)
        << "\n\n";

    if (!r.can_means.empty()) {
        out << "== CAN signal means ==\n";
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"Signal", "Inactive Mean", "Active Mean", "Conf. Interval"});
        for (const auto& row : r.can_means) {
            rows.push_back({row.channel, format_mean(row.means.mean_inactive),
                            format_mean(row.means.mean_active),
                            format_ci(row.means.diff_ci_low, row.means.diff_ci_high)});
        }
        out << table_to_text(rows) << "\n";
    }

    out << "== Per-segment tests (positive acceleration) ==\n";
    if (r.segment_tests.rows.empty()) {
        out << "no segment reached the minimum count\n";
    } else {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"Road ID", "Mean Inactive (# obs)", "Mean Active (# obs)", "p-value"});
        for (const auto& row : r.segment_tests.rows) {
            rows.push_back({row.segment_id,
                            format_mean(row.mean_inactive) + " (" +
                                std::to_string(row.n_inactive) + ")",
                            format_mean(row.mean_active) + " (" + std::to_string(row.n_active) +
                                ")",
                            format_p_fixed(row.p_value)});
        }
        out << table_to_text(rows);
    }
    out << "segments skipped (below min count): " << r.segment_tests.skipped << "\n\n";

    out << "== Distribution comparison (Kolmogorov-Smirnov) ==\n";
    out << "acceleration: D- = " << format_mean(r.accel.ks_positive.d_minus)
        << ", p = " << format_p_scientific(r.accel.ks_positive.p_value_one_sided)
        << (r.accel.ks_positive.p_floored ? " (floored)" : "") << "\n";
    out << "deceleration: D+ = " << format_mean(r.accel.ks_negative.d_plus)
        << ", p = " << format_p_scientific(r.accel.ks_negative.p_value_one_sided)
        << (r.accel.ks_negative.p_floored ? " (floored)" : "") << "\n\n";

    out << "== Tail analysis ==\n";
    out << render_fit_rows(r.tail_positive, "acceleration");
    out << render_fit_rows(r.tail_negative, "deceleration");
    out << "Level exceeded every " << format_mean(r.return_period_s) << " s:\n";
    out << render_tail_table(r);
    out << "mean reduction: " << format_percent(r.mean_reduction_percent) << "\n";
    out << "return-level reduction: " << format_percent(r.return_reduction_percent) << "\n\n";

    out << "== Run parameters ==\n";
    for (const auto& [key, value] : r.params.entries) {
        out << key << " = " << value << "\n";
    }
    return out.str();
}

namespace {

nlohmann::ordered_json means_to_json(const stats::MeansRow& m) {
    return {{"mean_active", m.mean_active},
            {"mean_inactive", m.mean_inactive},
            {"n_active", m.n_active},
            {"n_inactive", m.n_inactive},
            {"diff_ci_low", m.diff_ci_low},
            {"diff_ci_high", m.diff_ci_high}};
}

nlohmann::ordered_json welch_to_json(const stats::WelchResult& w) {
    return {{"mean_a", w.mean_a},
            {"mean_b", w.mean_b},
            {"difference", w.difference},
            {"t_statistic", w.t_statistic},
            {"degrees_of_freedom", w.degrees_of_freedom},
            {"p_value_one_sided", w.p_value_one_sided},
            {"one_sided_ci_bound", w.one_sided_ci_bound},
            {"direction", w.direction == stats::Direction::greater ? "greater" : "less"}};
}

nlohmann::ordered_json ks_to_json(const stats::KsResult& k) {
    return {{"d_plus", k.d_plus},
            {"d_minus", k.d_minus},
            {"p_value_one_sided", k.p_value_one_sided},
            {"p_floored", k.p_floored},
            {"n_a", k.n_a},
            {"n_b", k.n_b},
            {"direction", k.direction == stats::Direction::greater ? "greater" : "less"}};
}

nlohmann::ordered_json fit_to_json(const evt::GpdFit& f) {
    return {{"u", f.u},
            {"sigma", f.sigma},
            {"xi", f.xi},
            {"zeta_u", f.zeta_u},
            {"n_exceedances", f.n_exceedances},
            {"log_likelihood", f.log_likelihood},
            {"boundary_hit", f.boundary_hit}};
}

nlohmann::ordered_json tail_to_json(const TailSide& side) {
    nlohmann::ordered_json j;
    j["threshold"] = side.threshold;
    j["negated"] = side.negated;
    j["sample_rate_hz"] = side.sample_rate_hz;
    j["fit_active"] = fit_to_json(side.fit_active);
    j["fit_inactive"] = fit_to_json(side.fit_inactive);
    const double sign = side.negated ? -1.0 : 1.0;
    j["return_level_active"] = sign * side.comparison.level_active;
    j["return_level_inactive"] = sign * side.comparison.level_inactive;
    j["ratio"] = side.comparison.ratio;
    j["reduction_percent"] = side.comparison.reduction_percent;
    j["direction"] = side.comparison.direction;
    auto curve_json = [](const evt::MeanExcessCurve& c) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& p : c.points) {
            arr.push_back({{"threshold", p.threshold},
                           {"mean_excess", p.mean_excess},
                           {"count", p.count}});
        }
        return arr;
    };
    j["mean_excess_active"] = curve_json(side.mean_excess_active);
    j["mean_excess_inactive"] = curve_json(side.mean_excess_inactive);
    return j;
}

}  // namespace

std::string render_json_report(const AnalysisReport& r) {
    nlohmann::ordered_json j;
    j["schema_version"] = r.schema_version;
    j["params"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : r.params.entries) j["params"][key] = value;

    j["inventory"] = nlohmann::ordered_json::parse(ingest::inventory_json(r.inventory));

    j["cleaning"] = {{"phone_records_in", r.cleaning.phone_records_in},
                     {"removed_speed_limits", r.cleaning.removed_speed_limits},
                     {"removed_accel_limits", r.cleaning.removed_accel_limits},
                     {"dropped_nonmonotonic", r.cleaning.dropped_nonmonotonic},
                     {"removed_zero_runs", r.cleaning.removed_zero_runs},
                     {"pieces", r.cleaning.pieces},
                     {"smoothed_samples", r.cleaning.smoothed_samples}};
    j["matching"] = {{"fixes", r.matching.fixes},
                     {"matched", r.matching.matched},
                     {"network_segments", r.matching.network_segments},
                     {"network_active_segments", r.matching.network_active_segments}};
    j["alignment"] = {{"can_records", r.alignment.can_records},
                      {"located_records", r.alignment.located_records},
                      {"mean_abs_dt_s", r.alignment.mean_abs_dt_s}};

    j["acceleration"] = {{"positive_means", means_to_json(r.accel.positive_means)},
                         {"negative_means", means_to_json(r.accel.negative_means)},
                         {"zeros_discarded", r.accel.zeros_discarded},
                         {"welch_positive", welch_to_json(r.accel.welch_positive)},
                         {"welch_negative", welch_to_json(r.accel.welch_negative)},
                         {"ks_positive", ks_to_json(r.accel.ks_positive)},
                         {"ks_negative", ks_to_json(r.accel.ks_negative)}};

    j["can_means"] = nlohmann::ordered_json::array();
    for (const auto& row : r.can_means) {
        j["can_means"].push_back({{"channel", row.channel},
                                  {"means", means_to_json(row.means)},
                                  {"p_one_sided", row.p_one_sided}});
    }

    j["segment_tests"] = nlohmann::ordered_json::object();
    j["segment_tests"]["skipped"] = r.segment_tests.skipped;
    j["segment_tests"]["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : r.segment_tests.rows) {
        j["segment_tests"]["rows"].push_back({{"segment_id", row.segment_id},
                                              {"mean_inactive", row.mean_inactive},
                                              {"n_inactive", row.n_inactive},
                                              {"mean_active", row.mean_active},
                                              {"n_active", row.n_active},
                                              {"p_value", row.p_value}});
    }

    j["tails"] = {{"return_period_s", r.return_period_s},
                  {"acceleration", tail_to_json(r.tail_positive)},
                  {"deceleration", tail_to_json(r.tail_negative)}};
    j["summary"] = {{"mean_reduction_percent", r.mean_reduction_percent},
                    {"return_reduction_percent", r.return_reduction_percent}};
    return j.dump(1) + "\n";
}

std::vector<std::string> emit_report(const AnalysisReport& report, const std::string& out_dir,
                                     const std::string& format) {
    const bool all = format == "all";
    if (!all && format != "json" && format != "table" && format != "csv") {
        throw ConfigError("unknown report format: " + format);
    }
    std::filesystem::create_directories(out_dir);

    std::vector<std::string> written;
    const std::filesystem::path dir(out_dir);
    if (all || format == "json") {
        const std::string path = (dir / "report.json").string();
        write_file(path, render_json_report(report));
        written.push_back(path);
    }
    if (all || format == "table") {
        const std::string path = (dir / "report.txt").string();
        write_file(path, render_text_report(report));
        written.push_back(path);
    }
    if (all || format == "csv") {
        for (const auto& [name, curve] : report.ecdf_curves) {
            const std::string path = (dir / ("ecdf_" + name + ".csv")).string();
            std::string body = "value,cdf\n";
            for (const auto& [x, f] : curve) {
                body += csv::format_double(x) + "," + csv::format_double(f) + "\n";
            }
            write_file(path, body);
            written.push_back(path);
        }
        for (const auto& [name, hist] : report.histograms) {
            const std::string path = (dir / ("hist_" + name + ".csv")).string();
            std::string body = "bin_low,count\n";
            for (const auto& [edge, count] : hist) {
                body += csv::format_double(edge) + "," + std::to_string(count) + "\n";
            }
            write_file(path, body);
            written.push_back(path);
        }
        auto write_curve = [&](const std::string& name, const evt::MeanExcessCurve& curve) {
            const std::string path = (dir / ("mean_excess_" + name + ".csv")).string();
            std::string body = "threshold,mean_excess,count\n";
            for (const auto& p : curve.points) {
                body += csv::format_double(p.threshold) + "," +
                        csv::format_double(p.mean_excess) + "," + std::to_string(p.count) + "\n";
            }
            write_file(path, body);
            written.push_back(path);
        };
        write_curve("acceleration_active", report.tail_positive.mean_excess_active);
        write_curve("acceleration_inactive", report.tail_positive.mean_excess_inactive);
        write_curve("deceleration_active", report.tail_negative.mean_excess_active);
        write_curve("deceleration_inactive", report.tail_negative.mean_excess_inactive);

        auto write_hist = [&](const std::string& name,
                              const std::map<double, std::size_t>& hist) {
            const std::string path = (dir / (name + ".csv")).string();
            std::string body = "bin_low,count\n";
            for (const auto& [edge, count] : hist) {
                body += csv::format_double(edge) + "," + std::to_string(count) + "\n";
            }
            write_file(path, body);
            written.push_back(path);
        };
        for (const auto& [source, hist] : report.inventory.frequency_hist) {
            write_hist("frequency_hist_" + source, hist);
        }
        for (const auto& [source, hist] : report.inventory.gap_hist) {
            write_hist("gap_hist_" + source, hist);
        }
    }
    return written;
}

}  // namespace drivetel::pipeline
