#include "drivetel/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "drivetel/csv.hpp"
#include "drivetel/errors.hpp"

namespace drivetel::align {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum Step : std::uint8_t { kDiag = 0, kUp = 1, kLeft = 2, kStart = 3 };

void check_input(const std::vector<double>& seq, const char* name) {
    if (seq.empty()) throw DataError(std::string("dtw_align: empty sequence ") + name);
    for (std::size_t i = 1; i < seq.size(); ++i) {
        if (seq[i] < seq[i - 1]) {
            throw DataError(std::string("dtw_align: sequence ") + name +
                            " has decreasing timestamps at index " + std::to_string(i));
        }
    }
}

// In-band column range per row. Bands come straight from the timestamps
// (|a_i - b_j| <= band), widened so (0,0) and (N-1,M-1) are included and
// consecutive rows stay connected.
std::vector<std::pair<std::size_t, std::size_t>> band_ranges(const std::vector<double>& a,
                                                             const std::vector<double>& b,
                                                             double band_s) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::pair<std::size_t, std::size_t>> range(n);
    if (band_s <= 0.0) {
        for (auto& r : range) r = {0, m - 1};
        return range;
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto lo_it = std::lower_bound(b.begin(), b.end(), a[i] - band_s);
        auto hi_it = std::upper_bound(b.begin(), b.end(), a[i] + band_s);
        std::size_t lo = static_cast<std::size_t>(lo_it - b.begin());
        std::size_t hi = hi_it == b.begin() ? 0 : static_cast<std::size_t>(hi_it - b.begin()) - 1;
        lo = std::min(lo, m - 1);
        hi = std::max(hi, lo);
        range[i] = {lo, hi};
    }
    range[0].first = 0;
    range[n - 1].second = m - 1;
    for (std::size_t i = 1; i < n; ++i) {
        range[i].first = std::min(range[i].first, range[i - 1].second + 1);
        range[i].first = std::max(range[i].first, range[i - 1].first);
        range[i].second = std::max({range[i].second, range[i].first, range[i - 1].second});
        range[i].second = std::min(range[i].second, m - 1);
    }
    return range;
}

}  // namespace

AlignmentPath dtw_align(const std::vector<double>& a, const std::vector<double>& b,
                        double band_s) {
    check_input(a, "a");
    check_input(b, "b");

    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const auto range = band_ranges(a, b, band_s);

    // Rolling cost rows plus one byte of backpointer per in-band cell.
    std::vector<std::vector<std::uint8_t>> steps(n);
    std::vector<double> prev_row;
    std::vector<double> cur_row;
    std::size_t prev_lo = 0;

    for (std::size_t i = 0; i < n; ++i) {
        const auto [lo, hi] = range[i];
        cur_row.assign(hi - lo + 1, kInf);
        steps[i].assign(hi - lo + 1, kStart);

        for (std::size_t j = lo; j <= hi; ++j) {
            const double cost = std::fabs(a[i] - b[j]);
            const std::size_t col = j - lo;
            if (i == 0 && j == 0) {
                cur_row[col] = cost;
                steps[i][col] = kStart;
                continue;
            }
            auto prev_cost = [&](std::size_t jj) -> double {
                if (i == 0) return kInf;
                const auto [plo, phi] = range[i - 1];
                if (jj < plo || jj > phi) return kInf;
                return prev_row[jj - prev_lo];
            };
            const double diag = (j > 0) ? prev_cost(j - 1) : kInf;
            const double up = prev_cost(j);
            const double left = (j > lo) ? cur_row[col - 1] : kInf;

            double best = diag;
            std::uint8_t step = kDiag;
            if (up < best) {
                best = up;
                step = kUp;
            }
            if (left < best) {
                best = left;
                step = kLeft;
            }
            cur_row[col] = cost + best;
            steps[i][col] = step;
        }
        prev_row.swap(cur_row);
        prev_lo = lo;
    }

    AlignmentPath path;
    path.total_cost = prev_row[m - 1 - range[n - 1].first];

    std::size_t i = n - 1;
    std::size_t j = m - 1;
    while (true) {
        path.pairs.emplace_back(i, j);
        const std::uint8_t step = steps[i][j - range[i].first];
        if (step == kStart) break;
        if (step == kDiag) {
            --i;
            --j;
        } else if (step == kUp) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(path.pairs.begin(), path.pairs.end());
    return path;
}

AlignmentPath dtw_align_chunked(const std::vector<double>& a, const std::vector<double>& b,
                                double band_s, std::size_t max_cells) {
    check_input(a, "a");
    check_input(b, "b");
    if (max_cells == 0 || a.size() * b.size() <= max_cells) {
        return dtw_align(a, b, band_s);
    }

    // Split a at its largest time gap (midpoint fallback) and b at the gap's
    // midpoint timestamp, keeping every piece nonempty.
    std::size_t split_a = a.size() / 2;
    double best_gap = -1.0;
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (a[i] - a[i - 1] > best_gap) {
            best_gap = a[i] - a[i - 1];
            split_a = i;
        }
    }
    const double split_time = 0.5 * (a[split_a - 1] + a[split_a]);
    auto it = std::lower_bound(b.begin(), b.end(), split_time);
    std::size_t split_b = static_cast<std::size_t>(it - b.begin());
    split_b = std::clamp<std::size_t>(split_b, 1, b.size() - 1);

    const std::vector<double> a1(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(split_a));
    const std::vector<double> a2(a.begin() + static_cast<std::ptrdiff_t>(split_a), a.end());
    const std::vector<double> b1(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(split_b));
    const std::vector<double> b2(b.begin() + static_cast<std::ptrdiff_t>(split_b), b.end());

    AlignmentPath left = dtw_align_chunked(a1, b1, band_s, max_cells);
    const AlignmentPath right = dtw_align_chunked(a2, b2, band_s, max_cells);

    for (const auto& [ia, ib] : right.pairs) {
        left.pairs.emplace_back(ia + split_a, ib + split_b);
    }
    left.total_cost += right.total_cost;
    return left;
}

std::vector<LocatedCanRecord> transfer_locations(const std::vector<CanRecord>& can,
                                                 const std::vector<PhoneRecord>& phone,
                                                 const AlignmentPath& path) {
    std::vector<LocatedCanRecord> out(can.size());
    std::vector<double> best_dt(can.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < can.size(); ++i) out[i].record = can[i];

    for (const auto& [ia, ib] : path.pairs) {
        if (ia >= can.size() || ib >= phone.size()) {
            throw DataError("transfer_locations: path index out of range");
        }
        const double dt = std::fabs(can[ia].timestamp - phone[ib].timestamp);
        // Strict < keeps the earlier phone record on ties (pairs are visited
        // in path order, which is nondecreasing in ib).
        if (dt < best_dt[ia]) {
            best_dt[ia] = dt;
            out[ia].latitude = phone[ib].latitude;
            out[ia].longitude = phone[ib].longitude;
            out[ia].matched_phone_timestamp = phone[ib].timestamp;
        }
    }
    for (std::size_t i = 0; i < can.size(); ++i) {
        if (!std::isfinite(best_dt[i])) {
            throw DataError("transfer_locations: path does not cover CAN index " +
                            std::to_string(i));
        }
    }
    return out;
}

void write_located_csv(const std::string& path, const std::vector<LocatedCanRecord>& records) {
    std::ofstream out(path);
    if (!out.is_open()) throw ConfigError("cannot open output file: " + path);
    out << "trip_id,timestamp,channel,value,active,lat,lon,matched_phone_timestamp\n";
    for (const auto& r : records) {
        out << csv::join({r.record.trip_id, csv::format_double(r.record.timestamp),
                          std::string(channel_name(r.record.channel)),
                          csv::format_double(r.record.value), r.record.active ? "true" : "false",
                          csv::format_double(r.latitude), csv::format_double(r.longitude),
                          csv::format_double(r.matched_phone_timestamp)},
                         ',')
            << "\n";
    }
}

std::vector<LocatedCanRecord> read_located_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw ConfigError("cannot open input file: " + path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<LocatedCanRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line_no == 1) continue;
        auto fields = csv::split(line, ',');
        if (fields.size() != 8) {
            throw ParseError(path, line_no,
                             "expected 8 fields, got " + std::to_string(fields.size()));
        }
        LocatedCanRecord rec;
        rec.record.trip_id = csv::trim(fields[0]);
        const auto channel = parse_channel(fields[2]);
        if (!channel) throw ParseError(path, line_no, "unknown channel " + csv::trim(fields[2]));
        rec.record.channel = *channel;
        if (!csv::parse_double(fields[1], rec.record.timestamp) ||
            !csv::parse_double(fields[3], rec.record.value) ||
            !csv::parse_bool(fields[4], rec.record.active) ||
            !csv::parse_double(fields[5], rec.latitude) ||
            !csv::parse_double(fields[6], rec.longitude) ||
            !csv::parse_double(fields[7], rec.matched_phone_timestamp)) {
            throw ParseError(path, line_no, "bad field");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace drivetel::align
