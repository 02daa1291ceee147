#ifndef DRIVETEL_DTW_HPP
#define DRIVETEL_DTW_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "drivetel/records.hpp"

namespace drivetel::align {

// Monotone warping path between two sequences. Pairs are 0-based (index_a,
// index_b), start at (0,0), end at (|a|-1, |b|-1), and each step advances
// index_a, index_b, or both by one. total_cost is the sum of per-pair costs
// |a[i] - b[j]| in seconds.
struct AlignmentPath {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    double total_cost = 0.0;
};

// Full dynamic program over |time(a_i) - time(b_j)| with a deterministic
// tie-break (prefer the diagonal step, then advancing a). band_s > 0 enables
// a Sakoe-Chiba-style band in the time domain: cells with timestamps more
// than band_s apart are excluded (widened where needed so the corners stay
// connected). Both sequences must be nonempty and nondecreasing.
AlignmentPath dtw_align(const std::vector<double>& a, const std::vector<double>& b,
                        double band_s = 0.0);

// dtw_align with a cell cap: inputs whose DP table would exceed max_cells are
// split recursively at the largest time gap and the pieces aligned
// independently (an approximation that only engages past the cap).
AlignmentPath dtw_align_chunked(const std::vector<double>& a, const std::vector<double>& b,
                                double band_s, std::size_t max_cells);

// Gives each CAN record the location of its DTW-matched phone record. When a
// CAN index is matched to several phone indices, the one with minimal |dt|
// wins; ties go to the earlier phone record. Output length equals the CAN
// input length. The path must have been computed over these sequences'
// timestamps (a = CAN, b = phone).
std::vector<LocatedCanRecord> transfer_locations(const std::vector<CanRecord>& can,
                                                 const std::vector<PhoneRecord>& phone,
                                                 const AlignmentPath& path);

// Located CAN CSV: the CAN schema extended with lat, lon,
// matched_phone_timestamp.
void write_located_csv(const std::string& path, const std::vector<LocatedCanRecord>& records);
std::vector<LocatedCanRecord> read_located_csv(const std::string& path);

}  // namespace drivetel::align

#endif
