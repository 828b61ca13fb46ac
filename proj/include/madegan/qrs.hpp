#pragma once

#include <vector>

#include "madegan/beats.hpp"
#include "madegan/fir.hpp"
#include "madegan/wfdb.hpp"

namespace madegan {

struct PeakList {
    std::vector<std::size_t> indices;  // strictly increasing
};

// Pan-Tompkins QRS detector: 5-15 Hz band-pass, five-point derivative,
// squaring, 150 ms moving-window integration, dual adaptive thresholds with
// search-back, 200 ms refractory. Detections are refined to the local
// maximum of the band-passed signal within +-50 ms.
// Requires at least 2 s of signal.
PeakList pan_tompkins(const std::vector<double>& signal, double sample_rate);

struct SegmentationResult {
    std::vector<BeatRecord> beats;
    std::size_t dropped = 0;  // windows out of bounds or without an annotation
    std::size_t unlabeled = 0;
};

// Window [r-140, r+180) per peak; pairs each beat with the nearest
// annotation within +-50 samples; out-of-bounds windows are dropped.
SegmentationResult segment_beats(const std::vector<double>& signal, const PeakList& peaks,
                                 const std::vector<Annotation>& annotations,
                                 const std::string& record_id = "");

inline constexpr std::size_t kSamplesBeforeR = 140;
inline constexpr std::size_t kSamplesAfterR = 180;

}  // namespace madegan
