#include "madegan/qrs.hpp"

#include <algorithm>
#include <cmath>

namespace madegan {

namespace {

std::vector<double> five_point_derivative(const std::vector<double>& x) {
    long n = static_cast<long>(x.size());
    std::vector<double> d(x.size(), 0.0);
    auto at = [&](long i) { return (i < 0 || i >= n) ? 0.0 : x[i]; };
    for (long i = 0; i < n; ++i)
        d[i] = (-at(i - 2) - 2.0 * at(i - 1) + 2.0 * at(i + 1) + at(i + 2)) / 8.0;
    return d;
}

std::vector<double> moving_window_integrate(const std::vector<double>& x, std::size_t w) {
    long n = static_cast<long>(x.size());
    long half = static_cast<long>(w) / 2;
    std::vector<double> out(x.size(), 0.0);
    double acc = 0.0;
    long lo = 0, hi = -1;  // current window [lo, hi]
    for (long i = 0; i < n; ++i) {
        long new_lo = i - half;
        long new_hi = std::min(n - 1, i + half);
        while (hi < new_hi) acc += x[++hi];
        while (lo < new_lo) acc -= x[lo++];
        out[i] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

}  // namespace

PeakList pan_tompkins(const std::vector<double>& signal, double sample_rate) {
    if (sample_rate <= 0.0) throw SignalError("pan_tompkins: sample rate must be positive");
    std::size_t min_len = static_cast<std::size_t>(2.0 * sample_rate);
    if (signal.size() < min_len) throw SignalError("pan_tompkins: signal shorter than 2 s");

    std::size_t bp_taps = static_cast<std::size_t>(sample_rate * 0.28) | 1;  // ~101 at 360 Hz
    FirFilter bp = design_bandpass_fir(5.0, 15.0, sample_rate, bp_taps);
    std::vector<double> banded = apply_filter(bp, signal);
    std::vector<double> deriv = five_point_derivative(banded);
    std::vector<double> squared(deriv.size());
    for (std::size_t i = 0; i < deriv.size(); ++i) squared[i] = deriv[i] * deriv[i];
    std::size_t mwi_w = static_cast<std::size_t>(0.150 * sample_rate);
    std::vector<double> mwi = moving_window_integrate(squared, mwi_w);

    std::size_t refractory = static_cast<std::size_t>(0.200 * sample_rate);

    // fiducial marks: maxima of the integrated signal over a half-refractory
    // neighborhood, so slope ripples do not register as candidate peaks
    std::vector<std::size_t> marks;
    long neigh = static_cast<long>(refractory) / 2;
    long nn = static_cast<long>(mwi.size());
    for (long i = 1; i + 1 < nn; ++i) {
        if (mwi[i] <= 0.0) continue;
        bool is_max = true;
        for (long j = std::max(0L, i - neigh); j <= std::min(nn - 1, i + neigh); ++j)
            if (mwi[j] > mwi[i] || (mwi[j] == mwi[i] && j < i)) {
                is_max = false;
                break;
            }
        if (is_max) marks.push_back(static_cast<std::size_t>(i));
    }
    std::size_t learn = static_cast<std::size_t>(2.0 * sample_rate);
    double init_max = *std::max_element(mwi.begin(), mwi.begin() + static_cast<long>(learn));
    double init_mean = 0.0;
    for (std::size_t i = 0; i < learn; ++i) init_mean += mwi[i];
    init_mean /= static_cast<double>(learn);
    double spki = 0.25 * init_max;
    double npki = 0.5 * init_mean;

    std::vector<std::size_t> qrs;  // fiducial positions
    std::vector<double> rr_hist;
    auto avg_rr = [&]() {
        if (rr_hist.empty()) return sample_rate;  // assume 60 bpm until measured
        std::size_t k = std::min<std::size_t>(8, rr_hist.size());
        double s = 0.0;
        for (std::size_t i = rr_hist.size() - k; i < rr_hist.size(); ++i) s += rr_hist[i];
        return s / static_cast<double>(k);
    };

    std::size_t searchback_from = 0;  // index into marks for the search-back scan
    for (std::size_t mi = 0; mi < marks.size(); ++mi) {
        std::size_t pos = marks[mi];
        double peak = mwi[pos];
        double thr1 = npki + 0.25 * (spki - npki);
        if (!qrs.empty() && pos - qrs.back() < refractory) continue;
        if (peak > thr1) {
            if (!qrs.empty()) rr_hist.push_back(static_cast<double>(pos - qrs.back()));
            qrs.push_back(pos);
            spki = 0.125 * peak + 0.875 * spki;
            searchback_from = mi + 1;
        } else {
            npki = 0.125 * peak + 0.875 * npki;
            // search-back: no QRS for 1.66x the running RR average
            if (!qrs.empty() &&
                static_cast<double>(pos - qrs.back()) > 1.66 * avg_rr()) {
                double thr2 = 0.5 * thr1;
                std::size_t best = 0;
                double best_v = thr2;
                for (std::size_t j = searchback_from; j <= mi; ++j) {
                    std::size_t cand = marks[j];
                    if (cand - qrs.back() < refractory) continue;
                    if (mwi[cand] > best_v) {
                        best_v = mwi[cand];
                        best = cand;
                    }
                }
                if (best != 0) {
                    rr_hist.push_back(static_cast<double>(best - qrs.back()));
                    qrs.push_back(best);
                    spki = 0.25 * best_v + 0.75 * spki;
                    searchback_from = mi + 1;
                }
            }
        }
    }

    // refine to the band-passed local maximum within +-50 ms
    std::size_t radius = static_cast<std::size_t>(0.050 * sample_rate);
    PeakList out;
    for (std::size_t pos : qrs) {
        std::size_t lo = pos > radius ? pos - radius : 0;
        std::size_t hi = std::min(banded.size() - 1, pos + radius);
        std::size_t best = lo;
        for (std::size_t i = lo + 1; i <= hi; ++i)
            if (banded[i] > banded[best]) best = i;
        if (!out.indices.empty()) {
            if (best <= out.indices.back()) continue;
            if (best - out.indices.back() < refractory) continue;
        }
        out.indices.push_back(best);
    }
    return out;
}

SegmentationResult segment_beats(const std::vector<double>& signal, const PeakList& peaks,
                                 const std::vector<Annotation>& annotations,
                                 const std::string& record_id) {
    SegmentationResult res;
    for (std::size_t r : peaks.indices) {
        if (r < kSamplesBeforeR || r + kSamplesAfterR > signal.size()) {
            ++res.dropped;
            continue;
        }
        // nearest annotation within +-50 samples
        const Annotation* nearest = nullptr;
        std::size_t best_dist = 51;
        for (auto& a : annotations) {
            std::size_t dist = a.sample_index > r ? a.sample_index - r : r - a.sample_index;
            if (dist < best_dist) {
                best_dist = dist;
                nearest = &a;
            }
        }
        BeatClass label;
        if (!nearest || !map_annotation_symbol(nearest->symbol, label)) {
            ++res.dropped;
            ++res.unlabeled;
            continue;
        }
        BeatRecord beat;
        beat.label = label;
        beat.record_id = record_id;
        beat.r_peak_index = r;
        for (std::size_t i = 0; i < kBeatLength; ++i)
            beat.waveform[i] = signal[r - kSamplesBeforeR + i];
        res.beats.push_back(std::move(beat));
    }
    return res;
}

}  // namespace madegan
