#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "madegan/fir.hpp"
#include "madegan/qrs.hpp"
#include "madegan/synth.hpp"

using namespace madegan;

namespace {

constexpr double kFs = 360.0;

std::vector<double> sine(double freq, double fs, std::size_t n, double amp = 1.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / fs);
    return v;
}

double max_abs(const std::vector<double>& v, std::size_t from, std::size_t to) {
    double m = 0.0;
    for (std::size_t i = from; i < to; ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

}  // namespace

TEST_CASE("highpass kills DC and passes 20 Hz") {
    FirFilter hp = design_highpass_fir(0.5, kFs, 301);
    REQUIRE(hp.taps.size() == 301);

    std::vector<double> dc(4000, 1.0);
    auto y = apply_filter(hp, dc);
    // interior, away from edge transients
    CHECK(max_abs(y, 1000, 3000) < 1e-3);

    auto s = sine(20.0, kFs, 4000);
    auto ys = apply_filter(hp, s);
    double amp = max_abs(ys, 1000, 3000);
    CHECK(amp == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("lowpass unit DC gain and stopband attenuation") {
    FirFilter lp = design_lowpass_fir(15.0, kFs, 101);
    double dc_gain = std::accumulate(lp.taps.begin(), lp.taps.end(), 0.0);
    CHECK(dc_gain == doctest::Approx(1.0).epsilon(1e-9));

    auto hi = sine(100.0, kFs, 4000);
    auto y = apply_filter(lp, hi);
    CHECK(max_abs(y, 1000, 3000) < 0.01);
}

TEST_CASE("bandpass passes the passband and rejects both sides") {
    FirFilter bp = design_bandpass_fir(5.0, 15.0, kFs, 201);
    auto mid = apply_filter(bp, sine(10.0, kFs, 6000));
    CHECK(max_abs(mid, 2000, 4000) > 0.9);
    auto low = apply_filter(bp, sine(0.3, kFs, 6000));
    CHECK(max_abs(low, 2000, 4000) < 0.1);
    auto high = apply_filter(bp, sine(80.0, kFs, 6000));
    CHECK(max_abs(high, 2000, 4000) < 0.1);
}

TEST_CASE("notch rejects the target frequency only") {
    FirFilter notch = design_notch_fir(60.0, 2.0, kFs, 301);
    auto at = apply_filter(notch, sine(60.0, kFs, 6000));
    CHECK(max_abs(at, 2000, 4000) < 0.1);
    auto off = apply_filter(notch, sine(20.0, kFs, 6000));
    CHECK(max_abs(off, 2000, 4000) > 0.9);
}

TEST_CASE("design validation") {
    CHECK_THROWS_AS(design_highpass_fir(0.5, kFs, 300), SignalError);  // even taps
    CHECK_THROWS_AS(design_highpass_fir(0.0, kFs, 301), SignalError);
    CHECK_THROWS_AS(design_highpass_fir(200.0, kFs, 301), SignalError);  // above Nyquist
    CHECK_THROWS_AS(design_bandpass_fir(15.0, 5.0, kFs, 201), SignalError);
}

TEST_CASE("apply_filter is linear and rejects short signals") {
    FirFilter hp = design_highpass_fir(0.5, kFs, 101);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    std::vector<double> x(1000);
    for (auto& v : x) v = d(rng);
    auto y1 = apply_filter(hp, x);
    auto x2 = x;
    for (auto& v : x2) v *= 3.0;
    auto y2 = apply_filter(hp, x2);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(y2[i] == doctest::Approx(3.0 * y1[i]).epsilon(1e-9));

    CHECK_THROWS_AS(apply_filter(hp, std::vector<double>(200, 0.0)), SignalError);
}

TEST_CASE("forward-backward application gives the autocorrelation impulse response") {
    FirFilter lp = design_lowpass_fir(30.0, kFs, 41);
    std::vector<double> impulse(300, 0.0);
    impulse[150] = 1.0;
    auto y = apply_filter(lp, impulse);
    // oracle: centered autocorrelation of the taps
    const auto& h = lp.taps;
    long k = static_cast<long>(h.size());
    for (long lag = -k + 1; lag < k; ++lag) {
        double acc = 0.0;
        for (long i = 0; i < k; ++i) {
            long j = i + lag;
            if (j >= 0 && j < k) acc += h[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(j)];
        }
        CHECK(y[static_cast<std::size_t>(150 + lag)] == doctest::Approx(acc).epsilon(1e-9));
    }
}

TEST_CASE("zero-phase filtering keeps synthetic R-peaks within one sample") {
    std::mt19937_64 rng(11);
    auto synth = render_recording(60.0, 20.0, {{BeatClass::Normal, 1.0}}, rng);
    const auto& sig = synth.recording.channels[0];
    FirFilter hp = design_highpass_fir(0.5, kFs, 301);
    auto filtered = apply_filter(hp, sig);
    auto local_argmax = [](const std::vector<double>& v, std::size_t lo, std::size_t hi) {
        std::size_t best = lo;
        for (std::size_t i = lo; i < hi; ++i)
            if (v[i] > v[best]) best = i;
        return best;
    };
    for (auto r : synth.ground_truth_peaks.indices) {
        if (r < 60 || r + 60 >= filtered.size()) continue;
        std::size_t raw_peak = local_argmax(sig, r - 60, r + 60);
        std::size_t filt_peak = local_argmax(filtered, r - 60, r + 60);
        CHECK(std::llabs(static_cast<long long>(filt_peak) -
                         static_cast<long long>(raw_peak)) <= 1);
    }
}

TEST_CASE("pan-tompkins finds synthetic beats with high sensitivity and precision") {
    std::mt19937_64 rng(17);
    auto synth = render_recording(75.0, 60.0, {{BeatClass::Normal, 1.0}}, rng);
    PeakList peaks = pan_tompkins(synth.recording.channels[0], kFs);
    const auto& truth = synth.ground_truth_peaks.indices;
    REQUIRE(!truth.empty());

    std::size_t matched = 0;
    for (auto t : truth)
        for (auto p : peaks.indices)
            if (std::llabs(static_cast<long long>(p) - static_cast<long long>(t)) <= 5) {
                ++matched;
                break;
            }
    std::size_t matched_dets = 0;
    for (auto p : peaks.indices)
        for (auto t : truth)
            if (std::llabs(static_cast<long long>(p) - static_cast<long long>(t)) <= 5) {
                ++matched_dets;
                break;
            }
    double sensitivity = static_cast<double>(matched) / static_cast<double>(truth.size());
    double ppv = static_cast<double>(matched_dets) / static_cast<double>(peaks.indices.size());
    CHECK(sensitivity >= 0.99);
    CHECK(ppv >= 0.99);
}

TEST_CASE("pan-tompkins peak list is strictly increasing with refractory spacing") {
    std::mt19937_64 rng(23);
    auto synth = render_recording(120.0, 30.0, {{BeatClass::Normal, 1.0}}, rng);
    PeakList peaks = pan_tompkins(synth.recording.channels[0], kFs);
    std::size_t refractory = static_cast<std::size_t>(0.2 * kFs);
    for (std::size_t i = 1; i < peaks.indices.size(); ++i)
        CHECK(peaks.indices[i] >= peaks.indices[i - 1] + refractory);
}

TEST_CASE("pan-tompkins edge cases") {
    CHECK(pan_tompkins(std::vector<double>(4000, 0.0), kFs).indices.empty());
    CHECK_THROWS_AS(pan_tompkins(std::vector<double>(100, 0.0), kFs), SignalError);
}

TEST_CASE("segmentation window boundaries") {
    std::vector<double> sig(2000);
    for (std::size_t i = 0; i < sig.size(); ++i) sig[i] = static_cast<double>(i);
    PeakList peaks;
    peaks.indices = {100, 1000, 1900};  // first and last windows run out of bounds
    std::vector<Annotation> anns = {{100, 'N'}, {1000, 'V'}, {1900, 'N'}};
    auto seg = segment_beats(sig, peaks, anns, "rec");
    REQUIRE(seg.beats.size() == 1);
    CHECK(seg.dropped == 2);
    CHECK(seg.beats.size() + seg.dropped == peaks.indices.size());
    const BeatRecord& b = seg.beats[0];
    CHECK(b.label == BeatClass::Ventricular);
    CHECK(b.r_peak_index == 1000);
    CHECK(b.waveform[0] == 860.0);    // window starts at r - 140
    CHECK(b.waveform[319] == 1179.0); // window ends at r + 180 exclusive
    CHECK(b.record_id == "rec");
}

TEST_CASE("segmentation drops unannotated peaks and counts them") {
    std::vector<double> sig(2000, 0.0);
    PeakList peaks;
    peaks.indices = {500, 1000};
    std::vector<Annotation> anns = {{1010, 'N'}};  // within +-50 of the second peak only
    auto seg = segment_beats(sig, peaks, anns);
    CHECK(seg.beats.size() == 1);
    CHECK(seg.unlabeled == 1);
    CHECK(seg.dropped == 1);

    std::vector<Annotation> far = {{600, 'N'}};  // 100 samples away, outside tolerance
    auto seg2 = segment_beats(sig, PeakList{{500}}, far);
    CHECK(seg2.beats.empty());
    CHECK(seg2.unlabeled == 1);
}

TEST_CASE("segmentation picks the nearest annotation") {
    std::vector<double> sig(2000, 0.0);
    std::vector<Annotation> anns = {{960, 'V'}, {1005, 'S'}};
    auto seg = segment_beats(sig, PeakList{{1000}}, anns);
    REQUIRE(seg.beats.size() == 1);
    CHECK(seg.beats[0].label == BeatClass::Supraventricular);
}
