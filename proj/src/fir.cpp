#include "madegan/fir.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace madegan {

namespace {

void validate(double cutoff_hz, double sample_rate, std::size_t taps) {
    if (sample_rate <= 0.0) throw SignalError("fir: sample rate must be positive");
    if (cutoff_hz <= 0.0 || cutoff_hz >= sample_rate / 2.0)
        throw SignalError("fir: cutoff must lie in (0, fs/2)");
    if (taps < 3 || taps % 2 == 0) throw SignalError("fir: tap count must be odd and >= 3");
}

std::vector<double> windowed_sinc(double cutoff_hz, double sample_rate, std::size_t taps) {
    std::vector<double> h(taps);
    double fc = cutoff_hz / sample_rate;  // cycles per sample
    auto mid = static_cast<double>(taps - 1) / 2.0;
    for (std::size_t i = 0; i < taps; ++i) {
        double t = static_cast<double>(i) - mid;
        double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * t) /
                                                (std::numbers::pi * t);
        double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(taps - 1));
        h[i] = sinc * w;
    }
    double s = 0.0;
    for (double v : h) s += v;
    for (double& v : h) v /= s;  // unit DC gain
    return h;
}

}  // namespace

FirFilter design_lowpass_fir(double cutoff_hz, double sample_rate, std::size_t taps) {
    validate(cutoff_hz, sample_rate, taps);
    return {windowed_sinc(cutoff_hz, sample_rate, taps), cutoff_hz, sample_rate, "lowpass"};
}

FirFilter design_highpass_fir(double cutoff_hz, double sample_rate, std::size_t taps) {
    validate(cutoff_hz, sample_rate, taps);
    auto h = windowed_sinc(cutoff_hz, sample_rate, taps);
    for (double& v : h) v = -v;
    h[(taps - 1) / 2] += 1.0;
    return {std::move(h), cutoff_hz, sample_rate, "highpass"};
}

FirFilter design_bandpass_fir(double lo_hz, double hi_hz, double sample_rate, std::size_t taps) {
    validate(lo_hz, sample_rate, taps);
    validate(hi_hz, sample_rate, taps);
    if (lo_hz >= hi_hz) throw SignalError("fir: bandpass requires lo < hi");
    auto h_hi = windowed_sinc(hi_hz, sample_rate, taps);
    auto h_lo = windowed_sinc(lo_hz, sample_rate, taps);
    for (std::size_t i = 0; i < taps; ++i) h_hi[i] -= h_lo[i];
    return {std::move(h_hi), hi_hz, sample_rate, "bandpass"};
}

FirFilter design_notch_fir(double freq_hz, double half_width_hz, double sample_rate, std::size_t taps) {
    auto bp = design_bandpass_fir(freq_hz - half_width_hz, freq_hz + half_width_hz, sample_rate, taps);
    for (double& v : bp.taps) v = -v;
    bp.taps[(taps - 1) / 2] += 1.0;
    bp.kind = "notch";
    bp.cutoff_hz = freq_hz;
    return bp;
}

std::vector<double> filter_forward(const FirFilter& f, const std::vector<double>& signal) {
    std::size_t taps = f.taps.size();
    std::size_t half = (taps - 1) / 2;
    std::vector<double> out(signal.size(), 0.0);
    long n = static_cast<long>(signal.size());
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < taps; ++j) {
            long idx = i + static_cast<long>(j) - static_cast<long>(half);
            if (idx >= 0 && idx < n) acc += f.taps[j] * signal[idx];
        }
        out[i] = acc;
    }
    return out;
}

std::vector<double> apply_filter(const FirFilter& f, const std::vector<double>& signal) {
    if (signal.size() < 3 * f.taps.size())
        throw SignalError("apply_filter: signal shorter than 3x tap count");
    auto y = filter_forward(f, signal);
    std::reverse(y.begin(), y.end());
    y = filter_forward(f, y);
    std::reverse(y.begin(), y.end());
    return y;
}

}  // namespace madegan
