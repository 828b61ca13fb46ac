#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace madegan {

struct SignalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FirFilter {
    std::vector<double> taps;  // odd count, linear phase
    double cutoff_hz = 0.0;
    double sample_rate = 0.0;
    std::string kind;  // "highpass", "lowpass", "bandpass", "notch"
};

// Hamming-windowed sinc designs. Tap counts must be odd.
FirFilter design_lowpass_fir(double cutoff_hz, double sample_rate, std::size_t taps);
// Spectral inversion of the matching low-pass: DC gain ~0, passband gain ~1.
FirFilter design_highpass_fir(double cutoff_hz, double sample_rate, std::size_t taps);
FirFilter design_bandpass_fir(double lo_hz, double hi_hz, double sample_rate, std::size_t taps);
// Narrow band-reject centered on freq_hz (power-line interference).
FirFilter design_notch_fir(double freq_hz, double half_width_hz, double sample_rate, std::size_t taps);

// Single forward pass, zero-padded edges, output aligned with input
// (group delay removed).
std::vector<double> filter_forward(const FirFilter& f, const std::vector<double>& signal);

// Zero-phase forward-backward application; peak positions are preserved.
// Requires signal length >= 3 * tap count.
std::vector<double> apply_filter(const FirFilter& f, const std::vector<double>& signal);

}  // namespace madegan
