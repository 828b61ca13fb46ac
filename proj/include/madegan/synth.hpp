#pragma once

#include <map>
#include <random>
#include <vector>

#include "madegan/beats.hpp"
#include "madegan/qrs.hpp"
#include "madegan/wfdb.hpp"

namespace madegan {

// Sum-of-Gaussians beat morphology: one component per wave (P, Q, R, S, T).
struct WaveComponent {
    double center_s;     // seconds relative to the R peak
    double width_s;      // Gaussian sigma, seconds
    double amplitude;    // signed, mV-like units
};

struct BeatTemplate {
    std::vector<WaveComponent> components;
    BeatClass label = BeatClass::Normal;
};

struct JitterParams {
    double amplitude_frac = 0.05;  // relative amplitude jitter per component
    double width_frac = 0.05;
    double phase_s = 0.004;        // absolute center jitter, seconds
    double noise_sigma = 0.05;     // additive white noise
};

// 320-sample beat at 360 Hz on the [-140, +180) window around R.
BeatRecord render_beat(const BeatTemplate& tmpl, std::mt19937_64& rng,
                       const JitterParams& jitter = {});

// Four separable morphologies:
//   N: full P-QRS-T;  V: wide tall QRS, no P;  S: early narrow beat, small P;
//   F: fusion of N and V shapes.
std::map<BeatClass, BeatTemplate> default_templates();

struct SynthRecording {
    EcgRecording recording;
    PeakList ground_truth_peaks;
    std::vector<Annotation> annotations;
};

// Beats at the given rate with +-5% RR jitter; mix maps class -> probability
// (must sum to 1). Ground-truth R indices are returned for detector tests.
SynthRecording render_recording(double bpm, double duration_s,
                                const std::map<BeatClass, double>& mix,
                                std::mt19937_64& rng,
                                const JitterParams& jitter = {},
                                double sample_rate = 360.0);

// Convenience: n independent beats drawn from the mix.
std::vector<BeatRecord> render_beats(std::size_t n, const std::map<BeatClass, double>& mix,
                                     std::mt19937_64& rng, const JitterParams& jitter = {});

}  // namespace madegan
