#include "madegan/synth.hpp"

#include <cmath>

namespace madegan {

namespace {

constexpr double kFs = 360.0;

void add_gaussian(std::array<double, kBeatLength>& wf, double center_s, double width_s,
                  double amplitude) {
    for (std::size_t i = 0; i < kBeatLength; ++i) {
        double t = (static_cast<double>(i) - static_cast<double>(kSamplesBeforeR)) / kFs;
        double u = (t - center_s) / width_s;
        wf[i] += amplitude * std::exp(-0.5 * u * u);
    }
}

}  // namespace

BeatRecord render_beat(const BeatTemplate& tmpl, std::mt19937_64& rng, const JitterParams& jitter) {
    BeatRecord beat;
    beat.waveform.fill(0.0);
    beat.label = tmpl.label;
    beat.r_peak_index = kSamplesBeforeR;
    std::normal_distribution<double> unit(0.0, 1.0);
    for (auto& c : tmpl.components) {
        double amp = c.amplitude * (1.0 + jitter.amplitude_frac * unit(rng));
        double width = c.width_s * std::max(0.2, 1.0 + jitter.width_frac * unit(rng));
        double center = c.center_s + jitter.phase_s * unit(rng);
        add_gaussian(beat.waveform, center, width, amp);
    }
    if (jitter.noise_sigma > 0.0)
        for (double& v : beat.waveform) v += jitter.noise_sigma * unit(rng);
    return beat;
}

std::map<BeatClass, BeatTemplate> default_templates() {
    std::map<BeatClass, BeatTemplate> t;
    // N: textbook P-QRS-T
    t[BeatClass::Normal] = {{
                                {-0.200, 0.025, 0.15},   // P
                                {-0.025, 0.010, -0.12},  // Q
                                {0.000, 0.012, 1.00},    // R
                                {0.030, 0.010, -0.25},   // S
                                {0.250, 0.045, 0.30},    // T
                            },
                            BeatClass::Normal};
    // V: wide, tall QRS, no P wave, discordant T
    t[BeatClass::Ventricular] = {{
                                     {0.000, 0.040, 1.40},
                                     {0.070, 0.030, -0.55},
                                     {0.280, 0.060, -0.35},
                                 },
                                 BeatClass::Ventricular};
    // S: early narrow beat, small P, reduced amplitude
    t[BeatClass::Supraventricular] = {{
                                          {-0.150, 0.018, 0.06},
                                          {-0.020, 0.008, -0.10},
                                          {0.000, 0.009, 0.75},
                                          {0.025, 0.008, -0.18},
                                          {0.190, 0.035, 0.22},
                                      },
                                      BeatClass::Supraventricular};
    // F: fusion morphology between N and V
    t[BeatClass::Fusion] = {{
                                {-0.190, 0.025, 0.08},
                                {0.000, 0.026, 1.10},
                                {0.050, 0.020, -0.40},
                                {0.260, 0.050, 0.05},
                            },
                            BeatClass::Fusion};
    return t;
}

std::vector<BeatRecord> render_beats(std::size_t n, const std::map<BeatClass, double>& mix,
                                     std::mt19937_64& rng, const JitterParams& jitter) {
    double total = 0.0;
    for (auto& [cls, p] : mix) total += p;
    if (std::fabs(total - 1.0) > 1e-9)
        throw SignalError("render_beats: mix probabilities must sum to 1");
    auto templates = default_templates();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<BeatRecord> beats;
    beats.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double r = u(rng), acc = 0.0;
        BeatClass cls = mix.begin()->first;
        for (auto& [c, p] : mix) {
            acc += p;
            cls = c;
            if (r <= acc) break;
        }
        beats.push_back(render_beat(templates.at(cls), rng, jitter));
    }
    return beats;
}

SynthRecording render_recording(double bpm, double duration_s,
                                const std::map<BeatClass, double>& mix,
                                std::mt19937_64& rng, const JitterParams& jitter,
                                double sample_rate) {
    if (bpm < 30.0 || bpm > 200.0) throw SignalError("render_recording: bpm outside [30, 200]");
    double total = 0.0;
    for (auto& [cls, p] : mix) total += p;
    if (std::fabs(total - 1.0) > 1e-9)
        throw SignalError("render_recording: mix probabilities must sum to 1");
    double rr_s = 60.0 / bpm;
    if (duration_s < rr_s + 1.0)
        throw SignalError("render_recording: duration too short for one beat");

    std::size_t len = static_cast<std::size_t>(duration_s * sample_rate);
    SynthRecording out;
    out.recording.record_id = "synth";
    out.recording.sample_rate = sample_rate;
    out.recording.channels.assign(1, std::vector<double>(len, 0.0));
    auto& sig = out.recording.channels[0];

    auto templates = default_templates();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> rr_jit(-0.05, 0.05);

    double t = 0.6;  // leave room for the first beat window
    while (true) {
        std::size_t r = static_cast<std::size_t>(t * sample_rate);
        if (r + kSamplesAfterR >= len) break;
        double pick = u(rng), acc = 0.0;
        BeatClass cls = mix.begin()->first;
        for (auto& [c, p] : mix) {
            acc += p;
            cls = c;
            if (pick <= acc) break;
        }
        BeatRecord beat = render_beat(templates.at(cls), rng, jitter);
        for (std::size_t i = 0; i < kBeatLength; ++i) {
            long idx = static_cast<long>(r) - static_cast<long>(kSamplesBeforeR) + static_cast<long>(i);
            if (idx >= 0 && idx < static_cast<long>(len)) sig[idx] += beat.waveform[i];
        }
        out.ground_truth_peaks.indices.push_back(r);
        out.annotations.push_back({r, beat_class_symbol(cls)});
        t += rr_s * (1.0 + rr_jit(rng));
    }
    return out;
}

}  // namespace madegan
