#pragma once

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace madegan {

inline constexpr std::size_t kBeatLength = 320;

// Class ids follow the N/S/V/F order used throughout.
enum class BeatClass : int { Normal = 0, Supraventricular = 1, Ventricular = 2, Fusion = 3 };

char beat_class_symbol(BeatClass c);
// AAMI-style grouping: {N,L,R,e,j}->N, {S,A,a,J}->S, {V,E}->V, {F}->F.
// Returns false for symbols outside the four groups.
bool map_annotation_symbol(char symbol, BeatClass& out);

struct BeatRecord {
    std::array<double, kBeatLength> waveform;
    BeatClass label = BeatClass::Normal;
    std::string record_id;
    std::size_t r_peak_index = 0;
};

struct BeatIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CSV interchange: each row is 320 floats then a label token (N/S/V/F).
std::vector<BeatRecord> read_csv_beats(std::istream& is);
std::vector<BeatRecord> read_csv_beats_file(const std::string& path);
void write_csv_beats(std::ostream& os, const std::vector<BeatRecord>& beats);
void write_csv_beats_file(const std::string& path, const std::vector<BeatRecord>& beats);

// Zero mean, unit variance per beat; a constant beat maps to all zeros.
BeatRecord normalize_beat(const BeatRecord& beat);

std::array<std::size_t, 4> class_counts(const std::vector<BeatRecord>& beats);

}  // namespace madegan
