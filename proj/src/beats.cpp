#include "madegan/beats.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace madegan {

char beat_class_symbol(BeatClass c) {
    switch (c) {
        case BeatClass::Normal: return 'N';
        case BeatClass::Supraventricular: return 'S';
        case BeatClass::Ventricular: return 'V';
        case BeatClass::Fusion: return 'F';
    }
    return '?';
}

bool map_annotation_symbol(char symbol, BeatClass& out) {
    switch (symbol) {
        case 'N': case 'L': case 'R': case 'e': case 'j':
            out = BeatClass::Normal;
            return true;
        case 'S': case 'A': case 'a': case 'J':
            out = BeatClass::Supraventricular;
            return true;
        case 'V': case 'E':
            out = BeatClass::Ventricular;
            return true;
        case 'F':
            out = BeatClass::Fusion;
            return true;
        default:
            return false;
    }
}

std::vector<BeatRecord> read_csv_beats(std::istream& is) {
    std::vector<BeatRecord> beats;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        BeatRecord beat;
        std::size_t col = 0;
        bool have_label = false;
        while (std::getline(ls, cell, ',')) {
            if (col < kBeatLength) {
                try {
                    std::size_t used = 0;
                    beat.waveform[col] = std::stod(cell, &used);
                    if (used != cell.size()) throw std::invalid_argument(cell);
                } catch (const std::exception&) {
                    throw BeatIoError("csv line " + std::to_string(lineno) + ": bad value in column " +
                                      std::to_string(col + 1));
                }
            } else if (col == kBeatLength) {
                if (cell == "N") beat.label = BeatClass::Normal;
                else if (cell == "S") beat.label = BeatClass::Supraventricular;
                else if (cell == "V") beat.label = BeatClass::Ventricular;
                else if (cell == "F") beat.label = BeatClass::Fusion;
                else throw BeatIoError("csv line " + std::to_string(lineno) + ": unknown label '" + cell + "'");
                have_label = true;
            }
            ++col;
        }
        if (col != kBeatLength + 1 || !have_label)
            throw BeatIoError("csv line " + std::to_string(lineno) + ": expected " +
                              std::to_string(kBeatLength) + " values plus a label, got " +
                              std::to_string(col) + " columns");
        beats.push_back(beat);
    }
    return beats;
}

std::vector<BeatRecord> read_csv_beats_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw BeatIoError("cannot open '" + path + "'");
    return read_csv_beats(is);
}

void write_csv_beats(std::ostream& os, const std::vector<BeatRecord>& beats) {
    os << std::setprecision(17);
    for (auto& b : beats) {
        for (double v : b.waveform) os << v << ",";
        os << beat_class_symbol(b.label) << "\n";
    }
}

void write_csv_beats_file(const std::string& path, const std::vector<BeatRecord>& beats) {
    std::ofstream os(path);
    if (!os) throw BeatIoError("cannot open '" + path + "' for writing");
    write_csv_beats(os, beats);
}

BeatRecord normalize_beat(const BeatRecord& beat) {
    BeatRecord out = beat;
    double mean = 0.0;
    for (double v : beat.waveform) mean += v;
    mean /= kBeatLength;
    double var = 0.0;
    for (double v : beat.waveform) var += (v - mean) * (v - mean);
    var /= kBeatLength;
    if (var < 1e-24) {
        out.waveform.fill(0.0);
        return out;
    }
    double inv = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < kBeatLength; ++i) out.waveform[i] = (beat.waveform[i] - mean) * inv;
    return out;
}

std::array<std::size_t, 4> class_counts(const std::vector<BeatRecord>& beats) {
    std::array<std::size_t, 4> counts{0, 0, 0, 0};
    for (auto& b : beats) counts[static_cast<int>(b.label)]++;
    return counts;
}

}  // namespace madegan
