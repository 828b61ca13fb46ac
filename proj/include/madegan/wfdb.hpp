#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace madegan {

struct EcgRecording {
    std::string record_id;
    double sample_rate = 360.0;
    // channel-major sample buffers, equal lengths
    std::vector<std::vector<double>> channels;

    std::size_t length() const { return channels.empty() ? 0 : channels[0].size(); }
};

struct Annotation {
    std::size_t sample_index;
    char symbol;  // N, S, V, F or the raw MIT-BIH symbol before mapping
};

struct WfdbError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Format 212: each 3-byte group packs two 12-bit two's-complement samples,
//   s1 = b0 | ((b1 & 0x0F) << 8),  s2 = b2 | ((b1 & 0xF0) << 4).
// Two-channel records interleave channels; single-channel records pack
// consecutive samples of the one channel.
std::vector<std::int16_t> decode_212(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_212(const std::vector<std::int16_t>& samples);

// Minimal .hea parsing: "<record> <nsig> <fs> [<nsamp>]" on the first line.
// Unknown trailing fields are ignored; a note per ignored field is appended
// to *warnings when given.
EcgRecording read_wfdb_212(const std::vector<std::uint8_t>& signal_bytes,
                           const std::string& header,
                           std::vector<std::string>* warnings = nullptr);

EcgRecording read_wfdb_212_files(const std::string& dat_path, const std::string& hea_path,
                                 std::vector<std::string>* warnings = nullptr);

void write_wfdb_212_files(const EcgRecording& rec, const std::string& dat_path,
                          const std::string& hea_path);

// Plain-text annotations: one "<sample_index> <symbol>" per line.
std::vector<Annotation> read_annotations_text(const std::string& path);
void write_annotations_text(const std::vector<Annotation>& anns, const std::string& path);

// Drops recordings whose record_id is on the exclusion list.
// Default list: {"102", "104", "107", "217"}.
std::vector<EcgRecording> exclude_records(std::vector<EcgRecording> recs,
                                          const std::vector<std::string>& exclusion = {"102", "104", "107", "217"},
                                          std::vector<std::string>* warnings = nullptr);

}  // namespace madegan
