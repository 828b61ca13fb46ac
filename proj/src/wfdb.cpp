#include "madegan/wfdb.hpp"

#include <fstream>
#include <sstream>

namespace madegan {

std::vector<std::int16_t> decode_212(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() % 3 != 0)
        throw WfdbError("format 212: truncated triplet at byte offset " +
                        std::to_string(bytes.size() - bytes.size() % 3));
    std::vector<std::int16_t> samples;
    samples.reserve(bytes.size() / 3 * 2);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        std::uint16_t s1 = static_cast<std::uint16_t>(bytes[i] | ((bytes[i + 1] & 0x0F) << 8));
        std::uint16_t s2 = static_cast<std::uint16_t>(bytes[i + 2] | ((bytes[i + 1] & 0xF0) << 4));
        // sign-extend 12-bit two's complement
        auto ext = [](std::uint16_t v) {
            return static_cast<std::int16_t>(v & 0x800 ? v | 0xF000 : v);
        };
        samples.push_back(ext(s1));
        samples.push_back(ext(s2));
    }
    return samples;
}

std::vector<std::uint8_t> encode_212(const std::vector<std::int16_t>& samples) {
    if (samples.size() % 2 != 0)
        throw WfdbError("format 212: sample count must be even (pairs pack into triplets)");
    std::vector<std::uint8_t> bytes;
    bytes.reserve(samples.size() / 2 * 3);
    for (std::size_t i = 0; i < samples.size(); i += 2) {
        for (std::size_t j = 0; j < 2; ++j)
            if (samples[i + j] < -2048 || samples[i + j] > 2047)
                throw WfdbError("format 212: sample " + std::to_string(i + j) +
                                " outside 12-bit range");
        std::uint16_t a = static_cast<std::uint16_t>(samples[i]) & 0x0FFF;
        std::uint16_t b = static_cast<std::uint16_t>(samples[i + 1]) & 0x0FFF;
        bytes.push_back(static_cast<std::uint8_t>(a & 0xFF));
        bytes.push_back(static_cast<std::uint8_t>(((a >> 8) & 0x0F) | ((b >> 8) << 4)));
        bytes.push_back(static_cast<std::uint8_t>(b & 0xFF));
    }
    return bytes;
}

EcgRecording read_wfdb_212(const std::vector<std::uint8_t>& signal_bytes,
                           const std::string& header,
                           std::vector<std::string>* warnings) {
    std::istringstream hs(header);
    std::string first_line;
    if (!std::getline(hs, first_line)) throw WfdbError("header: empty");
    std::istringstream ls(first_line);
    std::string record_id;
    int nsig = 0;
    double fs = 0.0;
    if (!(ls >> record_id >> nsig >> fs))
        throw WfdbError("header: expected '<record> <nsig> <fs>'");
    if (nsig != 1 && nsig != 2)
        throw WfdbError("header: only 1- or 2-signal format 212 records supported, got " +
                        std::to_string(nsig));
    if (fs <= 0.0) throw WfdbError("header: sample rate must be positive");
    std::string extra;
    while (ls >> extra) {
        // nsamp is the only recognised optional field
        if (warnings && extra.find_first_not_of("0123456789") != std::string::npos)
            warnings->push_back("header: ignoring field '" + extra + "'");
    }

    auto flat = decode_212(signal_bytes);
    EcgRecording rec;
    rec.record_id = record_id;
    rec.sample_rate = fs;
    rec.channels.resize(static_cast<std::size_t>(nsig));
    if (nsig == 1) {
        rec.channels[0].assign(flat.begin(), flat.end());
    } else {
        for (std::size_t i = 0; i + 1 < flat.size(); i += 2) {
            rec.channels[0].push_back(flat[i]);
            rec.channels[1].push_back(flat[i + 1]);
        }
    }
    return rec;
}

namespace {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw WfdbError("cannot open '" + path + "'");
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(is),
                                     std::istreambuf_iterator<char>());
}

}  // namespace

EcgRecording read_wfdb_212_files(const std::string& dat_path, const std::string& hea_path,
                                 std::vector<std::string>* warnings) {
    std::ifstream hs(hea_path);
    if (!hs) throw WfdbError("cannot open '" + hea_path + "'");
    std::stringstream buf;
    buf << hs.rdbuf();
    return read_wfdb_212(read_file_bytes(dat_path), buf.str(), warnings);
}

void write_wfdb_212_files(const EcgRecording& rec, const std::string& dat_path,
                          const std::string& hea_path) {
    if (rec.channels.empty() || rec.channels.size() > 2)
        throw WfdbError("write: only 1- or 2-channel recordings supported");
    std::vector<std::int16_t> flat;
    std::size_t len = rec.length();
    if (rec.channels.size() == 2) {
        for (std::size_t i = 0; i < len; ++i) {
            flat.push_back(static_cast<std::int16_t>(rec.channels[0][i]));
            flat.push_back(static_cast<std::int16_t>(rec.channels[1][i]));
        }
    } else {
        for (std::size_t i = 0; i < len; ++i)
            flat.push_back(static_cast<std::int16_t>(rec.channels[0][i]));
        if (flat.size() % 2) flat.push_back(0);  // pad to a full triplet
    }
    auto bytes = encode_212(flat);
    std::ofstream ds(dat_path, std::ios::binary);
    if (!ds) throw WfdbError("cannot open '" + dat_path + "' for writing");
    ds.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    std::ofstream hs(hea_path);
    if (!hs) throw WfdbError("cannot open '" + hea_path + "' for writing");
    hs << rec.record_id << " " << rec.channels.size() << " " << rec.sample_rate << " " << len << "\n";
    for (std::size_t c = 0; c < rec.channels.size(); ++c)
        hs << rec.record_id << ".dat 212 200 11 1024 0 0 0 ch" << c << "\n";
}

std::vector<Annotation> read_annotations_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw WfdbError("cannot open '" + path + "'");
    std::vector<Annotation> anns;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::size_t idx;
        std::string sym;
        if (!(ls >> idx >> sym) || sym.size() != 1)
            throw WfdbError("annotations: malformed line " + std::to_string(lineno));
        anns.push_back({idx, sym[0]});
    }
    return anns;
}

void write_annotations_text(const std::vector<Annotation>& anns, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw WfdbError("cannot open '" + path + "' for writing");
    for (auto& a : anns) os << a.sample_index << " " << a.symbol << "\n";
}

std::vector<EcgRecording> exclude_records(std::vector<EcgRecording> recs,
                                          const std::vector<std::string>& exclusion,
                                          std::vector<std::string>* warnings) {
    std::vector<EcgRecording> kept;
    for (auto& r : recs) {
        bool drop = false;
        for (auto& e : exclusion)
            if (r.record_id == e) drop = true;
        if (!drop) kept.push_back(std::move(r));
    }
    if (kept.empty() && !recs.empty() && warnings)
        warnings->push_back("exclude_records: all recordings excluded");
    return kept;
}

}  // namespace madegan
