#include "madegan/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace madegan {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts unsupported");

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw TensorError("checkpoint: truncated stream");
    return v;
}

}  // namespace

void save_checkpoint(std::ostream& os, const ParamSet& params) {
    os.write("MGAN", 4);
    write_u32(os, kCheckpointVersion);
    for (auto& name : params.names()) {
        const Tensor& t = params.at(name);
        write_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(os, static_cast<std::uint32_t>(t.rank()));
        for (std::size_t i = 0; i < t.rank(); ++i)
            write_u32(os, static_cast<std::uint32_t>(t.dim(i)));
        os.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(t.numel() * sizeof(double)));
    }
    if (!os) throw TensorError("checkpoint: write failed");
}

void save_checkpoint(const std::string& path, const ParamSet& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw TensorError("checkpoint: cannot open '" + path + "' for writing");
    save_checkpoint(os, params);
}

ParamSet load_checkpoint(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "MGAN", 4) != 0)
        throw TensorError("checkpoint: bad magic");
    std::uint32_t version = read_u32(is);
    if (version != kCheckpointVersion)
        throw TensorError("checkpoint: unsupported version " + std::to_string(version));
    ParamSet params;
    while (true) {
        int c = is.peek();
        if (c == std::char_traits<char>::eof()) break;
        std::uint32_t name_len = read_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        std::uint32_t rank = read_u32(is);
        Shape shape(rank);
        for (auto& e : shape) e = read_u32(is);
        std::vector<double> values(shape_numel(shape));
        is.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (!is) throw TensorError("checkpoint: truncated parameter '" + name + "'");
        params.add(name, Tensor(std::move(shape), std::move(values), false));
    }
    return params;
}

ParamSet load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw TensorError("checkpoint: cannot open '" + path + "'");
    return load_checkpoint(is);
}

}  // namespace madegan
