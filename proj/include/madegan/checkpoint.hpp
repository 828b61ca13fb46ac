#pragma once

#include <iosfwd>
#include <string>

#include "madegan/optim.hpp"

namespace madegan {

// Model checkpoint container, little-endian binary:
//   magic "MGAN", version u32, then per parameter:
//   name length u32, name bytes, rank u32, extents u32 each, values f64.
// Records run to end of stream. Parameter order is the set's insertion
// order, so save -> load -> save is byte-identical.

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(std::ostream& os, const ParamSet& params);
void save_checkpoint(const std::string& path, const ParamSet& params);

ParamSet load_checkpoint(std::istream& is);
ParamSet load_checkpoint(const std::string& path);

}  // namespace madegan
