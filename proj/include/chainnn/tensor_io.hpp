#pragma once

#include <iosfwd>
#include <string>

#include "chainnn/tensor.hpp"

namespace chainnn {

// Binary layout: "CNNT", u16 version, u16 rank, 4 x u16 dims (unused = 0),
// then little-endian int16 samples.
inline constexpr uint16_t kTensorFileVersion = 1;

void write_tensor(std::ostream& os, const SampleTensor& t);
SampleTensor read_tensor(std::istream& is);

void save_tensor(const std::string& path, const SampleTensor& t);
SampleTensor load_tensor(const std::string& path);

}  // namespace chainnn
