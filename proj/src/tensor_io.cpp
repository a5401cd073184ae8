#include "chainnn/tensor_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "chainnn/errors.hpp"

namespace chainnn {

namespace {

void put_u16(std::ostream& os, uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}

uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  if (!is.read(reinterpret_cast<char*>(b), 2)) throw ShapeError("tensor file truncated");
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

}  // namespace

void write_tensor(std::ostream& os, const SampleTensor& t) {
  if (t.rank() < 1 || t.rank() > 4) throw ShapeError("tensor rank must be 1..4");
  os.write("CNNT", 4);
  put_u16(os, kTensorFileVersion);
  put_u16(os, static_cast<uint16_t>(t.rank()));
  for (int a = 0; a < 4; ++a) {
    const int d = a < t.rank() ? t.dims[a] : 0;
    if (d < 0 || d > 0xffff) throw ShapeError("tensor dim does not fit u16");
    put_u16(os, static_cast<uint16_t>(d));
  }
  for (int32_t v : t.data) {
    if (v < -32768 || v > 32767) throw ShapeError("sample does not fit int16");
    put_u16(os, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
}

SampleTensor read_tensor(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "CNNT", 4) != 0)
    throw ShapeError("not a tensor file (bad magic)");
  const uint16_t version = get_u16(is);
  if (version != kTensorFileVersion) throw ShapeError("unsupported tensor file version");
  const uint16_t rank = get_u16(is);
  if (rank < 1 || rank > 4) throw ShapeError("tensor rank must be 1..4");
  std::vector<int> dims;
  for (int a = 0; a < 4; ++a) {
    const uint16_t d = get_u16(is);
    if (a < rank) dims.push_back(d);
  }
  SampleTensor t(dims);
  for (auto& v : t.data) v = static_cast<int16_t>(get_u16(is));
  return t;
}

void save_tensor(const std::string& path, const SampleTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_tensor(os, t);
}

SampleTensor load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return read_tensor(is);
}

}  // namespace chainnn
