#include "gigp/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gigp::harness {

namespace {

void write_le32(std::ostream& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);  // x86-64 is little endian; memcpy keeps it explicit
  out.write(b, 4);
}

std::uint32_t read_le32(std::istream& in, const std::string& path) {
  char b[4];
  in.read(b, 4);
  if (!in) throw std::runtime_error("checkpoint: truncated " + path);
  std::uint32_t v;
  std::memcpy(&v, b, 4);
  return v;
}

}  // namespace

void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, const nn::Tensor*>>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write("GIGP", 4);
  write_le32(out, 1);
  write_le32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    write_le32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_le32(out, static_cast<std::uint32_t>(t->shape.size()));
    for (std::size_t d : t->shape) write_le32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t->data.data()),
              static_cast<std::streamsize>(t->data.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::map<std::string, nn::Tensor> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "GIGP", 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const std::uint32_t version = read_le32(in, path);
  if (version != 1)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  const std::uint32_t count = read_le32(in, path);
  std::map<std::string, nn::Tensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_le32(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const std::uint32_t rank = read_le32(in, path);
    std::vector<std::size_t> shape(rank);
    std::size_t numel = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape[d] = read_le32(in, path);
      numel *= shape[d];
    }
    nn::Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(numel * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor " + name);
    out.emplace(std::move(name), std::move(t));
  }
  return out;
}

}  // namespace gigp::harness
