#include "memr/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "memr/binary_io.hpp"

namespace memr {

std::ostringstream& CheckpointWriter::add_section(const std::string& name) {
  auto [it, inserted] = sections_.try_emplace(name);
  if (!inserted) throw std::logic_error("checkpoint: duplicate section '" + name + "'");
  order_.push_back(name);
  return it->second;
}

void CheckpointWriter::write(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open '" + tmp + "' for writing");
    os.write(kCheckpointMagic, 4);
    io::write_u32(os, kCheckpointVersion);
    io::write_u32(os, static_cast<std::uint32_t>(order_.size()));
    for (const auto& name : order_) {
      io::write_string(os, name);
      io::write_u64(os, sections_.at(name).str().size());
    }
    for (const auto& name : order_) {
      const std::string payload = sections_.at(name).str();
      io::write_bytes(os, payload.data(), payload.size());
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("checkpoint: cannot rename '" + tmp + "' to '" + path + "'");
  }
}

CheckpointReader::CheckpointReader(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  char magic[4];
  io::read_bytes(is, magic, 4, "checkpoint magic");
  if (std::string(magic, 4) != std::string(kCheckpointMagic, 4)) {
    throw std::runtime_error("checkpoint: bad magic in '" + path + "'");
  }
  const std::uint32_t version = io::read_u32(is, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported format version " +
                             std::to_string(version));
  }
  const std::uint32_t count = io::read_u32(is, "checkpoint section count");
  std::vector<std::pair<std::string, std::uint64_t>> table;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name = io::read_string(is, "checkpoint section name");
    const std::uint64_t size = io::read_u64(is, "checkpoint section size");
    table.emplace_back(std::move(name), size);
  }
  for (const auto& [name, size] : table) {
    std::string payload(size, '\0');
    io::read_bytes(is, payload.data(), size, ("section '" + name + "'").c_str());
    sections_.emplace(name, std::move(payload));
  }
}

std::istringstream CheckpointReader::section(const std::string& name) const {
  const auto it = sections_.find(name);
  if (it == sections_.end()) {
    throw std::runtime_error("checkpoint: missing section '" + name + "'");
  }
  return std::istringstream(it->second, std::ios::binary);
}

}  // namespace memr
