#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace memr {

// Versioned binary container: magic "MEMR", format version, section table
// (name + payload size), then payloads in table order.
inline constexpr char kCheckpointMagic[4] = {'M', 'E', 'M', 'R'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointWriter {
 public:
  // Returns a stream to fill with the named section's payload.
  std::ostringstream& add_section(const std::string& name);

  // Writes the container to a temporary file and renames it into place, so a
  // failed write never leaves a partial checkpoint behind.
  void write(const std::string& path) const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::ostringstream> sections_;
};

class CheckpointReader {
 public:
  explicit CheckpointReader(const std::string& path);

  bool has(const std::string& name) const { return sections_.count(name) != 0; }

  // Stream over the named section; throws naming the section when absent.
  std::istringstream section(const std::string& name) const;

 private:
  std::map<std::string, std::string> sections_;
};

}  // namespace memr
