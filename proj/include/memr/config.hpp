#pragma once

#include <map>
#include <string>
#include <vector>

#include "memr/trainer.hpp"

namespace memr {

using KvMap = std::map<std::string, std::string>;

// Flat TOML-style key = value files: one pair per line, '#' comments,
// optional double quotes around string values. No tables or arrays; list
// values (hidden sizes) are comma-separated strings.
KvMap parse_kv_string(const std::string& text);
KvMap parse_kv_file(const std::string& path);

// Applies pairs onto a config; unknown keys or unparsable values throw.
void apply_kv(TrainerConfig& cfg, const KvMap& kv);

// Canonical key = value rendering of every config field, in fixed order.
// Inverse of apply_kv; used for the startup echo and the run manifest.
std::string config_to_string(const TrainerConfig& cfg);

std::vector<int> parse_int_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace memr
