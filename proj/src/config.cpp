#include "memr/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace memr {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' needs an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' needs a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: key '" + key + "' needs true/false, got '" + v + "'");
}

std::string int_list_to_string(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(static_cast<int>(to_long("list", item)));
  }
  if (out.empty()) throw std::invalid_argument("config: empty integer list '" + text + "'");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_double("list", item));
  }
  if (out.empty()) throw std::invalid_argument("config: empty number list '" + text + "'");
  return out;
}

KvMap parse_kv_string(const std::string& text) {
  KvMap kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value': '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw std::invalid_argument("config: empty key on line " + std::to_string(lineno));
    }
    kv[key] = value;
  }
  return kv;
}

KvMap parse_kv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_kv_string(buf.str());
}

void apply_kv(TrainerConfig& cfg, const KvMap& kv) {
  using Setter = std::function<void(TrainerConfig&, const std::string&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"env", [](TrainerConfig& c, const std::string&, const std::string& v) { c.env_name = v; }},
      {"seed", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.seed = static_cast<std::uint64_t>(to_long(k, v)); }},
      {"total_num_steps", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.total_num_steps = to_long(k, v); }},
      {"model_update_freq", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.model_update_freq = to_long(k, v); }},
      {"rollouts_per_step", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.rollouts_per_step = to_long(k, v); }},
      {"alpha", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.alpha = to_double(k, v); }},
      {"beta_start", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.beta_start = to_double(k, v); }},
      {"beta_end", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.beta_end = to_double(k, v); }},
      {"policy_epochs", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.policy_epochs = static_cast<int>(to_long(k, v)); }},
      {"policy_updates", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.policy_updates = static_cast<int>(to_long(k, v)); }},
      {"batch_size", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.batch_size = static_cast<int>(to_long(k, v)); }},
      {"model_dataset_size", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.model_dataset_size = to_long(k, v); }},
      {"env_buffer_capacity", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.env_buffer_capacity = static_cast<std::size_t>(to_long(k, v)); }},
      {"initial_random_steps", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.initial_random_steps = to_long(k, v); }},
      {"eval_interval", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.eval_interval = to_long(k, v); }},
      {"eval_episodes", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.eval_episodes = static_cast<int>(to_long(k, v)); }},
      {"gamma", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.gamma = to_double(k, v); }},
      {"tau", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.tau = to_double(k, v); }},
      {"sac_lr", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.sac_lr = to_double(k, v); }},
      {"alpha_lr", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.alpha_lr = to_double(k, v); }},
      {"model_lr", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.model_lr = to_double(k, v); }},
      {"policy_model_lr", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.policy_model_lr = to_double(k, v); }},
      {"dynamics_hidden", [](TrainerConfig& c, const std::string&, const std::string& v) { c.dynamics_hidden = parse_int_list(v); }},
      {"sac_hidden", [](TrainerConfig& c, const std::string&, const std::string& v) { c.sac_hidden = parse_int_list(v); }},
      {"policy_model_hidden", [](TrainerConfig& c, const std::string&, const std::string& v) { c.policy_model_hidden = parse_int_list(v); }},
      {"ensemble_size", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.ensemble_size = static_cast<int>(to_long(k, v)); }},
      {"model_batch_size", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.model_batch_size = static_cast<int>(to_long(k, v)); }},
      {"model_max_epochs", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.model_max_epochs = static_cast<int>(to_long(k, v)); }},
      {"model_patience", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.model_patience = static_cast<int>(to_long(k, v)); }},
      {"model_holdout", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.model_holdout = to_double(k, v); }},
      {"model_min_train", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.model_min_train = to_long(k, v); }},
      {"model_from_scratch", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.model_from_scratch = to_bool(k, v); }},
      {"policy_model_minibatch", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.policy_model_minibatch = static_cast<int>(to_long(k, v)); }},
      {"real_data_fraction", [](TrainerConfig& c, const std::string& k, const std::string& v) { c.real_data_fraction = to_double(k, v); }},
  };
  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    it->second(cfg, key, value);
  }
}

std::string config_to_string(const TrainerConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "env = \"" << c.env_name << "\"\n";
  os << "seed = " << c.seed << "\n";
  os << "total_num_steps = " << c.total_num_steps << "\n";
  os << "model_update_freq = " << c.model_update_freq << "\n";
  os << "rollouts_per_step = " << c.rollouts_per_step << "\n";
  os << "alpha = " << c.alpha << "\n";
  os << "beta_start = " << c.beta_start << "\n";
  os << "beta_end = " << c.beta_end << "\n";
  os << "policy_epochs = " << c.policy_epochs << "\n";
  os << "policy_updates = " << c.policy_updates << "\n";
  os << "batch_size = " << c.batch_size << "\n";
  os << "model_dataset_size = " << c.model_dataset_size << "\n";
  os << "env_buffer_capacity = " << c.env_buffer_capacity << "\n";
  os << "initial_random_steps = " << c.initial_random_steps << "\n";
  os << "eval_interval = " << c.eval_interval << "\n";
  os << "eval_episodes = " << c.eval_episodes << "\n";
  os << "gamma = " << c.gamma << "\n";
  os << "tau = " << c.tau << "\n";
  os << "sac_lr = " << c.sac_lr << "\n";
  os << "alpha_lr = " << c.alpha_lr << "\n";
  os << "model_lr = " << c.model_lr << "\n";
  os << "policy_model_lr = " << c.policy_model_lr << "\n";
  os << "dynamics_hidden = \"" << int_list_to_string(c.dynamics_hidden) << "\"\n";
  os << "sac_hidden = \"" << int_list_to_string(c.sac_hidden) << "\"\n";
  os << "policy_model_hidden = \"" << int_list_to_string(c.policy_model_hidden) << "\"\n";
  os << "ensemble_size = " << c.ensemble_size << "\n";
  os << "model_batch_size = " << c.model_batch_size << "\n";
  os << "model_max_epochs = " << c.model_max_epochs << "\n";
  os << "model_patience = " << c.model_patience << "\n";
  os << "model_holdout = " << c.model_holdout << "\n";
  os << "model_min_train = " << c.model_min_train << "\n";
  os << "model_from_scratch = " << (c.model_from_scratch ? "true" : "false") << "\n";
  os << "policy_model_minibatch = " << c.policy_model_minibatch << "\n";
  os << "real_data_fraction = " << c.real_data_fraction << "\n";
  return os.str();
}

}  // namespace memr
