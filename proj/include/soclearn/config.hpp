#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace soclearn {

// key = value run configuration. Every key has a documented default;
// unknown keys are rejected; a partial file overrides only the keys it
// names. Lines starting with '#' are comments.
class RunConfig {
 public:
  RunConfig() : values_(defaults()) {}

  static const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> map{
        {"model", "pbsi"},          // fit: model variant (pbsi|psi|p|si)
        {"chains", "4"},            // fit: HMC chains
        {"warmup", "500"},          // fit: warmup iterations per chain
        {"draws", "500"},           // fit: kept draws per chain
        {"periods", "50"},          // simulate/grid: periods
        {"population", "50"},       // simulate/grid: population size
        {"sample_size", "5"},       // simulate: peers observed per period
        {"replications", "50"},     // grid: replications per cell
        {"mean_step", "0.1"},       // grid: mean-preference grid step
        {"f_step", "0.1"},          // grid: f grid step
        {"minority", "0"},          // grid: minority variant flag
        {"individuals", "120"},     // gen/recover: individuals
        {"decisions", "10"},        // gen/recover: decisions per task
        {"workers", "1"},           // worker threads
    };
    return map;
  }

  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config: line " + std::to_string(lineno) +
                                 ": expected key = value");
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  void set(const std::string& key, const std::string& value) {
    if (defaults().find(key) == defaults().end())
      throw std::runtime_error("config: unknown key '" + key + "'");
    values_[key] = value;
  }

  const std::string& get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("config: unknown key '" + key + "'");
    return it->second;
  }

  int get_int(const std::string& key) const { return std::stoi(get(key)); }
  double get_double(const std::string& key) const { return std::stod(get(key)); }
  bool get_bool(const std::string& key) const { return get(key) != "0"; }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  }
  std::map<std::string, std::string> values_;
};

}  // namespace soclearn
