#pragma once

#include <string>
#include <utility>

#include <json.hpp>

#include "stackrl/mlp.hpp"

namespace stackrl {

/// Flat container of named little-endian float64 arrays plus a JSON header.
/// Backing format for checkpoints; round-trips values bit-exactly.
class ParamStore {
 public:
  nlohmann::json header;

  void put(const std::string& name, Vec values);
  const Vec& get(const std::string& name) const;
  bool has(const std::string& name) const;
  size_t count() const { return arrays_.size(); }
  const std::vector<std::pair<std::string, Vec>>& arrays() const { return arrays_; }

  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

 private:
  std::vector<std::pair<std::string, Vec>> arrays_;
};

/// Stores every weight/bias tensor of `net` under "<prefix>/<layer>/<kind>"
/// and records topology in the header.
void put_mlp(ParamStore& store, const std::string& prefix, const Mlp& net);
/// Restores parameters in place; topology must match the stored header.
void read_mlp(const ParamStore& store, const std::string& prefix, Mlp& net);

}  // namespace stackrl
