#include "stackrl/param_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace stackrl {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {
constexpr char kMagic[8] = {'S', 'R', 'L', 'C', 'K', 'P', 'T', '1'};
}

void ParamStore::put(const std::string& name, Vec values) {
  for (auto& [existing, _] : arrays_)
    SRL_CHECK(existing != name, "duplicate array name: " + name);
  arrays_.emplace_back(name, std::move(values));
}

const Vec& ParamStore::get(const std::string& name) const {
  for (auto& [existing, values] : arrays_)
    if (existing == name) return values;
  throw std::runtime_error("checkpoint is missing array: " + name);
}

bool ParamStore::has(const std::string& name) const {
  for (auto& [existing, _] : arrays_)
    if (existing == name) return true;
  return false;
}

void ParamStore::save(const std::string& path) const {
  nlohmann::json index = nlohmann::json::array();
  for (auto& [name, values] : arrays_)
    index.push_back({{"name", name}, {"count", values.size()}});
  nlohmann::json meta{{"header", header}, {"index", index}};
  const std::string meta_bytes = meta.dump();

  std::ofstream out(path, std::ios::binary);
  SRL_CHECK(out.good(), "cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  const uint64_t len = meta_bytes.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(meta_bytes.data(), static_cast<std::streamsize>(meta_bytes.size()));
  for (auto& [_, values] : arrays_)
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  SRL_CHECK(out.good(), "write failed: " + path);
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  SRL_CHECK(in.good(), "cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  SRL_CHECK(in.good() && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0,
            "not a checkpoint file: " + path);
  uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string meta_bytes(len, '\0');
  in.read(meta_bytes.data(), static_cast<std::streamsize>(len));
  SRL_CHECK(in.good(), "truncated checkpoint header: " + path);
  nlohmann::json meta = nlohmann::json::parse(meta_bytes);

  ParamStore store;
  store.header = meta.at("header");
  for (const auto& entry : meta.at("index")) {
    Vec values(entry.at("count").get<size_t>());
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    SRL_CHECK(in.good(), "truncated checkpoint data: " + path);
    store.arrays_.emplace_back(entry.at("name").get<std::string>(), std::move(values));
  }
  return store;
}

namespace {

const char* activation_name(OutputActivation a) {
  return a == OutputActivation::Tanh ? "tanh" : "identity";
}

}  // namespace

void put_mlp(ParamStore& store, const std::string& prefix, const Mlp& net) {
  store.header["networks"][prefix] = {
      {"layer_sizes", net.layer_sizes},
      {"output_activation", activation_name(net.output_activation)},
      {"preactivation_penalty_coeff", net.preactivation_penalty_coeff}};
  for (int l = 0; l < net.n_layers(); ++l) {
    store.put(prefix + "/" + std::to_string(l) + "/weights", net.weights[l].data);
    store.put(prefix + "/" + std::to_string(l) + "/biases", net.biases[l].data);
  }
}

void read_mlp(const ParamStore& store, const std::string& prefix, Mlp& net) {
  const auto& nets = store.header.at("networks");
  SRL_CHECK(nets.contains(prefix), "checkpoint has no network named " + prefix);
  const auto sizes = nets.at(prefix).at("layer_sizes").get<std::vector<int>>();
  SRL_CHECK(sizes == net.layer_sizes,
            "checkpoint layer sizes do not match for " + prefix);
  const std::string act = nets.at(prefix).at("output_activation").get<std::string>();
  SRL_CHECK(act == activation_name(net.output_activation),
            "checkpoint output activation does not match for " + prefix);
  for (int l = 0; l < net.n_layers(); ++l) {
    const Vec& w = store.get(prefix + "/" + std::to_string(l) + "/weights");
    const Vec& b = store.get(prefix + "/" + std::to_string(l) + "/biases");
    SRL_CHECK(w.size() == net.weights[l].data.size(), "weight size mismatch in " + prefix);
    SRL_CHECK(b.size() == net.biases[l].data.size(), "bias size mismatch in " + prefix);
    net.weights[l].data = w;
    net.biases[l].data = b;
  }
  net.bump();
}

}  // namespace stackrl
