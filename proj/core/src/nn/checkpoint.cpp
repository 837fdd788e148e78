#include "fingen/nn/checkpoint.hpp"

#include <fstream>

#include "fingen/errors.hpp"

namespace fingen::nn {

namespace {
constexpr const char* kFormat = "fingen-checkpoint";
}

nlohmann::json to_json(const Checkpoint& c) {
  nlohmann::json nets = nlohmann::json::array();
  for (const auto& n : c.networks) nets.push_back(to_json(n));
  return {{"format", kFormat},   {"version", kCheckpointVersion}, {"precision", "float64"},
          {"networks", nets},    {"params", c.params},            {"optimizer", to_json(c.optimizer)},
          {"metadata", c.metadata}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kFormat) throw ParseError("not a fingen checkpoint");
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint c;
    std::size_t expected = 0;
    for (const auto& n : doc.at("networks")) {
      c.networks.push_back(network_spec_from_json(n));
      expected += Network(c.networks.back()).parameter_count();
    }
    c.params = doc.at("params").get<std::vector<double>>();
    // Networks may be followed by extra free parameters (e.g. a log-std vector).
    if (c.params.size() < expected) throw ParseError("checkpoint holds fewer parameters than its networks need");
    c.optimizer = adam_state_from_json(doc.at("optimizer"));
    if (!c.optimizer.m.empty() && c.optimizer.m.size() != c.params.size()) {
      throw ParseError("optimizer state does not match parameter count");
    }
    c.metadata = doc.value("metadata", nlohmann::json::object());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << to_json(checkpoint).dump() << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

}  // namespace fingen::nn
