#include "coordlab/json_io.hpp"

#include <fstream>

namespace coordlab {

namespace {

nlohmann::json table_json(const std::vector<std::size_t>& axes,
                          const std::vector<double>& probs) {
  nlohmann::json j;
  j["axes"] = axes;
  j["probs"] = probs;
  return j;
}

void parse_fields(const nlohmann::json& j, std::vector<std::size_t>& axes,
                  std::vector<double>& probs) {
  if (!j.contains("axes") || !j["axes"].is_array()) {
    throw std::invalid_argument("table JSON: missing or non-array field 'axes'");
  }
  if (!j.contains("probs") || !j["probs"].is_array()) {
    throw std::invalid_argument("table JSON: missing or non-array field 'probs'");
  }
  axes = j["axes"].get<std::vector<std::size_t>>();
  probs = j["probs"].get<std::vector<double>>();
}

}  // namespace

nlohmann::json to_json(const Pmf& p) { return table_json({p.size()}, p.probs()); }

nlohmann::json to_json(const Channel& c) {
  return table_json({c.in_size(), c.out_size()}, c.rows());
}

nlohmann::json to_json(const JointTable& t) {
  return table_json(t.axis_sizes(), t.probs());
}

Pmf pmf_from_json(const nlohmann::json& j) {
  std::vector<std::size_t> axes;
  std::vector<double> probs;
  parse_fields(j, axes, probs);
  if (axes.size() != 1) throw std::invalid_argument("Pmf JSON: expected one axis");
  return Pmf(std::move(probs));
}

Channel channel_from_json(const nlohmann::json& j) {
  std::vector<std::size_t> axes;
  std::vector<double> probs;
  parse_fields(j, axes, probs);
  if (axes.size() != 2) throw std::invalid_argument("Channel JSON: expected two axes");
  return Channel(axes[0], axes[1], std::move(probs));
}

JointTable joint_from_json(const nlohmann::json& j) {
  std::vector<std::size_t> axes;
  std::vector<double> probs;
  parse_fields(j, axes, probs);
  return JointTable(std::move(axes), std::move(probs));
}

JointTable load_joint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return joint_from_json(j);
}

}  // namespace coordlab
