#pragma once

// JSON schema for Pmf/Channel/JointTable:
//   {"axes": [sizes...], "probs": [row-major flat array]}
// Row-major with the last axis fastest is normative for all file I/O.
// A Pmf has one axis; a Channel has axes [in_size, out_size].

#include <string>

#include <json.hpp>

#include "coordlab/prob.hpp"

namespace coordlab {

nlohmann::json to_json(const Pmf& p);
nlohmann::json to_json(const Channel& c);
nlohmann::json to_json(const JointTable& t);

Pmf pmf_from_json(const nlohmann::json& j);
Channel channel_from_json(const nlohmann::json& j);
JointTable joint_from_json(const nlohmann::json& j);

JointTable load_joint(const std::string& path);

}  // namespace coordlab
