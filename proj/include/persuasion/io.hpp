#pragma once

// Instance file loading. Full form:
//   {"states": [...], "actions": [...], "prior": [...],
//    "u_sender": [[row per action]], "u_receiver": [[row per action]]}
// Binary shorthand:
//   {"binary": {"mu0": 0.25, "q_hat": 0.60}}

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "persuasion/core.hpp"

namespace persuasion::io {

inline Instance instance_from_json(const nlohmann::json& j) {
  if (j.contains("binary")) {
    const auto& b = j.at("binary");
    return binary_as_general(
        BinaryInstance(b.at("mu0").get<double>(), b.at("q_hat").get<double>()));
  }
  std::vector<std::string> states, actions;
  if (j.contains("states"))
    states = j.at("states").get<std::vector<std::string>>();
  if (j.contains("actions"))
    actions = j.at("actions").get<std::vector<std::string>>();
  const Vec prior = j.at("prior").get<Vec>();
  const Mat us = j.at("u_sender").get<Mat>();
  const Mat ur = j.at("u_receiver").get<Mat>();
  if (states.empty())
    for (std::size_t w = 0; w < prior.size(); ++w)
      states.push_back("omega" + std::to_string(w));
  if (actions.empty())
    for (std::size_t a = 0; a < us.size(); ++a)
      actions.push_back("a" + std::to_string(a));
  return validate_instance(std::move(states), std::move(actions), prior, us, ur);
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open instance file: " + path);
  nlohmann::json j;
  in >> j;
  return instance_from_json(j);
}

inline nlohmann::json scheme_to_json(const Scheme& s,
                                     const Instance& inst) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& a : s.atoms) {
    out.push_back({{"weight", a.weight},
                   {"posterior", a.posterior.probs},
                   {"rec_action", inst.actions[a.rec_action]}});
  }
  return out;
}

}  // namespace persuasion::io
