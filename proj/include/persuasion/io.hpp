#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "persuasion/error.hpp"
#include "persuasion/model.hpp"

namespace persuasion::io {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::kParseError, where + ": expected a JSON object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::kParseError, where + ": missing field '" + key + "'");
  return *it;
}

inline std::vector<std::string> string_list(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(ErrorCode::kParseError, "field '" + path + "': expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string())
      fail(ErrorCode::kParseError, "field '" + path + "[" + std::to_string(i) + "]': expected a string");
    out.push_back(j[i].get<std::string>());
  }
  return out;
}

inline Vector number_list(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(ErrorCode::kParseError, "field '" + path + "': expected an array of numbers");
  Vector out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      fail(ErrorCode::kParseError, "field '" + path + "[" + std::to_string(i) + "]': expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

inline Matrix number_matrix(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(ErrorCode::kParseError, "field '" + path + "': expected an array of arrays");
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(number_list(j[i], path + "[" + std::to_string(i) + "]"));
  for (std::size_t i = 1; i < rows.size(); ++i)
    require(rows[i].size() == rows[0].size(), ErrorCode::kDimensionMismatch,
            "field '" + path + "': ragged rows");
  return Matrix::from_rows(rows);
}

inline Json matrix_json(const Matrix& m) {
  Json out = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(Vector(m.row(r).begin(), m.row(r).end()));
  return out;
}

}  // namespace detail

inline Json parse(const std::string& text, const std::string& source = "<input>") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParseError, source + ": " + detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json load_json(const std::string& path) { return parse(read_file(path), path); }

inline PersuasionInstance instance_from_json(const Json& j) {
  const std::string where = "instance";
  auto states = detail::string_list(detail::field(j, "states", where), "states");
  auto actions = detail::string_list(detail::field(j, "actions", where), "actions");
  auto prior = detail::number_list(detail::field(j, "prior", where), "prior");
  auto u = detail::number_matrix(detail::field(j, "sender_utility", where), "sender_utility");
  auto v = detail::number_matrix(detail::field(j, "receiver_utility", where), "receiver_utility");
  return PersuasionInstance(std::move(states), std::move(actions), std::move(prior), std::move(u), std::move(v));
}

inline Json to_json(const PersuasionInstance& inst) {
  Json j;
  j["states"] = inst.states();
  j["actions"] = inst.actions();
  j["prior"] = inst.prior();
  j["sender_utility"] = detail::matrix_json(inst.sender_utility());
  j["receiver_utility"] = detail::matrix_json(inst.receiver_utility());
  return j;
}

inline SignalingScheme scheme_from_json(const Json& j) {
  const std::string where = "scheme";
  auto signals = detail::string_list(detail::field(j, "signals", where), "signals");
  auto conditional = detail::number_matrix(detail::field(j, "conditional", where), "conditional");
  return SignalingScheme(std::move(signals), std::move(conditional));
}

inline Json to_json(const SignalingScheme& scheme) {
  Json j;
  j["signals"] = scheme.signals();
  j["conditional"] = detail::matrix_json(scheme.conditional());
  return j;
}

inline Json to_json(const ReceiverStrategy& strategy) { return detail::matrix_json(strategy.action_distribution()); }

inline PersuasionInstance load_instance(const std::string& path) {
  try {
    return instance_from_json(load_json(path));
  } catch (const Error& e) {
    if (e.detail().find(path) == std::string::npos) fail(e.code(), path + ": " + e.detail());
    throw;
  }
}

inline SignalingScheme load_scheme(const std::string& path) {
  try {
    return scheme_from_json(load_json(path));
  } catch (const Error& e) {
    if (e.detail().find(path) == std::string::npos) fail(e.code(), path + ": " + e.detail());
    throw;
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  out << text;
}

inline void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace persuasion::io
