#pragma once

#include <fstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "ngf/io.hpp"
#include "ngf/neural.hpp"
#include "ngf/types.hpp"

namespace ngf {

namespace detail {

inline OperatorKind parse_operator_kind(const std::string& s) {
  if (s == "adjacency") return OperatorKind::adjacency;
  if (s == "classical") return OperatorKind::classical;
  if (s == "neighborhood") return OperatorKind::neighborhood;
  throw ParseError("unknown operator kind: " + s);
}
inline CoeffMode parse_coeff_mode(const std::string& s) {
  if (s == "fixed") return CoeffMode::fixed;
  if (s == "learnable") return CoeffMode::learnable;
  throw ParseError("unknown coefficient mode: " + s);
}
inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "identity") return Activation::identity;
  throw ParseError("unknown activation: " + s);
}
inline OutputHead parse_head(const std::string& s) {
  if (s == "identity") return OutputHead::identity;
  if (s == "softmax") return OutputHead::softmax;
  throw ParseError("unknown output head: " + s);
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = r > 0 ? static_cast<Index>(rows.at(0).size()) : 0;
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != c) throw ParseError("ragged matrix in checkpoint");
    for (Index j = 0; j < c; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

}  // namespace detail

/// Model checkpoint: spec plus all parameters as versioned JSON. Doubles are
/// emitted with shortest-round-trip formatting, so a save/load cycle is
/// bit-exact.
inline void save_checkpoint(const NetworkSpec& spec, const NetworkState& state,
                            const std::string& path) {
  nlohmann::json j;
  j["format"] = "ngf-checkpoint";
  j["version"] = 1;
  j["spec"]["feature_dims"] = spec.feature_dims;
  j["spec"]["hidden"] = to_string(spec.hidden);
  j["spec"]["head"] = to_string(spec.head);
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerSpec& l : spec.layers) {
    layers.push_back({{"op", to_string(l.op)},
                      {"coeff_mode", to_string(l.coeff_mode)},
                      {"taps", l.taps}});
  }
  j["spec"]["layers"] = std::move(layers);

  nlohmann::json theta = nlohmann::json::array();
  for (const Matrix& m : state.theta) theta.push_back(detail::matrix_to_json(m));
  j["theta"] = std::move(theta);

  nlohmann::json coeffs = nlohmann::json::array();
  for (const Vector& h : state.coeffs) {
    nlohmann::json arr = nlohmann::json::array();
    for (Index i = 0; i < h.size(); ++i) arr.push_back(h(i));
    coeffs.push_back(std::move(arr));
  }
  j["coeffs"] = std::move(coeffs);

  atomic_write(path, [&](std::ostream& out) { out << j.dump(2) << "\n"; });
}

inline std::pair<NetworkSpec, NetworkState> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid checkpoint JSON: " + std::string(e.what()));
  }
  if (j.value("format", "") != "ngf-checkpoint") throw ParseError("not an ngf checkpoint");
  if (j.value("version", 0) != 1) {
    throw ParseError("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  }

  NetworkSpec spec;
  spec.feature_dims = j.at("spec").at("feature_dims").get<std::vector<Index>>();
  spec.hidden = detail::parse_activation(j.at("spec").at("hidden").get<std::string>());
  spec.head = detail::parse_head(j.at("spec").at("head").get<std::string>());
  for (const auto& l : j.at("spec").at("layers")) {
    LayerSpec ls;
    ls.op = detail::parse_operator_kind(l.at("op").get<std::string>());
    ls.coeff_mode = detail::parse_coeff_mode(l.at("coeff_mode").get<std::string>());
    ls.taps = l.at("taps").get<Index>();
    spec.layers.push_back(ls);
  }
  spec.validate();

  NetworkState state;
  for (const auto& m : j.at("theta")) state.theta.push_back(detail::matrix_from_json(m));
  for (const auto& arr : j.at("coeffs")) {
    Vector h(static_cast<Index>(arr.size()));
    for (Index i = 0; i < h.size(); ++i) h(i) = arr.at(static_cast<std::size_t>(i)).get<double>();
    state.coeffs.push_back(std::move(h));
  }
  if (state.theta.size() != spec.layers.size() || state.coeffs.size() != spec.layers.size()) {
    throw ParseError("checkpoint parameter count does not match spec");
  }
  state.h_mat.assign(spec.layers.size(), Matrix());
  return {std::move(spec), std::move(state)};
}

}  // namespace ngf
