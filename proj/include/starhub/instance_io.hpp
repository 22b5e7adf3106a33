#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "starhub/error.hpp"
#include "starhub/instance.hpp"

namespace starhub {

namespace detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k)
    if (text[k] == '\n') ++line;
  return line;
}

inline const nlohmann::json& require(const nlohmann::json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw Error(ErrorKind::parse_error, std::string("missing field '") + key + "'");
  return *it;
}

inline std::size_t read_count(const nlohmann::json& doc, const char* key) {
  const auto& v = require(doc, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
    throw Error(ErrorKind::parse_error, std::string("field '") + key + "' must be a positive integer");
  return static_cast<std::size_t>(v.get<std::int64_t>());
}

inline Matrix<double> read_matrix(const nlohmann::json& doc, const char* key, std::size_t rows,
                                  std::size_t cols) {
  const auto& v = require(doc, key);
  const std::string field(key);
  if (!v.is_array() || v.size() != rows)
    throw Error(ErrorKind::parse_error, "field '" + field + "' must be an array of " + std::to_string(rows) + " rows");
  Matrix<double> m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = v[r];
    if (!row.is_array() || row.size() != cols)
      throw Error(ErrorKind::parse_error, "field '" + field + "' row " + std::to_string(r) + " must have " +
                                              std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number())
        throw Error(ErrorKind::parse_error,
                    "field '" + field + "'[" + std::to_string(r) + "][" + std::to_string(c) + "] is not a number");
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

}  // namespace detail

// Parses {"h":int,"n":int,"ell":[int],"c":[[real]],"w":[[real]]}.
// Unsorted ell is accepted; the instance is canonicalized and remembers the
// file's hub order.
inline Instance read_instance(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse_error,
                "line " + std::to_string(detail::line_of(text, e.byte > 0 ? e.byte - 1 : 0)) + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::parse_error, "instance must be a JSON object");

  const std::size_t h = detail::read_count(doc, "h");
  const std::size_t n = detail::read_count(doc, "n");

  const auto& ell_json = detail::require(doc, "ell");
  if (!ell_json.is_array() || ell_json.size() != h)
    throw Error(ErrorKind::parse_error, "field 'ell' must be an array of h=" + std::to_string(h) + " integers");
  std::vector<std::int64_t> ell(h);
  for (std::size_t i = 0; i < h; ++i) {
    const auto& v = ell_json[i];
    if (v.is_number_integer()) {
      ell[i] = v.get<std::int64_t>();
    } else if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) {
      ell[i] = static_cast<std::int64_t>(v.get<double>());
    } else {
      throw Error(ErrorKind::parse_error, "field 'ell'[" + std::to_string(i) + "] must be an integer");
    }
  }
  auto c = detail::read_matrix(doc, "c", n, h);
  auto w = detail::read_matrix(doc, "w", n, n);
  return Instance::make(std::move(ell), std::move(c), std::move(w));
}

// Emits hubs in external order, keys in schema order, reals with 17
// significant digits.
inline std::string write_instance(const Instance& inst) {
  const std::size_t h = inst.hub_count();
  const std::size_t n = inst.nonhub_count();
  std::vector<std::size_t> slot(h);  // external position -> canonical index
  for (std::size_t k = 0; k < h; ++k) slot[inst.hub_ids()[k]] = k;

  std::ostringstream out;
  out << "{\"h\":" << h << ",\"n\":" << n << ",\"ell\":[";
  for (std::size_t e = 0; e < h; ++e) out << (e ? "," : "") << inst.spoke_length(slot[e]);
  out << "],\"c\":[";
  for (std::size_t p = 0; p < n; ++p) {
    out << (p ? "," : "") << '[';
    for (std::size_t e = 0; e < h; ++e) out << (e ? "," : "") << detail::format_real(inst.collection()(p, slot[e]));
    out << ']';
  }
  out << "],\"w\":[";
  for (std::size_t p = 0; p < n; ++p) {
    out << (p ? "," : "") << '[';
    for (std::size_t q = 0; q < n; ++q) out << (q ? "," : "") << detail::format_real(inst.flows()(p, q));
    out << ']';
  }
  out << "]}\n";
  return out.str();
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::invalid_argument, "cannot open instance file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return read_instance(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

}  // namespace starhub
