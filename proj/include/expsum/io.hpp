#pragma once

// JSON and CSV encodings of points, candidate frames, reports, and solver
// results. Machine formats carry full double precision and never depend on
// the process locale.

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "expsum/analysis.hpp"
#include "expsum/errors.hpp"
#include "expsum/geometry.hpp"
#include "expsum/solver.hpp"
#include "expsum/variety.hpp"

namespace expsum {

using Json = nlohmann::json;

/// 17 significant digits, '.' decimal separator.
inline std::string format_full(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// 6 significant digits for human-readable output.
inline std::string format_short(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json point_to_json(const Point& p) {
  Json z = Json::array();
  for (const Complex& w : p) z.push_back(complex_to_json(w));
  return {{"n", p.n()}, {"z", std::move(z)}};
}

namespace detail {

[[noreturn]] inline void parse_error(const std::string& message) {
  throw Error(ErrorKind::Parse, message);
}

inline double number_field(const Json& value, const std::string& where) {
  if (!value.is_number()) parse_error(where + " must be a number");
  return value.get<double>();
}

inline Complex complex_field(const Json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 2) parse_error(where + " must be [re, im]");
  return {number_field(value[0], where + "[0]"), number_field(value[1], where + "[1]")};
}

}  // namespace detail

/// Parses {"n": <int>, "z": [[re, im], ...]}; errors name the offending field.
inline Point point_from_json(const Json& j) {
  if (!j.is_object()) detail::parse_error("point must be a JSON object");
  if (!j.contains("n")) detail::parse_error("missing field 'n'");
  if (!j.contains("z")) detail::parse_error("missing field 'z'");
  const Json& jn = j.at("n");
  if (!jn.is_number_integer() || jn.get<long long>() < 0) {
    detail::parse_error("field 'n' must be a nonnegative integer");
  }
  const auto n = jn.get<std::size_t>();
  const Json& jz = j.at("z");
  if (!jz.is_array()) detail::parse_error("field 'z' must be an array");
  if (jz.size() != n) {
    detail::parse_error("z length " + std::to_string(jz.size()) + " does not match n=" +
                        std::to_string(n));
  }
  std::vector<Complex> z;
  z.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    z.push_back(detail::complex_field(jz[i], "z[" + std::to_string(i) + "]"));
  }
  try {
    return Point(std::move(z));
  } catch (const Error& e) {
    detail::parse_error(std::string("field 'z': ") + e.what());
  }
}

/// A file holds either one point object or an array of them.
inline std::vector<Point> points_from_json(const Json& j) {
  std::vector<Point> points;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      try {
        points.push_back(point_from_json(j[i]));
      } catch (const Error& e) {
        detail::parse_error("point " + std::to_string(i) + ": " + e.what());
      }
    }
  } else {
    points.push_back(point_from_json(j));
  }
  return points;
}

inline Json parse_json(std::istream& in) {
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    detail::parse_error(std::string("malformed JSON: ") + e.what());
  }
}

inline Json frame_to_json(const CandidateFrame& frame) {
  Json b = Json::array();
  for (const Complex& w : frame.b) b.push_back(complex_to_json(w));
  return {{"n", frame.n},
          {"k", complex_to_json(frame.k)},
          {"b", std::move(b)},
          {"dist2", frame.dist2_closed_form}};
}

inline Json hypotheses_to_json(const HypothesisReport& h) {
  Json conditions = Json::object();
  for (int i = 1; i <= 6; ++i) {
    conditions[std::to_string(i)] = {{"holds", h[i].holds}, {"margin", h[i].margin}};
  }
  return {{"tol", h.tol}, {"all_hold", h.all_hold()}, {"conditions", std::move(conditions)}};
}

inline Json lemma_to_json(const LemmaReport& r) {
  Json j;
  j["lemma"] = r.lemma;
  if (r.complex_valued) {
    j["lhs"] = complex_to_json(r.lhs);
    j["rhs"] = complex_to_json(r.rhs);
  } else {
    j["lhs"] = r.lhs.real();
    j["rhs"] = r.rhs.real();
  }
  j["margin"] = r.margin;
  j["holds"] = r.holds;
  j["note"] = r.note;
  if (!r.parts.empty()) {
    Json parts = Json::array();
    for (const SubCheck& part : r.parts) {
      parts.push_back({{"name", part.name},
                       {"lhs", part.lhs},
                       {"rhs", part.rhs},
                       {"margin", part.margin},
                       {"holds", part.holds},
                       {"counted", part.counted}});
    }
    j["parts"] = std::move(parts);
  }
  if (!r.values.empty()) {
    Json values = Json::object();
    for (const auto& [name, v] : r.values) values[name] = v;
    j["values"] = std::move(values);
  }
  return j;
}

inline Json result_to_json(const SolveResult& r) {
  return {{"start_index", r.start_index},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"dist2", r.dist2},
          {"feas_residual", r.feas_residual},
          {"proj_grad_norm", r.proj_grad_norm},
          {"point", point_to_json(r.point)}};
}

inline SolveResult result_from_json(const Json& j) {
  if (!j.is_object()) detail::parse_error("result must be a JSON object");
  for (const char* key : {"start_index", "converged", "iterations", "dist2", "feas_residual",
                          "proj_grad_norm", "point"}) {
    if (!j.contains(key)) detail::parse_error(std::string("missing field '") + key + "'");
  }
  SolveResult r;
  r.start_index = j.at("start_index").get<std::size_t>();
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<std::size_t>();
  r.dist2 = detail::number_field(j.at("dist2"), "dist2");
  r.feas_residual = detail::number_field(j.at("feas_residual"), "feas_residual");
  r.proj_grad_norm = detail::number_field(j.at("proj_grad_norm"), "proj_grad_norm");
  r.point = point_from_json(j.at("point"));
  return r;
}

inline Json results_to_json(const std::vector<SolveResult>& results) {
  Json out = Json::array();
  for (const SolveResult& r : results) out.push_back(result_to_json(r));
  return out;
}

inline const char* kResultCsvHeader =
    "start_index,converged,iterations,dist2,feas_residual,proj_grad_norm";

inline void write_results_csv(std::ostream& out, const std::vector<SolveResult>& results) {
  out << kResultCsvHeader << '\n';
  for (const SolveResult& r : results) {
    out << r.start_index << ',' << (r.converged ? "true" : "false") << ',' << r.iterations << ','
        << format_full(r.dist2) << ',' << format_full(r.feas_residual) << ','
        << format_full(r.proj_grad_norm) << '\n';
  }
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline const char* kLemmaCsvHeader = "point,lemma,lhs_re,lhs_im,rhs_re,rhs_im,margin,holds,note";

inline void write_lemma_csv_row(std::ostream& out, std::size_t point_index, const LemmaReport& r) {
  out << point_index << ',' << r.lemma << ',' << format_full(r.lhs.real()) << ','
      << format_full(r.lhs.imag()) << ',' << format_full(r.rhs.real()) << ','
      << format_full(r.rhs.imag()) << ',' << format_full(r.margin) << ','
      << (r.holds ? "true" : "false") << ',' << csv_quote(r.note) << '\n';
}

}  // namespace expsum
