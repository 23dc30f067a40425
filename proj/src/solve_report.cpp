#include "mpmi/solve_report.hpp"

#include <array>
#include <string>
#include <utility>

#include "mpmi/errors.hpp"

namespace mpmi {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 5> kNames{{
    {Method::mpmi, "mpmi"},
    {Method::mpm, "mpm"},
    {Method::tsvd, "tsvd"},
    {Method::tr, "tr"},
    {Method::morozov, "morozov"},
}};

}  // namespace

std::string_view to_string(Method m) noexcept {
  for (const auto& [method, name] : kNames) {
    if (method == m) return name;
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const auto& [method, n] : kNames) {
    if (n == name) return method;
  }
  throw InputError("unknown method '" + std::string(name) + "'");
}

std::string_view parameter_name(Method m) noexcept {
  switch (m) {
    case Method::mpmi: return "h";
    case Method::mpm: return "lambda";
    case Method::tsvd: return "rank";
    case Method::tr:
    case Method::morozov: return "alpha";
  }
  return "parameter";
}

}  // namespace mpmi
