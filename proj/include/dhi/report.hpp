#pragma once

// CSV and JSON serialization of survey, schedule and classification
// records. Reals are written with 15 significant digits; absent values are
// empty CSV cells and JSON nulls.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dhi/error.hpp"
#include "dhi/survey.hpp"
#include "json.hpp"

namespace dhi {

enum class Format { Csv, Json };

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline constexpr const char* kSurveyCsvHeader =
    "prime,class,family,order,mode,n,replicates,statistic,p_value,proportion_lower,distance_to_center,"
    "relative_distance,sample_seed,null_seed";
inline constexpr const char* kTable1CsvHeader = "n,sample_entropy,proportion_lower,distance_to_center,relative_distance";
inline constexpr const char* kClassifyCsvHeader = "prime,class";

namespace detail {

using ordered_json = nlohmann::ordered_json;

// Rounded through the 15-digit text form so JSON and CSV carry the same value.
inline ordered_json json_real(double v) { return std::strtod(format_real(v).c_str(), nullptr); }

template <typename T>
ordered_json json_optional(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) {
    return json_real(*v);
  } else {
    return *v;
  }
}

inline std::string csv_cell(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }
inline std::string csv_cell(const std::optional<std::uint64_t>& v) { return v ? std::to_string(*v) : std::string(); }

inline std::vector<SurveyRecord> sorted(std::span<const SurveyRecord> records) {
  std::vector<SurveyRecord> out(records.begin(), records.end());
  std::stable_sort(out.begin(), out.end(), survey_record_less);
  return out;
}

inline std::vector<Table1Record> sorted(std::span<const Table1Record> records) {
  std::vector<Table1Record> out(records.begin(), records.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.n < r.n; });
  return out;
}

inline std::vector<PrimeClass> sorted(std::span<const PrimeClass> records) {
  std::vector<PrimeClass> out(records.begin(), records.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.prime < r.prime; });
  return out;
}

}  // namespace detail

inline std::string csv_row(const SurveyRecord& r) {
  std::ostringstream os;
  os << r.prime << ',' << to_string(r.kind) << ',' << to_string(r.family) << ',' << r.order << ','
     << to_string(r.mode) << ',' << r.n << ',' << detail::csv_cell(r.replicates) << ',' << format_real(r.statistic)
     << ',' << detail::csv_cell(r.p_value) << ',' << detail::csv_cell(r.proportion_lower) << ','
     << detail::csv_cell(r.distance_to_center) << ',' << detail::csv_cell(r.relative_distance) << ','
     << detail::csv_cell(r.sample_seed) << ',' << detail::csv_cell(r.null_seed);
  return os.str();
}

inline std::string csv_row(const Table1Record& r) {
  return std::to_string(r.n) + ',' + format_real(r.sample_entropy) + ',' + format_real(r.proportion_lower) + ',' +
         format_real(r.distance_to_center) + ',' + format_real(r.relative_distance);
}

inline std::string csv_row(const PrimeClass& r) { return std::to_string(r.prime) + ',' + to_string(r.kind); }

inline detail::ordered_json to_json(const SurveyRecord& r) {
  detail::ordered_json j;
  j["prime"] = r.prime;
  j["class"] = to_string(r.kind);
  j["family"] = to_string(r.family);
  j["order"] = r.order;
  j["mode"] = to_string(r.mode);
  j["n"] = r.n;
  j["replicates"] = detail::json_optional(r.replicates);
  j["statistic"] = detail::json_real(r.statistic);
  j["p_value"] = detail::json_optional(r.p_value);
  j["proportion_lower"] = detail::json_optional(r.proportion_lower);
  j["distance_to_center"] = detail::json_optional(r.distance_to_center);
  j["relative_distance"] = detail::json_optional(r.relative_distance);
  j["sample_seed"] = detail::json_optional(r.sample_seed);
  j["null_seed"] = detail::json_optional(r.null_seed);
  return j;
}

inline detail::ordered_json to_json(const Table1Record& r) {
  detail::ordered_json j;
  j["n"] = r.n;
  j["sample_entropy"] = detail::json_real(r.sample_entropy);
  j["proportion_lower"] = detail::json_real(r.proportion_lower);
  j["distance_to_center"] = detail::json_real(r.distance_to_center);
  j["relative_distance"] = detail::json_real(r.relative_distance);
  return j;
}

inline detail::ordered_json to_json(const PrimeClass& r) {
  detail::ordered_json j;
  j["prime"] = r.prime;
  j["class"] = to_string(r.kind);
  return j;
}

inline const char* csv_header(const SurveyRecord*) { return kSurveyCsvHeader; }
inline const char* csv_header(const Table1Record*) { return kTable1CsvHeader; }
inline const char* csv_header(const PrimeClass*) { return kClassifyCsvHeader; }

/// Writes records in canonical row order.
template <typename Record>
void write_report(std::ostream& os, std::span<const Record> records, Format format) {
  const auto rows = detail::sorted(records);
  if (format == Format::Csv) {
    os << csv_header(static_cast<const Record*>(nullptr)) << '\n';
    for (const auto& r : rows) os << csv_row(r) << '\n';
  } else {
    auto array = detail::ordered_json::array();
    for (const auto& r : rows) array.push_back(to_json(r));
    os << array.dump(2) << '\n';
  }
}

template <typename Record>
std::string render_report(std::span<const Record> records, Format format) {
  std::ostringstream os;
  write_report(os, records, format);
  return os.str();
}

/// Writes `contents` to `path` through a temporary sibling file that is
/// renamed into place. On failure nothing is left behind at either path.
inline void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".partial";
  auto fail = [&](const std::string& cause) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw Error(ErrorKind::Io, path.string() + ": " + cause);
  };
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(std::strerror(errno));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) fail("write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ec.message());
}

template <typename Record>
void emit_report(std::span<const Record> records, Format format, const std::filesystem::path& path) {
  write_file_atomically(path, render_report(records, format));
}

}  // namespace dhi
