#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hedge {

using Date = std::chrono::sys_days;
using Instant = std::chrono::sys_seconds;

enum class DataType { load, pv, ev };
enum class DayType { weekday, weekend };

inline constexpr std::array<DataType, 3> kDataTypes{DataType::load, DataType::pv, DataType::ev};
inline constexpr std::array<DayType, 2> kDayTypes{DayType::weekday, DayType::weekend};

std::string_view to_string(DataType type);
std::string_view to_string(DayType type);
DataType parse_data_type(std::string_view text);
DayType parse_day_type(std::string_view text);

/// Saturday and Sunday are weekend days.
DayType day_type_of(Date date);
unsigned month_of(Date date);

/// (d_t, d_{t+1}) key of a day-to-day transition.
struct DayTransition {
  DayType from = DayType::weekday;
  DayType to = DayType::weekday;

  auto operator<=>(const DayTransition&) const = default;
};

inline constexpr std::array<DayTransition, 4> kDayTransitions{{
    {DayType::weekday, DayType::weekday},
    {DayType::weekday, DayType::weekend},
    {DayType::weekend, DayType::weekday},
    {DayType::weekend, DayType::weekend},
}};

/// Steps per day for a resolution; rejects resolutions that do not divide 1440.
int steps_per_day(int resolution_minutes);

// Civil time in strict RFC 3339 UTC form: YYYY-MM-DDTHH:MM:SSZ and YYYY-MM-DD.
std::optional<Instant> parse_instant(std::string_view text);
std::optional<Date> parse_date(std::string_view text);
std::string format_instant(Instant t);
std::string format_date(Date d);

/// One home-day at fixed resolution.
struct DayProfile {
  std::string home_id;
  Date date{};
  DayType day_type = DayType::weekday;
  DataType data_type = DataType::load;
  std::vector<double> values;
  std::vector<std::uint8_t> availability;  // ev only
  std::vector<std::size_t> gaps;           // ascending step indices

  [[nodiscard]] int steps() const { return static_cast<int>(values.size()); }
};

// Errors ------------------------------------------------------------------

/// A caller-supplied value violates a precondition; `field` names it.
class InvalidArgument : public std::invalid_argument {
 public:
  InvalidArgument(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Input data cannot be used (unreadable, malformed beyond tolerance).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A required artifact (weights, matrix, model) is absent for a key.
class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(std::string key)
      : std::runtime_error("missing artifact: " + key), key_(std::move(key)) {}
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace hedge
