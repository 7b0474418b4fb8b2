#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmfem/model.hpp"

namespace nmfem {

inline constexpr int kHoursPerWeek = 7 * 24;

// Local wall-clock time with minute precision.
struct CivilTime {
  int year = 0;
  int month = 0;
  int day = 0;
  int hour = 0;
  int minute = 0;

  // Days since 1970-01-01.
  std::int64_t day_number() const;
  // 0 = Monday ... 6 = Sunday.
  int weekday() const;
  int minute_of_day() const { return hour * 60 + minute; }
};

// Parses "YYYY-MM-DDTHH:MM[:SS[.fff]]" (a space may replace the T).
std::optional<CivilTime> parse_timestamp(std::string_view text);

// Index in 0..167 of the (weekday, hour) bin; the hour is truncated.
int weekly_bin(const CivilTime& t);

// "Mon-00" ... "Sun-23".
std::vector<std::string> weekly_bin_labels();

struct ValidationEvent {
  std::string card_id;
  CivilTime timestamp;
  std::string station_id;
};

struct ProfileBuildConfig {
  int min_active_days = 4;
  double home_station_threshold = 0.5;  // share of active days
  int first_boarding_cutoff_hour = 4;   // earlier events do not count as first boarding
  double bad_row_budget = 0.01;         // tolerated share of malformed rows

  void validate() const;
};

struct ProfileSet {
  CountDataset data;                       // one row per kept card, 168 columns
  std::vector<std::string> card_index;     // sorted card ids, aligned with rows
  std::vector<std::string> home_stations;  // aligned with rows
  std::size_t cards_seen = 0;
  std::size_t events_used = 0;
};

// Accumulates events card by card; the result does not depend on event order.
class ProfileBuilder {
 public:
  explicit ProfileBuilder(ProfileBuildConfig cfg);

  void add(const ValidationEvent& event);
  std::size_t events() const { return events_; }
  // Applies the regular-holder filter. Throws EmptyInputError when no event
  // was added or no card survives.
  ProfileSet finish() const;

 private:
  struct FirstBoarding {
    int minute_of_day;
    std::string station;
  };
  struct CardState {
    std::array<std::int64_t, kHoursPerWeek> bins{};
    // day number -> earliest boarding at or after the cutoff, if any
    std::map<std::int64_t, std::optional<FirstBoarding>> days;
  };

  ProfileBuildConfig cfg_;
  std::map<std::string, CardState> cards_;
  std::size_t events_ = 0;
};

ProfileSet build_profiles(const std::vector<ValidationEvent>& events,
                          const ProfileBuildConfig& cfg);

struct EventParseResult {
  std::vector<ValidationEvent> events;
  std::size_t data_rows = 0;
  std::vector<std::size_t> bad_lines;  // 1-based file line numbers
};

// Reads "card_id,timestamp,station_id" CSV; malformed rows are recorded,
// not fatal.
EventParseResult parse_events(std::istream& in);

// Reads a plain or gzip-compressed event file, enforces the bad-row budget
// and builds the profiles.
ProfileSet ingest_file(const std::string& path, const ProfileBuildConfig& cfg);

}  // namespace nmfem
