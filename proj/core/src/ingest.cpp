#include "nmfem/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <sstream>
#include <utility>

#include <zlib.h>

#include "nmfem/errors.hpp"

namespace nmfem {
namespace {

constexpr std::array<const char*, 7> kDayNames = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::chrono::year_month_day to_ymd(const CivilTime& t) {
  return std::chrono::year{t.year} / std::chrono::month{static_cast<unsigned>(t.month)} /
         std::chrono::day{static_cast<unsigned>(t.day)};
}

// Reads a whole file, transparently inflating gzip input.
std::string read_maybe_gzip(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw FormatError("cannot open '" + path + "'");
  std::string out;
  std::array<char, 1 << 16> buf{};
  for (;;) {
    const int got = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    if (got < 0) {
      int code = 0;
      const std::string msg = gzerror(f, &code);
      gzclose(f);
      throw FormatError("error reading '" + path + "': " + msg);
    }
    if (got == 0) break;
    out.append(buf.data(), static_cast<std::size_t>(got));
  }
  gzclose(f);
  return out;
}

}  // namespace

std::int64_t CivilTime::day_number() const {
  return std::chrono::sys_days{to_ymd(*this)}.time_since_epoch().count();
}

int CivilTime::weekday() const {
  return static_cast<int>(std::chrono::weekday{std::chrono::sys_days{to_ymd(*this)}}.iso_encoding()) - 1;
}

std::optional<CivilTime> parse_timestamp(std::string_view text) {
  text = trim(text);
  // YYYY-MM-DDTHH:MM is the shortest accepted form.
  if (text.size() < 16 || text[4] != '-' || text[7] != '-' ||
      (text[10] != 'T' && text[10] != ' ') || text[13] != ':') {
    return std::nullopt;
  }
  CivilTime t;
  if (!parse_int(text.substr(0, 4), t.year) || !parse_int(text.substr(5, 2), t.month) ||
      !parse_int(text.substr(8, 2), t.day) || !parse_int(text.substr(11, 2), t.hour) ||
      !parse_int(text.substr(14, 2), t.minute)) {
    return std::nullopt;
  }
  if (text.size() > 16) {
    int seconds = 0;
    if (text[16] != ':' || text.size() < 19 || !parse_int(text.substr(17, 2), seconds) ||
        seconds < 0 || seconds > 60) {
      return std::nullopt;
    }
    if (text.size() > 19) {
      if (text[19] != '.' || text.size() == 20) return std::nullopt;
      for (char c : text.substr(20)) {
        if (c < '0' || c > '9') return std::nullopt;
      }
    }
  }
  if (t.hour < 0 || t.hour > 23 || t.minute < 0 || t.minute > 59 || t.month < 1 || t.day < 1) {
    return std::nullopt;
  }
  if (!to_ymd(t).ok()) return std::nullopt;
  return t;
}

int weekly_bin(const CivilTime& t) { return t.weekday() * 24 + t.hour; }

std::vector<std::string> weekly_bin_labels() {
  std::vector<std::string> labels;
  labels.reserve(kHoursPerWeek);
  for (const char* day : kDayNames) {
    for (int h = 0; h < 24; ++h) {
      labels.push_back(std::string(day) + (h < 10 ? "-0" : "-") + std::to_string(h));
    }
  }
  return labels;
}

void ProfileBuildConfig::validate() const {
  if (min_active_days < 1) throw InvalidArgument("min_active_days must be positive");
  if (!(home_station_threshold > 0.0) || home_station_threshold > 1.0) {
    throw InvalidArgument("home_station_threshold must lie in (0, 1]");
  }
  if (first_boarding_cutoff_hour < 0 || first_boarding_cutoff_hour > 23) {
    throw InvalidArgument("first_boarding_cutoff_hour must lie in 0..23");
  }
  if (!(bad_row_budget >= 0.0) || bad_row_budget > 1.0) {
    throw InvalidArgument("bad_row_budget must lie in [0, 1]");
  }
}

ProfileBuilder::ProfileBuilder(ProfileBuildConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void ProfileBuilder::add(const ValidationEvent& event) {
  if (event.card_id.empty()) throw InvalidArgument("event without card id");
  CardState& card = cards_[event.card_id];
  ++card.bins[static_cast<std::size_t>(weekly_bin(event.timestamp))];
  auto& first = card.days[event.timestamp.day_number()];
  if (event.timestamp.hour >= cfg_.first_boarding_cutoff_hour) {
    const int minute = event.timestamp.minute_of_day();
    // Same-minute boardings resolve to the smaller station id.
    if (!first || minute < first->minute_of_day ||
        (minute == first->minute_of_day && event.station_id < first->station)) {
      first = FirstBoarding{minute, event.station_id};
    }
  }
  ++events_;
}

ProfileSet ProfileBuilder::finish() const {
  if (events_ == 0) throw EmptyInputError("no events");

  std::vector<std::string> kept_cards, homes;
  std::vector<const CardState*> kept_states;
  std::size_t used = 0;
  for (const auto& [card_id, card] : cards_) {
    const auto active_days = static_cast<int>(card.days.size());
    if (active_days < cfg_.min_active_days) continue;

    std::map<std::string, int> votes;
    for (const auto& [day, first] : card.days) {
      if (first) ++votes[first->station];
    }
    // std::map iterates in station order, so the first maximum is the
    // lexicographically smallest modal station.
    const std::string* modal = nullptr;
    int modal_votes = 0;
    for (const auto& [station, v] : votes) {
      if (v > modal_votes) {
        modal = &station;
        modal_votes = v;
      }
    }
    if (modal == nullptr ||
        static_cast<double>(modal_votes) < cfg_.home_station_threshold * active_days) {
      continue;
    }
    kept_cards.push_back(card_id);
    homes.push_back(*modal);
    kept_states.push_back(&card);
  }
  if (kept_cards.empty()) throw EmptyInputError("no card passed the regular card holder filter");

  CountMatrix counts(static_cast<Eigen::Index>(kept_cards.size()), kHoursPerWeek);
  for (std::size_t i = 0; i < kept_states.size(); ++i) {
    for (int b = 0; b < kHoursPerWeek; ++b) {
      counts(static_cast<Eigen::Index>(i), b) = kept_states[i]->bins[static_cast<std::size_t>(b)];
      used += static_cast<std::size_t>(kept_states[i]->bins[static_cast<std::size_t>(b)]);
    }
  }
  ProfileSet out{CountDataset(std::move(counts), weekly_bin_labels(), kept_cards),
                 kept_cards, std::move(homes), cards_.size(), used};
  return out;
}

ProfileSet build_profiles(const std::vector<ValidationEvent>& events,
                          const ProfileBuildConfig& cfg) {
  ProfileBuilder builder(cfg);
  for (const auto& e : events) builder.add(e);
  return builder.finish();
}

EventParseResult parse_events(std::istream& in) {
  EventParseResult out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      const auto cols = split_commas(view);
      if (cols.size() != 3 || cols[0] != "card_id" || cols[1] != "timestamp" ||
          cols[2] != "station_id") {
        throw FormatError("expected header 'card_id,timestamp,station_id' on line " +
                          std::to_string(line_no));
      }
      continue;
    }
    ++out.data_rows;
    const auto cols = split_commas(view);
    std::optional<CivilTime> ts;
    if (cols.size() == 3 && !cols[0].empty() && !cols[2].empty()) ts = parse_timestamp(cols[1]);
    if (!ts) {
      out.bad_lines.push_back(line_no);
      continue;
    }
    out.events.push_back({std::string(cols[0]), *ts, std::string(cols[2])});
  }
  return out;
}

ProfileSet ingest_file(const std::string& path, const ProfileBuildConfig& cfg) {
  cfg.validate();
  std::istringstream in(read_maybe_gzip(path));
  const EventParseResult parsed = parse_events(in);
  if (parsed.data_rows == 0) throw EmptyInputError("no events in '" + path + "'");
  const double bad_share =
      static_cast<double>(parsed.bad_lines.size()) / static_cast<double>(parsed.data_rows);
  if (bad_share > cfg.bad_row_budget) {
    std::string lines;
    for (std::size_t i = 0; i < parsed.bad_lines.size() && i < 20; ++i) {
      lines += (i ? ", " : "") + std::to_string(parsed.bad_lines[i]);
    }
    if (parsed.bad_lines.size() > 20) lines += ", ...";
    throw FormatError(std::to_string(parsed.bad_lines.size()) + " malformed rows out of " +
                      std::to_string(parsed.data_rows) + " exceed the bad-row budget; lines: " +
                      lines);
  }
  return build_profiles(parsed.events, cfg);
}

}  // namespace nmfem
