#pragma once

#include <chrono>
#include <cmath>
#include <compare>

#include "pcraft/error.hpp"

namespace pcraft {

// One year is 8766 h (365.25 days), so that three nines is 8.77 h of downtime.
inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kSecondsPerDay = 24.0 * kSecondsPerHour;
inline constexpr double kHoursPerYear = 8766.0;
inline constexpr double kSecondsPerYear = kHoursPerYear * kSecondsPerHour;
inline constexpr double kSecondsPerMonth = kSecondsPerYear / 12.0;

using Seconds = std::chrono::duration<double>;
using Hours = std::chrono::duration<double, std::ratio<3600>>;
using Years = std::chrono::duration<double, std::ratio<31557600>>;
using Months = std::chrono::duration<double, std::ratio<2629800>>;
using Days = std::chrono::duration<double, std::ratio<86400>>;

inline constexpr Seconds one_year{kSecondsPerYear};
inline constexpr Seconds one_month{kSecondsPerMonth};

/// Event rate of an exponential process, stored in events per second.
class Rate {
 public:
  constexpr Rate() = default;

  static constexpr Rate per_second(double v) { return Rate{v}; }
  static constexpr Rate per_hour(double v) { return Rate{v / kSecondsPerHour}; }
  static constexpr Rate per_day(double v) { return Rate{v / kSecondsPerDay}; }
  static constexpr Rate per_month(double v) { return Rate{v / kSecondsPerMonth}; }
  static constexpr Rate per_year(double v) { return Rate{v / kSecondsPerYear}; }

  /// Rate whose mean inter-event time is `mean` (1 / mean).
  static Rate every(Seconds mean) {
    if (!(mean.count() > 0.0) || !std::isfinite(mean.count()))
      throw InvalidArgument("mean time must be positive and finite");
    return Rate{1.0 / mean.count()};
  }

  constexpr double per_second() const { return value_; }
  constexpr double in_per_year() const { return value_ * kSecondsPerYear; }
  constexpr double in_per_hour() const { return value_ * kSecondsPerHour; }
  constexpr double in_per_month() const { return value_ * kSecondsPerMonth; }
  constexpr double in_per_day() const { return value_ * kSecondsPerDay; }

  Seconds mean_time() const { return Seconds{1.0 / value_}; }

  bool is_positive() const { return value_ > 0.0 && std::isfinite(value_); }

  friend constexpr Rate operator*(Rate r, double k) { return Rate{r.value_ * k}; }
  friend constexpr Rate operator*(double k, Rate r) { return Rate{r.value_ * k}; }
  friend constexpr Rate operator+(Rate a, Rate b) { return Rate{a.value_ + b.value_}; }
  friend constexpr auto operator<=>(Rate, Rate) = default;

 private:
  constexpr explicit Rate(double v) : value_(v) {}
  double value_ = 0.0;
};

}  // namespace pcraft
