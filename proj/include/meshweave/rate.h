#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace meshweave {

// Transmission rate stored as an integer number of kbit/s so that ledger sums
// are exact. Every configured value is rounded to the nearest kbit/s.
class Rate {
 public:
  constexpr Rate() = default;

  static constexpr Rate FromKbps(std::int64_t kbps) { return Rate(kbps); }
  static Rate FromMbps(double mbps) {
    return Rate(static_cast<std::int64_t>(std::llround(mbps * 1000.0)));
  }
  static constexpr Rate Zero() { return Rate(0); }

  constexpr std::int64_t kbps() const { return kbps_; }
  constexpr double mbps() const { return static_cast<double>(kbps_) / 1000.0; }
  constexpr bool positive() const { return kbps_ > 0; }
  constexpr bool zero() const { return kbps_ == 0; }

  constexpr Rate& operator+=(Rate o) {
    kbps_ += o.kbps_;
    return *this;
  }
  constexpr Rate& operator-=(Rate o) {
    kbps_ -= o.kbps_;
    return *this;
  }
  friend constexpr Rate operator+(Rate a, Rate b) { return Rate(a.kbps_ + b.kbps_); }
  friend constexpr Rate operator-(Rate a, Rate b) { return Rate(a.kbps_ - b.kbps_); }
  friend constexpr auto operator<=>(Rate, Rate) = default;

  // Formatted in Mbps with three decimals, the exact representation.
  std::string ToString() const;

 private:
  constexpr explicit Rate(std::int64_t kbps) : kbps_(kbps) {}
  std::int64_t kbps_ = 0;
};

constexpr Rate min(Rate a, Rate b) { return a < b ? a : b; }

}  // namespace meshweave
