#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wfd {

/// Simulated time as a signed count of picoseconds.
///
/// Integer ticks keep golden traces identical across platforms; twelve
/// fractional digits are enough to print every timestamp exactly.
class SimTime {
public:
    static constexpr std::int64_t kTicksPerSecond = 1'000'000'000'000;

    constexpr SimTime() = default;

    static constexpr SimTime from_ticks(std::int64_t ps) { return SimTime{ps}; }
    static constexpr SimTime from_ns(std::int64_t ns) { return SimTime{ns * 1000}; }
    static constexpr SimTime from_us(std::int64_t us) { return SimTime{us * 1'000'000}; }
    static constexpr SimTime from_ms(std::int64_t ms) { return SimTime{ms * 1'000'000'000}; }

    static SimTime from_seconds(double s) {
        return SimTime{static_cast<std::int64_t>(std::llround(s * static_cast<double>(kTicksPerSecond)))};
    }

    /// Parses "6.40348094346" exactly (no binary rounding); at most 12 fractional digits.
    static SimTime parse_decimal(std::string_view text) {
        if (text.empty())
            throw std::invalid_argument("empty time value");
        bool negative = false;
        if (text.front() == '-') {
            negative = true;
            text.remove_prefix(1);
        }
        std::int64_t whole = 0;
        std::int64_t frac = 0;
        int frac_digits = 0;
        bool seen_dot = false;
        bool any_digit = false;
        for (char c : text) {
            if (c == '.') {
                if (seen_dot)
                    throw std::invalid_argument("malformed time value");
                seen_dot = true;
                continue;
            }
            if (c < '0' || c > '9')
                throw std::invalid_argument("malformed time value");
            any_digit = true;
            if (!seen_dot) {
                whole = whole * 10 + (c - '0');
                if (whole > 9'000'000)
                    throw std::out_of_range("time value too large");
            } else {
                if (frac_digits == 12)
                    throw std::invalid_argument("more than 12 fractional digits");
                frac = frac * 10 + (c - '0');
                ++frac_digits;
            }
        }
        if (!any_digit)
            throw std::invalid_argument("malformed time value");
        for (int i = frac_digits; i < 12; ++i)
            frac *= 10;
        std::int64_t ticks = whole * kTicksPerSecond + frac;
        return SimTime{negative ? -ticks : ticks};
    }

    constexpr std::int64_t ticks() const { return ps_; }
    constexpr double seconds() const { return static_cast<double>(ps_) / static_cast<double>(kTicksPerSecond); }

    /// Decimal seconds with exactly 12 fractional digits, e.g. "6.403480943460".
    std::string to_string() const {
        std::int64_t v = ps_ < 0 ? -ps_ : ps_;
        char buf[48];
        std::snprintf(buf, sizeof buf, "%s%lld.%012lld", ps_ < 0 ? "-" : "",
                      static_cast<long long>(v / kTicksPerSecond), static_cast<long long>(v % kTicksPerSecond));
        return buf;
    }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime& operator+=(SimTime o) { ps_ += o.ps_; return *this; }
    constexpr SimTime& operator-=(SimTime o) { ps_ -= o.ps_; return *this; }
    friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.ps_ + b.ps_}; }
    friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime{a.ps_ - b.ps_}; }
    friend constexpr SimTime operator*(SimTime a, std::int64_t k) { return SimTime{a.ps_ * k}; }
    friend constexpr SimTime operator*(std::int64_t k, SimTime a) { return SimTime{a.ps_ * k}; }
    friend constexpr SimTime operator/(SimTime a, std::int64_t k) { return SimTime{a.ps_ / k}; }

private:
    constexpr explicit SimTime(std::int64_t ps) : ps_(ps) {}
    std::int64_t ps_ = 0;
};

inline constexpr SimTime kZeroTime{};

} // namespace wfd
