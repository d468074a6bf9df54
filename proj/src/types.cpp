#include "epr/types.hpp"

#include <charconv>
#include <cstdio>
#include <numeric>

namespace epr {

std::uint64_t SinglesTable::alice_total() const {
  return std::accumulate(alice_counts.begin(), alice_counts.end(), std::uint64_t{0});
}

std::uint64_t SinglesTable::bob_total() const {
  return std::accumulate(bob_counts.begin(), bob_counts.end(), std::uint64_t{0});
}

std::uint64_t CellTable::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

WindowSpec WindowSpec::from_center(std::int64_t delta_ps, std::int64_t half_width_ps) {
  if (half_width_ps < 0) {
    throw DataError("window half-width must be non-negative");
  }
  WindowSpec w;
  w.delta_ps_ = delta_ps;
  w.half_width_ps_ = half_width_ps;
  return w;
}

WindowSpec WindowSpec::from_edges(std::int64_t u_ps, std::int64_t v_ps) {
  if (u_ps > v_ps) {
    throw DataError("window edges must satisfy u <= v");
  }
  if (((v_ps - u_ps) & 1) != 0) {
    throw DataError("window edges must have even width in ps so delta and w are exact");
  }
  // Same parity of u and v makes (u+v)/2 exact as well.
  return from_center((u_ps + v_ps) / 2, (v_ps - u_ps) / 2);
}

std::int64_t parse_ns_to_ps(const std::string& text) {
  const char* p = text.c_str();
  const char* end = p + text.size();
  bool negative = false;
  if (p < end && (*p == '+' || *p == '-')) {
    negative = (*p == '-');
    ++p;
  }
  const char* int_begin = p;
  std::int64_t int_part = 0;
  auto r = std::from_chars(p, end, int_part);
  if (r.ec != std::errc{} && p != end && *p != '.') {
    throw DataError("not a decimal ns value: '" + text + "'");
  }
  p = (r.ec == std::errc{}) ? r.ptr : p;
  if (p == int_begin && (p == end || *p != '.')) {
    throw DataError("not a decimal ns value: '" + text + "'");
  }
  std::int64_t frac_ps = 0;
  if (p < end && *p == '.') {
    ++p;
    int digits = 0;
    for (; p < end && *p >= '0' && *p <= '9'; ++p, ++digits) {
      int d = *p - '0';
      if (digits < 3) {
        frac_ps = frac_ps * 10 + d;
      } else if (d != 0) {
        throw DataError("ns value '" + text + "' is finer than 1 ps");
      }
    }
    if (digits == 0) throw DataError("not a decimal ns value: '" + text + "'");
    for (int d = digits; d < 3; ++d) frac_ps *= 10;
  }
  if (p != end) {
    throw DataError("trailing characters in ns value: '" + text + "'");
  }
  std::int64_t ps = int_part * 1000 + frac_ps;
  return negative ? -ps : ps;
}

std::string format_ps_as_ns(std::int64_t ps) {
  std::int64_t a = ps < 0 ? -ps : ps;
  std::int64_t whole = a / 1000;
  std::int64_t frac = a % 1000;
  char buf[48];
  if (frac == 0) {
    std::snprintf(buf, sizeof buf, "%s%lld", ps < 0 ? "-" : "", static_cast<long long>(whole));
  } else {
    std::snprintf(buf, sizeof buf, "%s%lld.%03lld", ps < 0 ? "-" : "",
                  static_cast<long long>(whole), static_cast<long long>(frac));
    std::string s(buf);
    while (s.back() == '0') s.pop_back();
    return s;
  }
  return std::string(buf);
}

}  // namespace epr
