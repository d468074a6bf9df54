#include "epr/coincidence.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

namespace epr {
namespace {

std::int64_t abs64(std::int64_t x) { return x < 0 ? -x : x; }

struct SweepContext {
  const std::vector<Detection>& a;
  const std::vector<Detection>& b;
  std::int64_t delta;
  std::int64_t w;

  std::int64_t shifted(std::size_t k) const { return a[k].time_ps + delta; }

  bool inseq_ok(std::size_t k, std::size_t l) const {
    const std::int64_t ak = shifted(k);
    const std::int64_t bl = b[l].time_ps;
    if (l > 0 && !(ak > b[l - 1].time_ps)) return false;
    if (k + 1 < a.size() && !(shifted(k + 1) > bl)) return false;
    if (k > 0 && !(shifted(k - 1) < bl)) return false;
    if (l + 1 < b.size() && !(ak < b[l + 1].time_ps)) return false;
    return true;
  }

  bool unamb_ok(std::size_t k, std::size_t l) const {
    const std::int64_t ak = shifted(k);
    const std::int64_t bl = b[l].time_ps;
    if (l > 0 && !(abs64(b[l - 1].time_ps - ak) > w)) return false;
    if (l + 1 < b.size() && !(abs64(b[l + 1].time_ps - ak) > w)) return false;
    if (k > 0 && !(abs64(bl - shifted(k - 1)) > w)) return false;
    if (k + 1 < a.size() && !(abs64(bl - shifted(k + 1)) > w)) return false;
    return true;
  }

  bool passes(Rule rule, std::size_t k, std::size_t l) const {
    switch (rule) {
      case Rule::allpr:
        return true;
      case Rule::inseq:
        return inseq_ok(k, l);
      case Rule::unamb:
        return unamb_ok(k, l);
    }
    return false;
  }

  // Smallest strictly-exceeded neighbor distance: the pair (k, l) is
  // unambiguous for exactly the widths |d| <= w < m.
  std::int64_t unamb_ceiling(std::size_t k, std::size_t l) const {
    const std::int64_t ak = shifted(k);
    const std::int64_t bl = b[l].time_ps;
    std::int64_t m = std::numeric_limits<std::int64_t>::max();
    if (l > 0) m = std::min(m, abs64(b[l - 1].time_ps - ak));
    if (l + 1 < b.size()) m = std::min(m, abs64(b[l + 1].time_ps - ak));
    if (k > 0) m = std::min(m, abs64(bl - shifted(k - 1)));
    if (k + 1 < a.size()) m = std::min(m, abs64(bl - shifted(k + 1)));
    return m;
  }
};

template <typename Visit>
void sweep(const DetectionLog& log_a, const DetectionLog& log_b, std::int64_t delta,
           std::int64_t w, Visit&& visit) {
  const auto& a = log_a.detections;
  const auto& b = log_b.detections;
  std::size_t l_lo = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const std::int64_t lo = a[k].time_ps + delta - w;
    const std::int64_t hi = a[k].time_ps + delta + w;
    while (l_lo < b.size() && b[l_lo].time_ps < lo) ++l_lo;
    for (std::size_t l = l_lo; l < b.size() && b[l].time_ps <= hi; ++l) {
      visit(k, l);
    }
  }
}

}  // namespace

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::allpr:
      return "allpr";
    case Rule::inseq:
      return "inseq";
    case Rule::unamb:
      return "unamb";
  }
  return "?";
}

Rule rule_from_name(const std::string& name) {
  if (name == "allpr") return Rule::allpr;
  if (name == "inseq") return Rule::inseq;
  if (name == "unamb") return Rule::unamb;
  throw DataError("unknown rule '" + name + "' (expected allpr|inseq|unamb)");
}

CoincidenceSet find_coincidences(const DetectionLog& log_a, const DetectionLog& log_b,
                                 const WindowSpec& window, Rule rule) {
  CoincidenceSet out;
  out.rule = rule;
  out.window = window;
  SweepContext ctx{log_a.detections, log_b.detections, window.delta_ps(),
                   window.half_width_ps()};
  sweep(log_a, log_b, ctx.delta, ctx.w, [&](std::size_t k, std::size_t l) {
    if (ctx.passes(rule, k, l)) out.pairs.push_back({k, l});
  });
  return out;
}

std::uint64_t count_coincidences(const DetectionLog& log_a, const DetectionLog& log_b,
                                 const WindowSpec& window, Rule rule) {
  const auto& a = log_a.detections;
  const auto& b = log_b.detections;
  const std::int64_t delta = window.delta_ps();
  const std::int64_t w = window.half_width_ps();
  std::uint64_t count = 0;
  if (rule == Rule::allpr) {
    // Both range ends advance monotonically with k; no per-pair work.
    std::size_t l_lo = 0, l_hi = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const std::int64_t lo = a[k].time_ps + delta - w;
      const std::int64_t hi = a[k].time_ps + delta + w;
      while (l_lo < b.size() && b[l_lo].time_ps < lo) ++l_lo;
      if (l_hi < l_lo) l_hi = l_lo;
      while (l_hi < b.size() && b[l_hi].time_ps <= hi) ++l_hi;
      count += l_hi - l_lo;
    }
    return count;
  }
  SweepContext ctx{a, b, delta, w};
  sweep(log_a, log_b, delta, w, [&](std::size_t k, std::size_t l) {
    if (ctx.passes(rule, k, l)) ++count;
  });
  return count;
}

CoincidenceSet brute_force_coincidences(const DetectionLog& log_a,
                                        const DetectionLog& log_b,
                                        const WindowSpec& window, Rule rule,
                                        std::uint64_t pair_guard) {
  const auto& a = log_a.detections;
  const auto& b = log_b.detections;
  if (static_cast<std::uint64_t>(a.size()) * b.size() > pair_guard) {
    throw DataError("brute force guard exceeded: " + std::to_string(a.size()) + " x " +
                    std::to_string(b.size()) + " pairs");
  }
  CoincidenceSet out;
  out.rule = rule;
  out.window = window;
  SweepContext ctx{a, b, window.delta_ps(), window.half_width_ps()};
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t l = 0; l < b.size(); ++l) {
      if (abs64(b[l].time_ps - ctx.shifted(k)) > ctx.w) continue;
      if (ctx.passes(rule, k, l)) out.pairs.push_back({k, l});
    }
  }
  return out;
}

CellTable tabulate_cells(const CoincidenceSet& cs, const DetectionLog& log_a,
                         const DetectionLog& log_b) {
  CellTable cells;
  for (const IndexPair& p : cs.pairs) {
    if (p.k >= log_a.size() || p.l >= log_b.size()) {
      throw DataError("coincidence index out of range for the supplied logs");
    }
    const Detection& da = log_a.detections[p.k];
    const Detection& db = log_b.detections[p.l];
    cells.at(da.setting, db.setting, da.result, db.result) += 1;
  }
  return cells;
}

std::vector<WidthCount> sweep_widths(const DetectionLog& log_a, const DetectionLog& log_b,
                                     std::int64_t delta_ps,
                                     const std::vector<std::int64_t>& half_widths_ps,
                                     Rule rule, std::uint64_t pair_guard) {
  std::vector<WidthCount> out;
  if (half_widths_ps.empty()) return out;
  if (!std::is_sorted(half_widths_ps.begin(), half_widths_ps.end())) {
    throw DataError("sweep widths must be sorted ascending");
  }
  if (half_widths_ps.front() < 0) throw DataError("negative half-width");
  const std::int64_t w_max = half_widths_ps.back();

  // One enumeration at the largest width. Each candidate records the
  // width |d| at which it enters allpr, whether the width-independent
  // inseq side conditions hold, and (for unamb) the width at which a
  // neighbor becomes ambiguous.
  const WindowSpec top = WindowSpec::from_center(delta_ps, w_max);
  std::uint64_t top_count = count_coincidences(log_a, log_b, top, Rule::allpr);
  if (top_count > pair_guard) {
    throw DataError("sweep_widths guard exceeded: " + std::to_string(top_count) +
                    " candidate pairs at the largest width");
  }

  SweepContext ctx{log_a.detections, log_b.detections, delta_ps, w_max};
  std::vector<std::int64_t> entry;  // |d| per candidate, rule-filtered below
  entry.reserve(top_count);
  std::vector<std::int64_t> ceiling;  // unamb only
  sweep(log_a, log_b, delta_ps, w_max, [&](std::size_t k, std::size_t l) {
    const std::int64_t d = abs64(ctx.b[l].time_ps - ctx.shifted(k));
    switch (rule) {
      case Rule::allpr:
        entry.push_back(d);
        break;
      case Rule::inseq:
        if (ctx.inseq_ok(k, l)) entry.push_back(d);
        break;
      case Rule::unamb: {
        const std::int64_t m = ctx.unamb_ceiling(k, l);
        if (m > d) {
          entry.push_back(d);
          ceiling.push_back(m);
        }
        break;
      }
    }
  });
  std::sort(entry.begin(), entry.end());
  std::sort(ceiling.begin(), ceiling.end());

  out.reserve(half_widths_ps.size());
  for (std::int64_t w : half_widths_ps) {
    auto entered = static_cast<std::uint64_t>(
        std::upper_bound(entry.begin(), entry.end(), w) - entry.begin());
    std::uint64_t n = entered;
    if (rule == Rule::unamb) {
      // Candidates whose ceiling m satisfies m <= w have become ambiguous;
      // m > |d| for every stored candidate, so all of those had entered.
      auto exited = static_cast<std::uint64_t>(
          std::upper_bound(ceiling.begin(), ceiling.end(), w) - ceiling.begin());
      n = entered - exited;
    }
    out.push_back({w, n});
  }
  return out;
}

}  // namespace epr
