#include "votespread/vote_dynamics.hpp"

#include <cmath>

namespace votespread {

std::optional<PromotionRates> promotion_rates(const StoryRecord& story, double tick_length,
                                              std::size_t window) {
  if (!story.promoted || !story.promotion_index || !story.vote_times || window == 0) {
    return std::nullopt;
  }
  const auto& times = *story.vote_times;
  const std::size_t idx = *story.promotion_index;
  if (idx == 0 || idx > times.size()) return std::nullopt;
  const double t0 = times.front();
  auto tick_of = [&](double t) { return static_cast<std::size_t>(std::llround((t - t0) / tick_length)); };
  PromotionRates out;
  out.promotion_tick = tick_of(times[idx - 1]);
  if (out.promotion_tick == 0) return std::nullopt;
  out.pre_rate = static_cast<double>(idx - 1) / static_cast<double>(out.promotion_tick);
  std::size_t post = 0;
  for (std::size_t i = idx; i < times.size(); ++i) {
    const auto tick = tick_of(times[i]);
    if (tick > out.promotion_tick && tick <= out.promotion_tick + window) ++post;
  }
  out.post_rate = static_cast<double>(post) / static_cast<double>(window);
  return out;
}

DecayFit fit_front_decay(const std::vector<SimTrace>& traces, std::size_t n_users,
                         std::size_t span_ticks, std::size_t bin_ticks) {
  DecayFit fit;
  const std::size_t bins = bin_ticks > 0 ? span_ticks / bin_ticks : 0;
  std::vector<double> sum(bins, 0.0);
  for (const auto& trace : traces) {
    if (!trace.promotion_tick) continue;
    ++fit.stories;
    const std::size_t promo = *trace.promotion_tick;
    std::vector<double> front(span_ticks, 0.0);
    std::vector<double> before(span_ticks, 0.0);  // votes cast before each tick
    std::size_t cast = 1;  // submitter
    std::size_t e = 0;
    for (std::size_t d = 0; d < span_ticks; ++d) {
      const std::size_t tick = promo + 1 + d;
      while (e < trace.events.size() && trace.events[e].tick < tick) {
        ++cast;
        ++e;
      }
      before[d] = static_cast<double>(cast);
      std::size_t f = e;
      while (f < trace.events.size() && trace.events[f].tick == tick) {
        if (trace.events[f].channel == Channel::Front) front[d] += 1.0;
        ++f;
      }
    }
    for (std::size_t d = 0; d < bins * bin_ticks; ++d) {
      const double remaining = static_cast<double>(n_users) - before[d];
      if (remaining > 0) sum[d / bin_ticks] += front[d] / remaining;
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double x = static_cast<double>(b * bin_ticks) + 0.5 * static_cast<double>(bin_ticks - 1);
    const double h = sum[b] / static_cast<double>(bin_ticks);
    fit.bin_start.push_back(static_cast<double>(b * bin_ticks));
    fit.hazard.push_back(h);
    if (h <= 0) continue;
    const double y = std::log(h);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2) {
    const double denom = static_cast<double>(m) * sxx - sx * sx;
    fit.slope = (static_cast<double>(m) * sxy - sx * sy) / denom;
    fit.half_life = fit.slope < 0 ? -std::log(2.0) / fit.slope : INFINITY;
  }
  return fit;
}

}  // namespace votespread
