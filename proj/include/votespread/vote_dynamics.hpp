#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "votespread/spread_simulator.hpp"
#include "votespread/vote_ledger.hpp"

namespace votespread {

// Per-tick vote rates either side of promotion, read from vote times.
struct PromotionRates {
  std::size_t promotion_tick = 0;
  double pre_rate = 0.0;   // votes after submission up to promotion, per tick
  double post_rate = 0.0;  // votes in the `window` ticks after promotion, per tick
};

// nullopt for unpromoted stories, missing times or promotion_index, or a
// promotion at tick 0.
std::optional<PromotionRates> promotion_rates(const StoryRecord& story, double tick_length,
                                              std::size_t window);

struct DecayFit {
  double slope = 0.0;  // d log(hazard) / d tick
  double half_life = 0.0;
  std::size_t stories = 0;
  std::vector<double> bin_start;  // ticks since promotion
  std::vector<double> hazard;     // summed per-story front-page hazard per tick
};

// Fits an exponential to front-page votes after promotion. Each story's
// per-tick front votes are divided by its remaining non-voters so depletion
// of the audience does not masquerade as decay; the per-story hazards are
// summed across stories, averaged within `bin_ticks` bins over
// [0, span_ticks) and fitted by least squares on the log scale.
DecayFit fit_front_decay(const std::vector<SimTrace>& traces, std::size_t n_users,
                         std::size_t span_ticks, std::size_t bin_ticks);

}  // namespace votespread
