// occupancy.hpp - molecule arrivals and finite-capacity site assignment.
//
// One sensor exposure draws Poisson molecule counts for the target and the
// background class, then assigns molecules to the N_R receptor sites. Each
// molecule carries a binding weight w drawn from its class's interval and,
// when processed, binds with probability w * (N_R - k) / N_R where k is the
// bound count before the trial. Molecules are processed in a uniformly random
// interleaving of the two classes.
//
// Three samplers are provided:
//   exact    - the per-molecule procedure above, literally.
//   batched  - fixed-size single-class batches with the free fraction frozen
//              inside a batch and the bound count drawn as a binomial.
//   thinned  - the same law as `exact`, sampled in O(N_R) work (see
//              assign_sites_thinned).
// Lengths are drawn only for bound molecules.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "params.hpp"

namespace bloodsim {

class ConfigTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FragmentClass : std::uint8_t { target, background };

struct BoundFragment {
  FragmentClass fragment_class = FragmentClass::target;
  std::int32_t n_bp = 0;
  double z = 0.0;
};

struct BoundPopulation {
  std::vector<BoundFragment> fragments;
  std::int64_t k_target = 0;
  std::int64_t k_background = 0;
  std::int64_t n_sites = 0;

  std::int64_t bound() const { return k_target + k_background; }
};

struct ExpectedCounts {
  double target = 0.0;
  double background = 0.0;
};

struct ExposureDraw {
  std::int64_t n_target = 0;
  std::int64_t n_background = 0;
  double mean_target = 0.0;
  double mean_background = 0.0;
};

/// Mean molecule counts C * V_sample * N_A for both classes.
inline ExpectedCounts expected_counts(const RegimeConfig& c) {
  return {c.c_target * c.v_sample * constants::avogadro,
          c.c_background * c.v_sample * constants::avogadro};
}

template <class Rng>
std::int64_t draw_poisson(double mean, Rng& rng) {
  if (mean <= 0.0) return 0;
  if (mean > 9.2e18) throw ConfigTooLarge("Poisson mean exceeds 2^63");
  std::poisson_distribution<std::int64_t> poisson(mean);
  return poisson(rng);
}

template <class Rng>
ExposureDraw draw_exposure(const RegimeConfig& c, Rng& rng) {
  const auto means = expected_counts(c);
  ExposureDraw draw;
  draw.mean_target = means.target;
  draw.mean_background = means.background;
  draw.n_target = draw_poisson(means.target, rng);
  draw.n_background = draw_poisson(means.background, rng);
  return draw;
}

namespace detail {

template <class Rng>
void append_bound(BoundPopulation& population, FragmentClass cls, std::int64_t count,
                  const RegimeConfig& c, Rng& length_rng) {
  const bool target = cls == FragmentClass::target;
  const IntRange range = target ? c.target_bp_range : c.background_bp_range;
  const double z = target ? c.z_target : c.z_background;
  std::uniform_int_distribution<std::int32_t> length(static_cast<std::int32_t>(range.lo),
                                                     static_cast<std::int32_t>(range.hi));
  for (std::int64_t i = 0; i < count; ++i) {
    population.fragments.push_back({cls, length(length_rng), z});
  }
  (target ? population.k_target : population.k_background) += count;
}

// True with probability `favourable / total`, from one uniform integer.
template <class Rng>
bool pick_first(std::int64_t favourable, std::int64_t total, Rng& rng) {
  std::uniform_int_distribution<std::int64_t> pick(0, total - 1);
  return pick(rng) < favourable;
}

}  // namespace detail

/// Literal per-molecule assignment. Once every site is taken the remaining
/// molecules see a free fraction of zero and cannot bind, so the loop stops.
template <class Rng, class LengthRng>
BoundPopulation assign_sites_exact(const ExposureDraw& draw, const RegimeConfig& c, Rng& rng,
                                   LengthRng& length_rng) {
  BoundPopulation population;
  population.n_sites = binding_sites(c);
  const std::int64_t sites = population.n_sites;
  const double inv_sites = 1.0 / static_cast<double>(sites);

  std::uniform_real_distribution<double> target_weight(c.target_weight_range.lo,
                                                       c.target_weight_range.hi);
  std::uniform_real_distribution<double> background_weight(c.background_weight_range.lo,
                                                           c.background_weight_range.hi);
  std::int64_t remaining_target = draw.n_target;
  std::int64_t remaining_background = draw.n_background;
  std::int64_t k = 0;
  while (remaining_target + remaining_background > 0 && k < sites) {
    const bool target =
        detail::pick_first(remaining_target, remaining_target + remaining_background, rng);
    const double w = target ? target_weight(rng) : background_weight(rng);
    --(target ? remaining_target : remaining_background);
    const double p = w * static_cast<double>(sites - k) * inv_sites;
    if (rng.uniform() < p) {
      detail::append_bound(population, target ? FragmentClass::target : FragmentClass::background,
                           1, c, length_rng);
      ++k;
    }
  }
  return population;
}

/// Batched assignment: each batch holds up to `batch_size` molecules of one
/// class, chosen with probability proportional to the remaining counts. The
/// free fraction is frozen for the batch and the per-molecule weight is
/// integrated out, so the bound count is Binomial(size, mean_weight * phi),
/// clamped to the free sites.
template <class Rng, class LengthRng>
BoundPopulation assign_sites_batched(const ExposureDraw& draw, const RegimeConfig& c,
                                     std::int64_t batch_size, Rng& rng, LengthRng& length_rng) {
  if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  BoundPopulation population;
  population.n_sites = binding_sites(c);
  const std::int64_t sites = population.n_sites;

  std::int64_t remaining_target = draw.n_target;
  std::int64_t remaining_background = draw.n_background;
  std::int64_t k = 0;
  while (remaining_target + remaining_background > 0 && k < sites) {
    const bool target =
        detail::pick_first(remaining_target, remaining_target + remaining_background, rng);
    std::int64_t& remaining = target ? remaining_target : remaining_background;
    const std::int64_t size = std::min(batch_size, remaining);
    remaining -= size;
    const double phi = static_cast<double>(sites - k) / static_cast<double>(sites);
    const double mean_weight =
        target ? c.target_weight_range.mean() : c.background_weight_range.mean();
    std::binomial_distribution<std::int64_t> binomial(size, std::clamp(mean_weight * phi, 0.0, 1.0));
    const std::int64_t bound = std::min(binomial(rng), sites - k);
    detail::append_bound(population, target ? FragmentClass::target : FragmentClass::background,
                         bound, c, length_rng);
    k += bound;
  }
  return population;
}

/// Same law as assign_sites_exact, in O(N_R) work.
///
/// Give molecule i a uniform V_i and bind it iff V_i < w_i * phi. Because
/// phi <= 1, only "candidates" with V_i < w_i can ever bind; a class's
/// candidate count is Binomial(N, E[w]). Given candidacy, V_i is uniform on
/// [0, w_i), so a candidate binds with probability phi whatever its weight or
/// class. The bound count is therefore the number of occupied sites after C
/// candidates each hit a free site with probability (N_R - k) / N_R, sampled
/// with geometric skips between successes. Class labels are exchangeable over
/// candidate positions, so the target share of the bound set is
/// hypergeometric.
template <class Rng, class LengthRng>
BoundPopulation assign_sites_thinned(const ExposureDraw& draw, const RegimeConfig& c, Rng& rng,
                                     LengthRng& length_rng) {
  BoundPopulation population;
  population.n_sites = binding_sites(c);
  const std::int64_t sites = population.n_sites;

  auto candidates = [&rng](std::int64_t n, double mean_weight) -> std::int64_t {
    if (n == 0 || mean_weight <= 0.0) return 0;
    if (mean_weight >= 1.0) return n;
    std::binomial_distribution<std::int64_t> binomial(n, mean_weight);
    return binomial(rng);
  };
  const std::int64_t target_candidates = candidates(draw.n_target, c.target_weight_range.mean());
  const std::int64_t background_candidates =
      candidates(draw.n_background, c.background_weight_range.mean());
  const std::int64_t total = target_candidates + background_candidates;

  std::int64_t k = 0;
  std::int64_t used = 0;
  while (k < sites && used < total) {
    if (k == 0) {
      ++used;
      ++k;
      continue;
    }
    const double p = static_cast<double>(sites - k) / static_cast<double>(sites);
    std::geometric_distribution<std::int64_t> failures(p);
    const std::int64_t skip = failures(rng);
    if (skip >= total - used) break;
    used += skip + 1;
    ++k;
  }

  // Hypergeometric split of the k bound candidates.
  std::int64_t remaining_target = target_candidates;
  std::int64_t remaining = total;
  std::int64_t bound_target = 0;
  for (std::int64_t i = 0; i < k; ++i) {
    if (remaining_target > 0 && detail::pick_first(remaining_target, remaining, rng)) {
      ++bound_target;
      --remaining_target;
    }
    --remaining;
  }
  population.fragments.reserve(static_cast<std::size_t>(k));
  detail::append_bound(population, FragmentClass::target, bound_target, c, length_rng);
  detail::append_bound(population, FragmentClass::background, k - bound_target, c, length_rng);
  return population;
}

/// Molecule count above which `auto` mode switches from exact to thinned.
inline constexpr std::int64_t auto_exact_limit = 1'000'000;

template <class Rng, class LengthRng>
BoundPopulation assign_sites(const ExposureDraw& draw, const RegimeConfig& c, Rng& rng,
                             LengthRng& length_rng) {
  using K = OccupancyMode::Kind;
  switch (c.occupancy_mode.kind) {
    case K::exact:
      return assign_sites_exact(draw, c, rng, length_rng);
    case K::batched:
      return assign_sites_batched(draw, c, c.occupancy_mode.batch_size, rng, length_rng);
    case K::thinned:
      return assign_sites_thinned(draw, c, rng, length_rng);
    case K::automatic:
      break;
  }
  if (draw.n_target + draw.n_background > auto_exact_limit) {
    return assign_sites_thinned(draw, c, rng, length_rng);
  }
  return assign_sites_exact(draw, c, rng, length_rng);
}

}  // namespace bloodsim
