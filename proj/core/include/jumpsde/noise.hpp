#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jumpsde/types.hpp"

namespace jumpsde {

/// Uniform time grid on [t0, T] with n_steps steps.
class TimeGrid {
 public:
  TimeGrid(double t0, double t_end, std::size_t n_steps);

  double t0() const noexcept { return t0_; }
  double t_end() const noexcept { return t_end_; }
  std::size_t steps() const noexcept { return n_steps_; }
  std::size_t nodes() const noexcept { return n_steps_ + 1; }
  double step() const noexcept { return h_; }

  /// Node time t0 + k*h, computed from the span so node n is exactly T.
  double time(std::size_t k) const noexcept;

  /// Step index k with t_k < t <= t_{k+1}; times at or before t0 map to step 0.
  std::size_t step_containing(double t) const noexcept;

  bool operator==(const TimeGrid&) const = default;

 private:
  double t0_;
  double t_end_;
  std::size_t n_steps_;
  double h_;
};

TimeGrid build_grid(double t0, double t_end, std::size_t n_steps);

/// Finite-support intensity measure of the Poisson measure: mark j fires at rate rates[j].
struct MarkSpace {
  std::vector<Mark> marks;
  std::vector<double> rates;

  std::size_t size() const noexcept { return marks.size(); }
  bool empty() const noexcept { return marks.empty(); }
  double total_rate() const noexcept;

  /// Throws InvalidArgument unless lengths agree and every rate is positive and finite.
  void validate() const;
};

struct JumpEvent {
  double time;
  std::size_t mark_index;

  bool operator==(const JumpEvent&) const = default;
};

/// One frozen sample of the driving noise: Wiener increments on a grid plus Poisson atoms.
class NoiseRealization {
 public:
  NoiseRealization(TimeGrid grid, Matrix increments, std::vector<JumpEvent> events, MarkSpace marks,
                   std::uint64_t seed);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t wiener_dim() const noexcept { return static_cast<std::size_t>(dw_.cols()); }
  std::uint64_t seed() const noexcept { return seed_; }

  /// n_steps x m; row k holds the increments over step k.
  const Matrix& increments() const noexcept { return dw_; }
  double increment(std::size_t step, std::size_t k) const { return dw_(static_cast<Eigen::Index>(step), static_cast<Eigen::Index>(k)); }

  /// (n_steps+1) x m running sums of the increments; row 0 is zero.
  const Matrix& wiener() const noexcept { return w_; }

  const std::vector<JumpEvent>& events() const noexcept { return events_; }
  std::span<const JumpEvent> events_in_step(std::size_t step) const;
  /// Number of events attributed to steps before `step`.
  std::size_t events_before_step(std::size_t step) const { return offsets_.at(step); }

  const MarkSpace& marks() const noexcept { return marks_; }
  const Mark& mark(const JumpEvent& e) const { return marks_.marks.at(e.mark_index); }

 private:
  TimeGrid grid_;
  Matrix dw_;
  Matrix w_;
  std::vector<JumpEvent> events_;
  std::vector<std::size_t> offsets_;
  MarkSpace marks_;
  std::uint64_t seed_;
};

NoiseRealization sample_noise(const TimeGrid& grid, std::size_t m, const MarkSpace& ms, std::uint64_t seed);

/// Brownian-bridge refinement: each coarse increment is split into `factor` fine ones that sum to it.
NoiseRealization refine_noise(const NoiseRealization& noise, std::size_t factor);

/// levels[0] = noise, levels[i+1] = refine_noise(levels[i], 2).
std::vector<NoiseRealization> refine_chain(const NoiseRealization& noise, std::size_t levels);

}  // namespace jumpsde
