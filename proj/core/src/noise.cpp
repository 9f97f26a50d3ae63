#include "jumpsde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "jumpsde/errors.hpp"

namespace jumpsde {

namespace {

// Independent sub-streams keyed by (seed, stream tag, extra words).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t tag, std::uint64_t extra = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag,
                    static_cast<std::uint32_t>(extra), static_cast<std::uint32_t>(extra >> 32)};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kWienerStream = 0x57u;
constexpr std::uint32_t kPoissonStream = 0x50000u;  // + mark index
constexpr std::uint32_t kBridgeStream = 0xB81Du;

}  // namespace

TimeGrid::TimeGrid(double t0, double t_end, std::size_t n_steps)
    : t0_(t0), t_end_(t_end), n_steps_(n_steps), h_(0.0) {
  if (!std::isfinite(t0) || !std::isfinite(t_end) || !(t_end > t0)) {
    throw InvalidArgument("time grid needs finite T > t0");
  }
  if (n_steps == 0) {
    throw InvalidArgument("time grid needs at least one step");
  }
  h_ = (t_end - t0) / static_cast<double>(n_steps);
}

double TimeGrid::time(std::size_t k) const noexcept {
  if (k >= n_steps_) return t_end_;
  return t0_ + (t_end_ - t0_) * static_cast<double>(k) / static_cast<double>(n_steps_);
}

std::size_t TimeGrid::step_containing(double t) const noexcept {
  if (t <= t0_) return 0;
  if (t >= t_end_) return n_steps_ - 1;
  auto k = static_cast<std::size_t>(std::max(0.0, std::ceil((t - t0_) / h_) - 1.0));
  k = std::min(k, n_steps_ - 1);
  while (k > 0 && t <= time(k)) --k;
  while (k + 1 < n_steps_ && t > time(k + 1)) ++k;
  return k;
}

TimeGrid build_grid(double t0, double t_end, std::size_t n_steps) { return TimeGrid(t0, t_end, n_steps); }

double MarkSpace::total_rate() const noexcept {
  double total = 0.0;
  for (double r : rates) total += r;
  return total;
}

void MarkSpace::validate() const {
  if (marks.size() != rates.size()) {
    throw InvalidArgument("mark space: " + std::to_string(marks.size()) + " marks but " +
                          std::to_string(rates.size()) + " rates");
  }
  for (std::size_t j = 0; j < rates.size(); ++j) {
    if (!(rates[j] > 0.0) || !std::isfinite(rates[j])) {
      throw InvalidArgument("mark space: rate " + std::to_string(j) + " must be positive and finite");
    }
  }
}

NoiseRealization::NoiseRealization(TimeGrid grid, Matrix increments, std::vector<JumpEvent> events,
                                   MarkSpace marks, std::uint64_t seed)
    : grid_(grid), dw_(std::move(increments)), events_(std::move(events)), marks_(std::move(marks)), seed_(seed) {
  if (static_cast<std::size_t>(dw_.rows()) != grid_.steps()) {
    throw InvalidArgument("noise: increment rows must equal the number of steps");
  }
  marks_.validate();
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    if (e.mark_index >= marks_.size()) throw InvalidArgument("noise: event mark index out of range");
    if (!(e.time > grid_.t0()) || e.time > grid_.t_end()) {
      throw InvalidArgument("noise: event time outside (t0, T]");
    }
    if (i > 0 && !(events_[i - 1].time < e.time)) {
      throw InvalidArgument("noise: event times must be strictly increasing");
    }
  }

  const auto m = dw_.cols();
  w_ = Matrix::Zero(dw_.rows() + 1, m);
  for (Eigen::Index k = 0; k < dw_.rows(); ++k) w_.row(k + 1) = w_.row(k) + dw_.row(k);

  offsets_.assign(grid_.steps() + 1, 0);
  for (const auto& e : events_) ++offsets_[grid_.step_containing(e.time) + 1];
  for (std::size_t k = 1; k < offsets_.size(); ++k) offsets_[k] += offsets_[k - 1];
}

std::span<const JumpEvent> NoiseRealization::events_in_step(std::size_t step) const {
  const auto begin = offsets_.at(step);
  const auto end = offsets_.at(step + 1);
  return std::span<const JumpEvent>(events_).subspan(begin, end - begin);
}

NoiseRealization sample_noise(const TimeGrid& grid, std::size_t m, const MarkSpace& ms, std::uint64_t seed) {
  ms.validate();
  const auto n = static_cast<Eigen::Index>(grid.steps());
  Matrix dw(n, static_cast<Eigen::Index>(m));
  {
    auto rng = make_stream(seed, kWienerStream);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(grid.step());
    // Row-major fill so the stream order does not depend on storage order.
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j) dw(k, j) = sd * normal(rng);
    }
  }

  std::vector<JumpEvent> events;
  const double span = grid.t_end() - grid.t0();
  for (std::size_t j = 0; j < ms.size(); ++j) {
    auto rng = make_stream(seed, kPoissonStream + static_cast<std::uint32_t>(j));
    std::poisson_distribution<long> count(ms.rates[j] * span);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const long c = count(rng);
    for (long i = 0; i < c; ++i) {
      // u in [0,1) maps to (t0, T].
      events.push_back({grid.t_end() - unit(rng) * span, j});
    }
  }
  std::sort(events.begin(), events.end(), [](const JumpEvent& a, const JumpEvent& b) {
    return a.time < b.time || (a.time == b.time && a.mark_index < b.mark_index);
  });
  // Coincident times have probability zero; drop exact duplicates so times stay strictly increasing.
  events.erase(std::unique(events.begin(), events.end(),
                           [](const JumpEvent& a, const JumpEvent& b) { return a.time == b.time; }),
               events.end());

  return NoiseRealization(grid, std::move(dw), std::move(events), ms, seed);
}

NoiseRealization refine_noise(const NoiseRealization& noise, std::size_t factor) {
  if (factor < 2) throw InvalidArgument("refine_noise: factor must be at least 2");
  const auto& coarse = noise.grid();
  const TimeGrid fine(coarse.t0(), coarse.t_end(), coarse.steps() * factor);
  const auto m = static_cast<Eigen::Index>(noise.wiener_dim());
  const auto f = static_cast<Eigen::Index>(factor);

  auto rng = make_stream(noise.seed(), kBridgeStream, (static_cast<std::uint64_t>(coarse.steps()) << 16) ^ factor);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double hf = fine.step();

  Matrix dw(static_cast<Eigen::Index>(fine.steps()), m);
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(coarse.steps()); ++k) {
    for (Eigen::Index j = 0; j < m; ++j) {
      // Sequential bridge: piece i given the remaining sum over r pieces.
      double remaining = noise.increments()(k, j);
      for (Eigen::Index i = 0; i + 1 < f; ++i) {
        const double r = static_cast<double>(f - i);
        const double piece = remaining / r + std::sqrt(hf * (r - 1.0) / r) * normal(rng);
        dw(k * f + i, j) = piece;
        remaining -= piece;
      }
      dw(k * f + f - 1, j) = remaining;
    }
  }
  return NoiseRealization(fine, std::move(dw), noise.events(), noise.marks(), noise.seed());
}

std::vector<NoiseRealization> refine_chain(const NoiseRealization& noise, std::size_t levels) {
  std::vector<NoiseRealization> out;
  out.reserve(levels);
  if (levels == 0) return out;
  out.push_back(noise);
  for (std::size_t i = 1; i < levels; ++i) out.push_back(refine_noise(out.back(), 2));
  return out;
}

}  // namespace jumpsde
