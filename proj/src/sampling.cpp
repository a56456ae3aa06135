#include "alignrecon/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace alignrecon {

namespace {

std::size_t round_half_up(double v) { return static_cast<std::size_t>(std::floor(v + 0.5)); }

std::vector<std::uint8_t> center_columns(const MaskSpec& spec, const ColumnBudget& budget) {
  std::vector<std::uint8_t> cols(spec.width, 0);
  for (std::size_t i = 0; i < budget.center; ++i) cols[budget.center_start + i] = 1;
  return cols;
}

std::vector<std::size_t> free_columns(const std::vector<std::uint8_t>& cols) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < cols.size(); ++c)
    if (!cols[c]) out.push_back(c);
  return out;
}

}  // namespace

void MaskSpec::validate() const {
  if (!(acceleration >= 1.0) || !std::isfinite(acceleration))
    throw InvalidSpec("acceleration must be >= 1, got " + std::to_string(acceleration));
  if (!(center_alloc >= 0.0 && center_alloc <= 1.0))
    throw InvalidSpec("center_alloc must lie in [0, 1], got " + std::to_string(center_alloc));
  if (static_cast<double>(width) < acceleration)
    throw InvalidSpec("width " + std::to_string(width) + " is smaller than the acceleration");
}

ColumnBudget column_budget(const MaskSpec& spec) {
  spec.validate();
  ColumnBudget b;
  b.total = std::max<std::size_t>(1, round_half_up(static_cast<double>(spec.width) / spec.acceleration));
  b.center = round_half_up(spec.center_alloc * static_cast<double>(b.total));
  if (b.center > b.total)
    throw InvalidSpec("center block (" + std::to_string(b.center) + ") exceeds sampled columns (" +
                      std::to_string(b.total) + ")");
  const std::size_t dc = spec.width / 2;
  b.center_start = std::min(dc - std::min(dc, b.center / 2), spec.width - b.center);
  return b;
}

SamplingMask equispaced_mask(const MaskSpec& spec, std::size_t height) {
  const ColumnBudget budget = column_budget(spec);
  auto cols = center_columns(spec, budget);
  const auto avail = free_columns(cols);
  const std::size_t rest = budget.total - budget.center;
  for (std::size_t i = 0; i < rest; ++i) cols[avail[i * avail.size() / rest]] = 1;
  return SamplingMask(height, std::move(cols));
}

SamplingMask random_mask(const MaskSpec& spec, std::size_t height) {
  const ColumnBudget budget = column_budget(spec);
  auto cols = center_columns(spec, budget);
  auto avail = free_columns(cols);
  const std::size_t rest = budget.total - budget.center;
  std::mt19937_64 rng(spec.seed);
  // Partial Fisher-Yates: the first `rest` entries become the draw.
  for (std::size_t i = 0; i < rest; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, avail.size() - 1);
    std::swap(avail[i], avail[pick(rng)]);
    cols[avail[i]] = 1;
  }
  return SamplingMask(height, std::move(cols));
}

SamplingMask make_mask(MaskPattern pattern, const MaskSpec& spec, std::size_t height) {
  return pattern == MaskPattern::Equispaced ? equispaced_mask(spec, height) : random_mask(spec, height);
}

MaskPattern parse_mask_pattern(const std::string& name) {
  if (name == "equispaced") return MaskPattern::Equispaced;
  if (name == "random") return MaskPattern::Random;
  throw InvalidSpec("unknown mask pattern '" + name + "' (expected equispaced or random)");
}

std::string to_string(MaskPattern pattern) {
  return pattern == MaskPattern::Equispaced ? "equispaced" : "random";
}

}  // namespace alignrecon
