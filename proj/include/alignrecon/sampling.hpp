#pragma once

#include <cstdint>

#include "alignrecon/grid.hpp"

namespace alignrecon {

enum class MaskPattern { Equispaced, Random };

struct MaskSpec {
  std::size_t width = 0;
  double acceleration = 4.0;
  // Fraction of the *sampled* columns placed in the contiguous low-frequency block.
  double center_alloc = 0.32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ColumnBudget {
  std::size_t total = 0;   // round(width / acceleration), half-up
  std::size_t center = 0;  // round(center_alloc * total), half-up
  std::size_t center_start = 0;
};

ColumnBudget column_budget(const MaskSpec& spec);

// Deterministic: centered block plus evenly spaced columns over the
// remaining positions, starting from column 0.
SamplingMask equispaced_mask(const MaskSpec& spec, std::size_t height);

// Same counts as equispaced_mask; the non-center columns are drawn uniformly
// without replacement from the non-center positions using spec.seed.
SamplingMask random_mask(const MaskSpec& spec, std::size_t height);

SamplingMask make_mask(MaskPattern pattern, const MaskSpec& spec, std::size_t height);

MaskPattern parse_mask_pattern(const std::string& name);
std::string to_string(MaskPattern pattern);

}  // namespace alignrecon
