#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace loopsurro {

// Unscrambled Sobol sequence in the unit cube, Gray-code ordering, with
// Joe-Kuo direction numbers for up to 32 dimensions.
class SobolSequence {
 public:
  static constexpr std::size_t kMaxDimension = 32;

  explicit SobolSequence(std::size_t dimension);

  std::size_t dimension() const { return dim_; }
  // Point with index `index_` (0 is the origin), then advances.
  std::vector<double> next();
  void skip(std::size_t count);

 private:
  std::size_t dim_;
  std::uint64_t index_ = 0;
  std::vector<std::vector<std::uint32_t>> directions_;  // [dim][bit]
  std::vector<std::uint32_t> state_;
};

}  // namespace loopsurro
