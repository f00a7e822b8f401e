#include "loopsurro/sobol.hpp"

#include <array>
#include <bit>

#include "loopsurro/errors.hpp"

namespace loopsurro {

namespace {

constexpr unsigned kBits = 32;

struct PrimitivePolynomial {
  std::uint32_t poly;  // includes the leading and trailing coefficients
  std::array<std::uint32_t, 7> m;
};

// new-joe-kuo-6.21201, dimensions 2..32 (dimension 1 is van der Corput).
constexpr std::array<PrimitivePolynomial, 31> kTable{{
    {3, {1}},
    {7, {1, 3}},
    {11, {1, 3, 1}},
    {13, {1, 1, 1}},
    {19, {1, 1, 3, 3}},
    {25, {1, 3, 5, 13}},
    {37, {1, 1, 5, 5, 17}},
    {41, {1, 1, 5, 5, 5}},
    {47, {1, 1, 7, 11, 19}},
    {55, {1, 1, 5, 1, 1}},
    {59, {1, 1, 1, 3, 11}},
    {61, {1, 3, 5, 5, 31}},
    {67, {1, 3, 3, 9, 7, 49}},
    {91, {1, 1, 1, 15, 21, 21}},
    {97, {1, 3, 1, 13, 27, 49}},
    {103, {1, 1, 1, 15, 7, 5}},
    {109, {1, 3, 1, 15, 13, 25}},
    {115, {1, 1, 5, 5, 19, 61}},
    {131, {1, 3, 7, 11, 23, 15, 103}},
    {137, {1, 3, 7, 13, 13, 15, 69}},
    {143, {1, 1, 3, 13, 7, 35, 63}},
    {145, {1, 3, 5, 9, 1, 25, 53}},
    {157, {1, 3, 1, 13, 9, 35, 107}},
    {167, {1, 3, 1, 5, 27, 61, 31}},
    {171, {1, 1, 5, 11, 19, 41, 61}},
    {185, {1, 3, 5, 3, 3, 13, 69}},
    {191, {1, 1, 7, 13, 1, 19, 1}},
    {193, {1, 3, 7, 5, 13, 19, 59}},
    {203, {1, 1, 3, 9, 25, 29, 41}},
    {211, {1, 3, 5, 13, 23, 1, 55}},
    {213, {1, 3, 7, 3, 13, 59, 17}},
}};

}  // namespace

SobolSequence::SobolSequence(std::size_t dimension) : dim_(dimension) {
  if (dimension == 0 || dimension > kMaxDimension)
    throw ConfigError("Sobol: dimension " + std::to_string(dimension) + " outside [1, 32]");
  directions_.assign(dim_, std::vector<std::uint32_t>(kBits));
  for (unsigned k = 0; k < kBits; ++k) directions_[0][k] = 1u << (kBits - 1 - k);
  for (std::size_t d = 1; d < dim_; ++d) {
    const auto& p = kTable[d - 1];
    const unsigned degree = static_cast<unsigned>(std::bit_width(p.poly)) - 1;
    auto& v = directions_[d];
    for (unsigned k = 0; k < degree && k < kBits; ++k) v[k] = p.m[k] << (kBits - 1 - k);
    for (unsigned k = degree; k < kBits; ++k) {
      std::uint32_t value = v[k - degree] ^ (v[k - degree] >> degree);
      for (unsigned i = 1; i < degree; ++i)
        if ((p.poly >> (degree - i)) & 1u) value ^= v[k - i];
      v[k] = value;
    }
  }
  state_.assign(dim_, 0);
}

std::vector<double> SobolSequence::next() {
  std::vector<double> point(dim_);
  for (std::size_t d = 0; d < dim_; ++d) point[d] = static_cast<double>(state_[d]) * 0x1.0p-32;
  // Gray-code update: flip the direction number of the lowest zero bit.
  const unsigned c = static_cast<unsigned>(std::countr_one(index_));
  if (c >= kBits) throw ConfigError("Sobol: sequence exhausted");
  for (std::size_t d = 0; d < dim_; ++d) state_[d] ^= directions_[d][c];
  ++index_;
  return point;
}

void SobolSequence::skip(std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) next();
}

}  // namespace loopsurro
