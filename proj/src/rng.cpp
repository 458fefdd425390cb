#include "glmb/rng.hpp"

#include <cmath>
#include <numbers>

namespace glmb {

RngStream::RngStream(std::uint64_t seed, const StreamPath& path) noexcept {
  std::uint64_t k = mix64(seed ^ 0xa0761d6478bd642fULL);
  k = hash_combine(k, static_cast<std::uint64_t>(path.step));
  k = hash_combine(k, static_cast<std::uint64_t>(path.domain));
  k = hash_combine(k, path.entity);
  k = hash_combine(k, path.sub);
  key_ = k;
}

namespace {

double box_muller(double u1, double u2) {
  // u1 in (0, 1] keeps the log finite.
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

double RngStream::normal_at(std::uint64_t index) const noexcept {
  return box_muller(uniform_at(2 * index), uniform_at(2 * index + 1));
}

double RngStream::normal() noexcept {
  const double z = box_muller(uniform_at(counter_), uniform_at(counter_ + 1));
  counter_ += 2;
  return z;
}

}  // namespace glmb
