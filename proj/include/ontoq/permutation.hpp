#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ontoq {

// A bijection on {0, ..., n-1}, stored by images, with its cycle structure
// precomputed. Cycles are listed from their smallest element, ordered by it.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<std::size_t> image) : image_(std::move(image)) {
    const std::size_t n = image_.size();
    std::vector<bool> hit(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = image_[i];
      if (j >= n) {
        throw std::invalid_argument("permutation image " + std::to_string(j) + " out of range at " +
                                    std::to_string(i));
      }
      if (hit[j]) {
        throw std::invalid_argument("not a bijection: " + std::to_string(j) + " hit twice");
      }
      hit[j] = true;
    }
    build_cycles();
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::size_t> image(n);
    for (std::size_t i = 0; i < n; ++i) image[i] = i;
    return Permutation(std::move(image));
  }

  std::size_t size() const noexcept { return image_.size(); }
  std::size_t operator()(std::size_t i) const { return image_.at(i); }
  std::span<const std::size_t> images() const noexcept { return image_; }

  const std::vector<std::vector<std::size_t>>& cycles() const noexcept { return cycles_; }
  std::size_t cycle_of(std::size_t i) const { return cycle_id_.at(i); }
  std::size_t position_in_cycle(std::size_t i) const { return position_.at(i); }

  // The t-fold image of i; negative t applies the inverse.
  std::size_t apply(std::size_t i, std::int64_t t) const {
    const auto& cyc = cycles_[cycle_id_.at(i)];
    const auto len = static_cast<std::int64_t>(cyc.size());
    std::int64_t pos = (static_cast<std::int64_t>(position_[i]) + t % len) % len;
    if (pos < 0) pos += len;
    return cyc[static_cast<std::size_t>(pos)];
  }

  Permutation inverse() const {
    std::vector<std::size_t> inv(size());
    for (std::size_t i = 0; i < size(); ++i) inv[image_[i]] = i;
    return Permutation(std::move(inv));
  }

  friend bool operator==(const Permutation& a, const Permutation& b) { return a.image_ == b.image_; }

 private:
  void build_cycles() {
    constexpr auto none = std::numeric_limits<std::size_t>::max();
    cycle_id_.assign(size(), none);
    position_.assign(size(), 0);
    for (std::size_t start = 0; start < size(); ++start) {
      if (cycle_id_[start] != none) continue;
      std::vector<std::size_t> cyc;
      for (std::size_t x = start; cycle_id_[x] == none; x = image_[x]) {
        cycle_id_[x] = cycles_.size();
        position_[x] = cyc.size();
        cyc.push_back(x);
      }
      cycles_.push_back(std::move(cyc));
    }
  }

  std::vector<std::size_t> image_;
  std::vector<std::vector<std::size_t>> cycles_;
  std::vector<std::size_t> cycle_id_;
  std::vector<std::size_t> position_;
};

}  // namespace ontoq
