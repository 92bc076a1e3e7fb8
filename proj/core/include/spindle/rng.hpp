#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace spindle {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure: the output is
/// a function of (counter, key) only.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Mixes a 64-bit value (splitmix64 finaliser). Used to derive independent
/// master seeds for distinct purposes from one user seed.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a seed for a named purpose ("p-side", "q-side", ...) so that
/// engines sharing one user seed do not share streams.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag) noexcept;

/// Counter-based random stream identified by (master_seed, stream_id).
///
/// The key is the master seed, the upper half of the counter is the stream
/// id and the lower half counts blocks, so the sequence of draws is a pure
/// function of the pair and independent of any scheduling. Satisfies
/// UniformRandomBitGenerator, so std:: distributions can be driven by it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() { return normal_(*this); }
  /// Exponential with the given rate; +infinity when rate == 0.
  double exponential(double rate);

 private:
  void refill() noexcept;

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// A family of streams sharing a master seed; replicate i uses stream(i).
struct StreamFamily {
  std::uint64_t master_seed = 0;

  RngStream stream(std::uint64_t stream_id) const noexcept {
    return RngStream(master_seed, stream_id);
  }
};

}  // namespace spindle
