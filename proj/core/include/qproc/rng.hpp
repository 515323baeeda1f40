// Reproducible random streams and an ordered parallel map.
//
// A stream is std::mt19937_64 seeded from splitmix64(master_seed, stream_id).
// Uniform doubles take the top 53 bits of each draw and lie in (0, 1].
// Normals come from Box-Muller, consuming two uniforms per pair of normals.
#pragma once

#include "qproc/qmath.hpp"

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

namespace qproc {

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a of the experiment name mixed with the trial number.
std::uint64_t stream_id(std::string_view experiment, std::uint64_t trial);

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  /// Real and imaginary parts independent with variance 1/2 each.
  cplx complex_normal();
  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);

  /// Independent child stream keyed by this stream's identity and `child`.
  RngStream split(std::uint64_t child) const;

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n)
  std::size_t n = 0;
};

MeanEstimate mean_and_stderr(std::span<const double> values);

/// Runs fn(i) for i in [0, count) on up to `workers` threads and returns the
/// results in index order. The first exception by index is rethrown.
template <class Fn>
auto parallel_map(std::size_t count, std::size_t workers, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace qproc
