#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace mmlab {

template <class Result, class Fn>
std::vector<Result> run_batches(std::size_t batches, unsigned jobs, Fn&& fn) {
  std::vector<Result> out(batches);
  if (jobs <= 1 || batches <= 1) {
    for (std::size_t b = 0; b < batches; ++b) out[b] = fn(b);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(batches);
  auto worker = [&] {
    for (std::size_t b = next++; b < batches; b = next++) {
      try {
        out[b] = fn(b);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const auto n = std::min<std::size_t>(jobs, batches);
  for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace mmlab
