#pragma once

#include <atomic>
#include <exception>
#include <thread>

namespace msw {

template <typename T>
std::vector<T> run_parallel(const std::vector<std::function<T()>>& jobs, int workers) {
  std::vector<std::optional<T>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i].emplace(jobs[i]());
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  out.reserve(jobs.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace msw
