#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>

namespace hstream::pipeline {

/// Blocking single-producer single-consumer hand-off with a fixed capacity.
/// close() lets the consumer drain what is left; abort() wakes both sides
/// and drops everything.
template <class T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity = 2) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("queue capacity must be at least 1");
  }

  BoundedQueue(const BoundedQueue&) = delete;
  BoundedQueue& operator=(const BoundedQueue&) = delete;

  /// Blocks while full. Returns false if the queue was closed or aborted.
  bool push(T item) {
    std::unique_lock lock(mutex_);
    if (items_.size() >= capacity_ && !closed_ && !aborted_) {
      const auto t0 = std::chrono::steady_clock::now();
      not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_ || aborted_; });
      blocked_push_ += std::chrono::steady_clock::now() - t0;
      ++blocked_pushes_;
    }
    if (closed_ || aborted_) return false;
    items_.push_back(std::move(item));
    high_water_ = std::max(high_water_, items_.size());
    not_empty_.notify_one();
    return true;
  }

  /// Blocks while empty. Returns nullopt once closed and drained, or aborted.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_ || aborted_; });
    if (aborted_ || items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  void abort() {
    std::lock_guard lock(mutex_);
    aborted_ = true;
    items_.clear();
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }
  /// Largest number of items ever resident at once.
  std::size_t high_water() const {
    std::lock_guard lock(mutex_);
    return high_water_;
  }
  /// Total time push() spent waiting for space, in seconds.
  double blocked_push_seconds() const {
    std::lock_guard lock(mutex_);
    return std::chrono::duration<double>(blocked_push_).count();
  }
  std::size_t blocked_pushes() const {
    std::lock_guard lock(mutex_);
    return blocked_pushes_;
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<T> items_;
  bool closed_ = false;
  bool aborted_ = false;
  std::size_t high_water_ = 0;
  std::size_t blocked_pushes_ = 0;
  std::chrono::steady_clock::duration blocked_push_{};
};

}  // namespace hstream::pipeline
