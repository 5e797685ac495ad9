#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>

namespace macid {

/// Blocking multi-producer/multi-consumer FIFO with a fixed capacity.
/// `close()` wakes everyone; `pop()` then drains what is left and returns
/// nullopt once empty.
template <class T>
class BoundedQueue {
public:
  explicit BoundedQueue(std::size_t capacity)
      : capacity_{capacity == 0 ? 1 : capacity} {}

  /// False if the queue was closed before the item could be enqueued.
  auto push(T item) -> bool {
    std::unique_lock lock{mutex_};
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_)
      return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  auto pop() -> std::optional<T> {
    std::unique_lock lock{mutex_};
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty())
      return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock{mutex_};
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

private:
  std::size_t capacity_;
  std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  bool closed_ = false;
};

} // namespace macid
