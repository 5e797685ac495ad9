#pragma once

// Receive-only live capture on a Linux packet socket. The class has no
// transmit path; frames are only ever read.

#include "macid/capture.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>

#if defined(__linux__)
#include <arpa/inet.h>
#include <linux/if_packet.h>
#include <net/ethernet.h>
#include <net/if.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>
#endif

namespace macid {

struct LiveOptions {
  std::string interface;
  bool promiscuous = true;
  std::optional<std::chrono::milliseconds> duration;
  std::optional<std::uint64_t> max_packets;
  /// Checked between reads; set from a signal handler to stop early.
  const std::atomic<bool>* stop = nullptr;
};

#if defined(__linux__)

class LiveCapture {
public:
  explicit LiveCapture(LiveOptions opts) : opts_{std::move(opts)} {
    const auto index = ::if_nametoindex(opts_.interface.c_str());
    if (index == 0)
      throw std::system_error(errno, std::generic_category(),
                              "unknown interface '" + opts_.interface + "'");
    fd_ = ::socket(AF_PACKET, SOCK_RAW, htons(ETH_P_ALL));
    if (fd_ < 0)
      throw std::system_error(errno, std::generic_category(),
                              "cannot open packet socket (needs CAP_NET_RAW)");
    sockaddr_ll addr{};
    addr.sll_family = AF_PACKET;
    addr.sll_protocol = htons(ETH_P_ALL);
    addr.sll_ifindex = static_cast<int>(index);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
      fail("cannot bind to '" + opts_.interface + "'");
    if (opts_.promiscuous) {
      packet_mreq mreq{};
      mreq.mr_ifindex = static_cast<int>(index);
      mreq.mr_type = PACKET_MR_PROMISC;
      if (::setsockopt(fd_, SOL_PACKET, PACKET_ADD_MEMBERSHIP, &mreq,
                       sizeof mreq) != 0)
        fail("cannot enable promiscuous mode");
    }
    int on = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_TIMESTAMPNS, &on, sizeof on);
    started_ = std::chrono::steady_clock::now();
  }

  LiveCapture(const LiveCapture&) = delete;
  auto operator=(const LiveCapture&) -> LiveCapture& = delete;

  ~LiveCapture() {
    if (fd_ >= 0)
      ::close(fd_);
  }

  auto packet_count() const noexcept -> std::uint64_t { return count_; }

  auto next() -> std::optional<RawPacket> {
    std::uint8_t buf[65536];
    while (true) {
      if (opts_.max_packets && count_ >= *opts_.max_packets)
        return std::nullopt;
      if (opts_.stop && opts_.stop->load())
        return std::nullopt;
      int timeout = 200;
      if (opts_.duration) {
        const auto left =
            *opts_.duration -
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started_);
        if (left.count() <= 0)
          return std::nullopt;
        timeout = static_cast<int>(std::min<long long>(left.count(), 200));
      }
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, timeout);
      if (ready < 0) {
        if (errno == EINTR)
          continue;
        fail("poll failed");
      }
      if (ready == 0)
        continue;

      iovec iov{buf, sizeof buf};
      alignas(cmsghdr) char control[CMSG_SPACE(sizeof(timespec))];
      msghdr msg{};
      msg.msg_iov = &iov;
      msg.msg_iovlen = 1;
      msg.msg_control = control;
      msg.msg_controllen = sizeof control;
      const auto n = ::recvmsg(fd_, &msg, MSG_TRUNC);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN)
          continue;
        fail("receive failed");
      }
      RawPacket p;
      p.timestamp = receive_time(msg);
      p.original_length = static_cast<std::uint32_t>(n);
      const auto kept = std::min<std::size_t>(static_cast<std::size_t>(n),
                                              sizeof buf);
      p.bytes.assign(buf, buf + kept);
      ++count_;
      return p;
    }
  }

private:
  [[noreturn]] void fail(const std::string& what) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    throw std::system_error(err, std::generic_category(), what);
  }

  static auto receive_time(msghdr& msg) -> Nanos {
    for (auto* c = CMSG_FIRSTHDR(&msg); c; c = CMSG_NXTHDR(&msg, c)) {
      if (c->cmsg_level == SOL_SOCKET && c->cmsg_type == SO_TIMESTAMPNS) {
        timespec ts{};
        std::memcpy(&ts, CMSG_DATA(c), sizeof ts);
        return Nanos{std::int64_t{ts.tv_sec} * 1'000'000'000 + ts.tv_nsec};
      }
    }
    return std::chrono::duration_cast<Nanos>(
        std::chrono::system_clock::now().time_since_epoch());
  }

  LiveOptions opts_;
  int fd_ = -1;
  std::uint64_t count_ = 0;
  std::chrono::steady_clock::time_point started_;
};

inline constexpr bool live_capture_supported = true;

#else

class LiveCapture {
public:
  explicit LiveCapture(LiveOptions) {
    throw std::runtime_error("live capture is only supported on Linux");
  }
  auto next() -> std::optional<RawPacket> { return std::nullopt; }
};

inline constexpr bool live_capture_supported = false;

#endif

} // namespace macid
