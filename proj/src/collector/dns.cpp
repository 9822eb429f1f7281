#include "webcent/collector/dns.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <random>

#include "webcent/error.hpp"

namespace webcent::collector {

namespace {

using Clock = std::chrono::steady_clock;

class Socket {
 public:
  explicit Socket(int fd) : fd_(fd) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }

 private:
  int fd_;
};

struct SockAddr {
  sockaddr_storage storage{};
  socklen_t length = 0;
};

SockAddr to_sockaddr(const Endpoint& e) {
  SockAddr out;
  auto* v4 = reinterpret_cast<sockaddr_in*>(&out.storage);
  auto* v6 = reinterpret_cast<sockaddr_in6*>(&out.storage);
  if (::inet_pton(AF_INET, e.host.c_str(), &v4->sin_addr) == 1) {
    v4->sin_family = AF_INET;
    v4->sin_port = htons(e.port);
    out.length = sizeof(sockaddr_in);
  } else if (::inet_pton(AF_INET6, e.host.c_str(), &v6->sin6_addr) == 1) {
    v6->sin6_family = AF_INET6;
    v6->sin6_port = htons(e.port);
    out.length = sizeof(sockaddr_in6);
  } else {
    throw InvalidArgument("not an IP address: " + e.host);
  }
  return out;
}

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left > 0 ? static_cast<int>(left) : 0;
}

bool wait_for(int fd, short events, Clock::time_point deadline) {
  for (;;) {
    pollfd p{fd, events, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) return false;
  }
}

std::uint16_t next_id() {
  static std::atomic<std::uint32_t> counter{std::random_device{}()};
  return static_cast<std::uint16_t>(counter.fetch_add(1, std::memory_order_relaxed));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> msg) : msg_(msg) {}

  bool u8(std::uint8_t& v) {
    if (pos_ + 1 > msg_.size()) return false;
    v = msg_[pos_++];
    return true;
  }
  bool u16(std::uint16_t& v) {
    if (pos_ + 2 > msg_.size()) return false;
    v = static_cast<std::uint16_t>(msg_[pos_] << 8 | msg_[pos_ + 1]);
    pos_ += 2;
    return true;
  }
  bool skip(std::size_t n) {
    if (pos_ + n > msg_.size()) return false;
    pos_ += n;
    return true;
  }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }

  // Reads a possibly compressed name starting at the cursor.
  bool name(std::string& out) {
    out.clear();
    std::size_t at = pos_;
    bool jumped = false;
    for (int hops = 0; hops < 128; ++hops) {
      if (at >= msg_.size()) return false;
      const std::uint8_t len = msg_[at];
      if (len == 0) {
        if (!jumped) pos_ = at + 1;
        return true;
      }
      if ((len & 0xC0) == 0xC0) {
        if (at + 1 >= msg_.size()) return false;
        if (!jumped) pos_ = at + 2;
        jumped = true;
        at = static_cast<std::size_t>((len & 0x3F) << 8 | msg_[at + 1]);
        continue;
      }
      if ((len & 0xC0) != 0 || at + 1 + len > msg_.size()) return false;
      if (!out.empty()) out.push_back('.');
      for (std::size_t i = 0; i < len; ++i) {
        out.push_back(static_cast<char>(std::tolower(msg_[at + 1 + i])));
      }
      at += 1 + len;
    }
    return false;
  }

  std::span<const std::uint8_t> bytes(std::size_t n) const { return msg_.subspan(pos_, n); }

 private:
  std::span<const std::uint8_t> msg_;
  std::size_t pos_ = 0;
};

DnsAnswer timeout_answer() { return {DnsStatus::Timeout, {}, {}}; }

DnsAnswer error_answer(std::string detail) { return {DnsStatus::Error, {}, std::move(detail)}; }

std::optional<DecodedResponse> query_udp(const SockAddr& server, const std::vector<std::uint8_t>& query,
                                         std::uint16_t id, RecordType type, Clock::time_point deadline,
                                         std::string& error) {
  Socket sock(::socket(server.storage.ss_family, SOCK_DGRAM | SOCK_CLOEXEC, 0));
  if (sock.get() < 0 || ::connect(sock.get(), reinterpret_cast<const sockaddr*>(&server.storage), server.length) != 0 ||
      ::send(sock.get(), query.data(), query.size(), MSG_NOSIGNAL) < 0) {
    error = std::strerror(errno);
    return std::nullopt;
  }
  std::vector<std::uint8_t> buf(65535);
  while (wait_for(sock.get(), POLLIN, deadline)) {
    const ssize_t n = ::recv(sock.get(), buf.data(), buf.size(), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      error = errno == ECONNREFUSED ? "connection refused" : std::strerror(errno);
      return std::nullopt;
    }
    auto decoded = decode_response(std::span(buf.data(), static_cast<std::size_t>(n)), type);
    if (decoded && decoded->id == id) return decoded;
  }
  return std::nullopt;
}

bool write_all(int fd, const std::uint8_t* data, std::size_t size, Clock::time_point deadline) {
  while (size > 0) {
    if (!wait_for(fd, POLLOUT, deadline)) return false;
    const ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return false;
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

bool read_all(int fd, std::uint8_t* data, std::size_t size, Clock::time_point deadline) {
  while (size > 0) {
    if (!wait_for(fd, POLLIN, deadline)) return false;
    const ssize_t n = ::recv(fd, data, size, 0);
    if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
    if (n <= 0) return false;
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

std::optional<DecodedResponse> query_tcp(const SockAddr& server, const std::vector<std::uint8_t>& query,
                                         std::uint16_t id, RecordType type, Clock::time_point deadline,
                                         std::string& error) {
  Socket sock(::socket(server.storage.ss_family, SOCK_STREAM | SOCK_NONBLOCK | SOCK_CLOEXEC, 0));
  if (sock.get() < 0) {
    error = std::strerror(errno);
    return std::nullopt;
  }
  if (::connect(sock.get(), reinterpret_cast<const sockaddr*>(&server.storage), server.length) != 0 &&
      errno != EINPROGRESS) {
    error = errno == ECONNREFUSED ? "connection refused" : std::strerror(errno);
    return std::nullopt;
  }
  if (!wait_for(sock.get(), POLLOUT, deadline)) return std::nullopt;
  int so_error = 0;
  socklen_t len = sizeof so_error;
  ::getsockopt(sock.get(), SOL_SOCKET, SO_ERROR, &so_error, &len);
  if (so_error != 0) {
    error = so_error == ECONNREFUSED ? "connection refused" : std::strerror(so_error);
    return std::nullopt;
  }

  std::vector<std::uint8_t> framed{static_cast<std::uint8_t>(query.size() >> 8),
                                   static_cast<std::uint8_t>(query.size() & 0xFF)};
  framed.insert(framed.end(), query.begin(), query.end());
  std::uint8_t prefix[2];
  if (!write_all(sock.get(), framed.data(), framed.size(), deadline) ||
      !read_all(sock.get(), prefix, 2, deadline)) {
    return std::nullopt;
  }
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(prefix[0] << 8 | prefix[1]));
  if (!read_all(sock.get(), buf.data(), buf.size(), deadline)) return std::nullopt;
  auto decoded = decode_response(buf, type);
  if (!decoded || decoded->id != id) {
    error = "malformed response";
    return std::nullopt;
  }
  return decoded;
}

}  // namespace

Endpoint Endpoint::parse(std::string_view text, std::uint16_t default_port) {
  Endpoint e;
  e.port = default_port;
  std::string_view host = text;
  std::string_view port;
  if (!text.empty() && text.front() == '[') {
    const auto close = text.find(']');
    if (close == std::string_view::npos) throw InvalidArgument("malformed endpoint '" + std::string(text) + "'");
    host = text.substr(1, close - 1);
    const auto rest = text.substr(close + 1);
    if (!rest.empty()) {
      if (rest.front() != ':') throw InvalidArgument("malformed endpoint '" + std::string(text) + "'");
      port = rest.substr(1);
    }
  } else if (const auto colon = text.find(':'); colon != std::string_view::npos &&
                                                 text.find(':', colon + 1) == std::string_view::npos) {
    host = text.substr(0, colon);
    port = text.substr(colon + 1);
  }
  e.host = std::string(host);
  if (!port.empty() || (text.size() > 0 && text.back() == ':')) {
    unsigned value = 0;
    for (char c : port) {
      if (!std::isdigit(static_cast<unsigned char>(c)) || value > 65535) {
        throw InvalidArgument("malformed port in endpoint '" + std::string(text) + "'");
      }
      value = value * 10 + static_cast<unsigned>(c - '0');
    }
    if (port.empty() || value == 0 || value > 65535) {
      throw InvalidArgument("malformed port in endpoint '" + std::string(text) + "'");
    }
    e.port = static_cast<std::uint16_t>(value);
  }
  to_sockaddr(e);  // validates the host
  return e;
}

std::string Endpoint::to_string() const {
  const bool v6 = host.find(':') != std::string::npos;
  return (v6 ? "[" + host + "]" : host) + ":" + std::to_string(port);
}

std::string_view to_string(DnsStatus status) {
  switch (status) {
    case DnsStatus::Ok: return "ok";
    case DnsStatus::NxDomain: return "nxdomain";
    case DnsStatus::ServFail: return "servfail";
    case DnsStatus::Refused: return "refused";
    case DnsStatus::Timeout: return "timeout";
    case DnsStatus::Error: return "error";
  }
  return "error";
}

std::vector<std::uint8_t> encode_query(std::uint16_t id, std::string_view name, RecordType type) {
  std::vector<std::uint8_t> out{static_cast<std::uint8_t>(id >> 8), static_cast<std::uint8_t>(id & 0xFF),
                                0x01, 0x00,  // RD
                                0x00, 0x01,  // QDCOUNT
                                0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
  if (!name.empty() && name.back() == '.') name.remove_suffix(1);
  std::size_t start = 0;
  while (start < name.size()) {
    auto dot = name.find('.', start);
    if (dot == std::string_view::npos) dot = name.size();
    const std::size_t len = dot - start;
    if (len == 0 || len > 63) throw InvalidArgument("invalid DNS name '" + std::string(name) + "'");
    out.push_back(static_cast<std::uint8_t>(len));
    out.insert(out.end(), name.begin() + static_cast<std::ptrdiff_t>(start),
               name.begin() + static_cast<std::ptrdiff_t>(dot));
    start = dot + 1;
  }
  out.push_back(0);
  const auto t = static_cast<std::uint16_t>(type);
  out.push_back(static_cast<std::uint8_t>(t >> 8));
  out.push_back(static_cast<std::uint8_t>(t & 0xFF));
  out.push_back(0x00);
  out.push_back(0x01);  // IN
  return out;
}

std::optional<DecodedResponse> decode_response(std::span<const std::uint8_t> message, RecordType type) {
  Reader r(message);
  std::uint16_t id, flags, qd, an, ns, ar;
  if (!r.u16(id) || !r.u16(flags) || !r.u16(qd) || !r.u16(an) || !r.u16(ns) || !r.u16(ar)) return std::nullopt;
  if ((flags & 0x8000) == 0) return std::nullopt;

  DecodedResponse out;
  out.id = id;
  out.truncated = (flags & 0x0200) != 0;
  switch (flags & 0x000F) {
    case 0: out.answer.status = DnsStatus::Ok; break;
    case 2: out.answer.status = DnsStatus::ServFail; break;
    case 3: out.answer.status = DnsStatus::NxDomain; break;
    case 5: out.answer.status = DnsStatus::Refused; break;
    default:
      out.answer.status = DnsStatus::Error;
      out.answer.detail = "rcode " + std::to_string(flags & 0x000F);
  }

  std::string name;
  for (std::uint16_t i = 0; i < qd; ++i) {
    if (!r.name(name) || !r.skip(4)) return std::nullopt;
  }
  for (std::uint16_t i = 0; i < an; ++i) {
    std::uint16_t rtype, rclass, rdlength;
    if (!r.name(name) || !r.u16(rtype) || !r.u16(rclass) || !r.skip(4) || !r.u16(rdlength)) return std::nullopt;
    const std::size_t rdata = r.pos();
    if (rdata + rdlength > message.size()) return std::nullopt;
    if (rtype == static_cast<std::uint16_t>(type)) {
      char text[INET6_ADDRSTRLEN] = {};
      if (type == RecordType::A && rdlength == 4) {
        ::inet_ntop(AF_INET, r.bytes(4).data(), text, sizeof text);
        out.answer.values.emplace_back(text);
      } else if (type == RecordType::AAAA && rdlength == 16) {
        ::inet_ntop(AF_INET6, r.bytes(16).data(), text, sizeof text);
        out.answer.values.emplace_back(text);
      } else if (type == RecordType::NS || type == RecordType::CNAME) {
        std::string target;
        if (!r.name(target)) return std::nullopt;
        out.answer.values.push_back(target);
      }
    }
    r.seek(rdata + rdlength);
  }
  return out;
}

UdpStubResolver::UdpStubResolver(DnsConfig config) : config_(std::move(config)) {
  if (config_.timeout.count() <= 0) throw InvalidArgument("resolver timeout must be positive");
  if (config_.retries < 0) throw InvalidArgument("resolver retries must be non-negative");
  to_sockaddr(config_.server);
}

DnsAnswer UdpStubResolver::query(const std::string& name, RecordType type) {
  const SockAddr server = to_sockaddr(config_.server);
  std::string error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    const std::uint16_t id = next_id();
    std::vector<std::uint8_t> message;
    try {
      message = encode_query(id, name, type);
    } catch (const InvalidArgument& e) {
      return error_answer(e.what());
    }
    const auto deadline = Clock::now() + config_.timeout;
    auto response = query_udp(server, message, id, type, deadline, error);
    if (response && response->truncated) {
      response = query_tcp(server, message, id, type, Clock::now() + config_.timeout, error);
    }
    if (response) return response->answer;
    if (!error.empty()) return error_answer(error);
  }
  return timeout_answer();
}

}  // namespace webcent::collector
