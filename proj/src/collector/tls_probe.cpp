#include "webcent/collector/tls_probe.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <openssl/err.h>
#include <openssl/ssl.h>
#include <openssl/x509.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <csignal>
#include <cstring>

#include "webcent/error.hpp"

namespace webcent::collector {

namespace {

using Clock = std::chrono::steady_clock;

int capture_index() {
  static const int index = SSL_get_ex_new_index(0, nullptr, nullptr, nullptr, nullptr);
  return index;
}

// Called once the server's Certificate message is in. The first element of
// the untrusted chain is the leaf as sent by the server.
int capture_leaf(X509_STORE_CTX* store, void*) {
  auto* ssl = static_cast<SSL*>(X509_STORE_CTX_get_ex_data(store, SSL_get_ex_data_X509_STORE_CTX_idx()));
  auto* slot = static_cast<X509**>(SSL_get_ex_data(ssl, capture_index()));
  X509* leaf = X509_STORE_CTX_get0_cert(store);
  if (slot && leaf && !*slot) {
    X509_up_ref(leaf);
    *slot = leaf;
  }
  return 1;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::optional<std::string> issuer_organization(X509* cert) {
  X509_NAME* issuer = X509_get_issuer_name(cert);
  const int index = X509_NAME_get_index_by_NID(issuer, NID_organizationName, -1);
  if (index < 0) return std::nullopt;
  unsigned char* utf8 = nullptr;
  const int len = ASN1_STRING_to_UTF8(&utf8, X509_NAME_ENTRY_get_data(X509_NAME_get_entry(issuer, index)));
  if (len < 0) return std::nullopt;
  std::string value(reinterpret_cast<char*>(utf8), static_cast<std::size_t>(len));
  OPENSSL_free(utf8);
  value = collapse_whitespace(value);
  if (value.empty()) return std::nullopt;
  return value;
}

std::string errno_text(int err) {
  switch (err) {
    case ECONNREFUSED: return "connection refused";
    case EHOSTUNREACH: return "host unreachable";
    case ENETUNREACH: return "network unreachable";
    case ETIMEDOUT: return "timeout";
    default: return std::strerror(err);
  }
}

class Fd {
 public:
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }

 private:
  int fd_;
};

// Non-blocking connect bounded by `deadline`. Returns an error text or "".
std::string connect_to(int& fd_out, const std::string& ip, std::uint16_t port, Clock::time_point deadline) {
  sockaddr_storage storage{};
  socklen_t length = 0;
  auto* v4 = reinterpret_cast<sockaddr_in*>(&storage);
  auto* v6 = reinterpret_cast<sockaddr_in6*>(&storage);
  if (::inet_pton(AF_INET, ip.c_str(), &v4->sin_addr) == 1) {
    v4->sin_family = AF_INET;
    v4->sin_port = htons(port);
    length = sizeof(sockaddr_in);
  } else if (::inet_pton(AF_INET6, ip.c_str(), &v6->sin6_addr) == 1) {
    v6->sin6_family = AF_INET6;
    v6->sin6_port = htons(port);
    length = sizeof(sockaddr_in6);
  } else {
    return "invalid address";
  }
  fd_out = ::socket(storage.ss_family, SOCK_STREAM | SOCK_NONBLOCK | SOCK_CLOEXEC, 0);
  if (fd_out < 0) return errno_text(errno);
  if (::connect(fd_out, reinterpret_cast<sockaddr*>(&storage), length) == 0) return {};
  if (errno != EINPROGRESS) return errno_text(errno);
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) return "timeout";
    pollfd p{fd_out, POLLOUT, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return rc == 0 ? "timeout" : errno_text(errno);
    break;
  }
  int err = 0;
  socklen_t len = sizeof err;
  ::getsockopt(fd_out, SOL_SOCKET, SO_ERROR, &err, &len);
  return err == 0 ? std::string() : errno_text(err);
}

}  // namespace

struct OpenSslProber::Context {
  SSL_CTX* ctx = nullptr;
};

OpenSslProber::OpenSslProber(std::uint16_t port, std::chrono::milliseconds timeout)
    : ctx_(std::make_unique<Context>()), port_(port), timeout_(timeout) {
  if (timeout.count() <= 0) throw InvalidArgument("TLS timeout must be positive");
  // A peer closing mid-handshake must not kill the process.
  std::signal(SIGPIPE, SIG_IGN);
  ctx_->ctx = SSL_CTX_new(TLS_client_method());
  if (!ctx_->ctx) throw Error("cannot create TLS context");
  SSL_CTX_set_verify(ctx_->ctx, SSL_VERIFY_NONE, nullptr);
  SSL_CTX_set_cert_verify_callback(ctx_->ctx, capture_leaf, nullptr);
  capture_index();
}

OpenSslProber::~OpenSslProber() {
  if (ctx_ && ctx_->ctx) SSL_CTX_free(ctx_->ctx);
}

TlsResult OpenSslProber::fetch_leaf_issuer(const std::string& ip, const std::string& sni) {
  const auto deadline = Clock::now() + timeout_;
  int raw_fd = -1;
  const std::string connect_error = connect_to(raw_fd, ip, port_, deadline);
  Fd fd(raw_fd);
  if (!connect_error.empty()) return {std::nullopt, connect_error};

  SSL* ssl = SSL_new(ctx_->ctx);
  if (!ssl) return {std::nullopt, "tls setup failed"};
  X509* leaf = nullptr;
  SSL_set_ex_data(ssl, capture_index(), &leaf);
  SSL_set_fd(ssl, fd.get());
  if (!sni.empty()) SSL_set_tlsext_host_name(ssl, sni.c_str());

  std::string error;
  for (;;) {
    const int rc = SSL_connect(ssl);
    if (rc == 1 || leaf) break;
    const int why = SSL_get_error(ssl, rc);
    short events = 0;
    if (why == SSL_ERROR_WANT_READ) {
      events = POLLIN;
    } else if (why == SSL_ERROR_WANT_WRITE) {
      events = POLLOUT;
    } else {
      const unsigned long code = ERR_peek_error();
      const char* reason = code ? ERR_reason_error_string(code) : nullptr;
      error = reason ? reason : "handshake failed";
      break;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    pollfd p{fd.get(), events, 0};
    if (left <= 0 || ::poll(&p, 1, static_cast<int>(left)) <= 0) {
      error = "timeout";
      break;
    }
  }
  ERR_clear_error();
  SSL_set_ex_data(ssl, capture_index(), nullptr);
  SSL_free(ssl);

  if (!leaf) return {std::nullopt, error.empty() ? "no certificate" : error};
  TlsResult out;
  out.issuer = issuer_organization(leaf);
  X509_free(leaf);
  if (!out.issuer) out.error = "issuer has no organization";
  return out;
}

}  // namespace webcent::collector
