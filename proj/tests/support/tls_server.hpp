#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace webcent::testing {

struct TlsServerOptions {
  // O= of the leaf's issuer; nullopt leaves the issuer with a CN only.
  std::optional<std::string> issuer_org = "TestCA";
  // Leaf signed by an intermediate whose own issuer is `root_org`; the
  // server sends leaf and intermediate.
  bool chain = false;
  std::string root_org = "Root Authority";
  // Accept connections but never speak TLS.
  bool silent = false;
};

// TLS server on 127.0.0.1 with a freshly generated certificate chain.
class TlsTestServer {
 public:
  explicit TlsTestServer(TlsServerOptions options = {});
  ~TlsTestServer();
  TlsTestServer(const TlsTestServer&) = delete;
  TlsTestServer& operator=(const TlsTestServer&) = delete;

  std::uint16_t port() const;
  std::size_t connections() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// A loopback port with nothing listening on it.
std::uint16_t closed_port();

}  // namespace webcent::testing
