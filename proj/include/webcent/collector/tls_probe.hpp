#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace webcent::collector {

struct TlsResult {
  std::optional<std::string> issuer;  // O= of the leaf certificate's issuer
  std::string error;                  // set when issuer is empty
};

// Implementations must be safe to call from several threads at once.
class TlsProber {
 public:
  virtual ~TlsProber() = default;
  virtual TlsResult fetch_leaf_issuer(const std::string& ip, const std::string& sni) = 0;
};

// Handshakes far enough to receive the server's certificate chain. The chain
// is not validated. Whitespace in the issuer is collapsed; case is kept.
class OpenSslProber : public TlsProber {
 public:
  OpenSslProber(std::uint16_t port, std::chrono::milliseconds timeout);
  ~OpenSslProber() override;
  OpenSslProber(const OpenSslProber&) = delete;
  OpenSslProber& operator=(const OpenSslProber&) = delete;

  TlsResult fetch_leaf_issuer(const std::string& ip, const std::string& sni) override;

 private:
  struct Context;
  std::unique_ptr<Context> ctx_;
  std::uint16_t port_;
  std::chrono::milliseconds timeout_;
};

}  // namespace webcent::collector
