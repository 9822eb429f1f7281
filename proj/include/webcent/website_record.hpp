#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "webcent/layer.hpp"

namespace webcent {

inline constexpr std::string_view kAnycast = "anycast";

// AS organization resolved for one IP address.
struct NetworkProvider {
  std::uint32_t asn = 0;
  std::string org_id;
  std::string org_name;
  std::string hq;  // ISO alpha-2, empty when unknown

  bool operator==(const NetworkProvider&) const = default;
};

struct CaProvider {
  std::string owner;
  std::string hq;

  bool operator==(const CaProvider&) const = default;
};

// One popular website in one country's toplist, annotated per layer. A
// disengaged optional means the layer could not be resolved for this site.
struct WebsiteRecord {
  std::string domain;
  std::string country;
  std::string tld;  // empty when the domain has no TLD label
  std::optional<NetworkProvider> hosting;
  std::optional<NetworkProvider> dns;
  std::string hosting_continent;  // continent code, "anycast", or empty
  std::string dns_continent;
  std::optional<CaProvider> ca;

  bool operator==(const WebsiteRecord&) const = default;
};

// Provider key a record contributes to a layer's distribution.
std::optional<std::string> provider_key(const WebsiteRecord& record, Layer layer);

// Headquarters country of the record's provider at a layer; nullopt when the
// provider or its headquarters is unknown. Not defined for the TLD layer.
std::optional<std::string> provider_hq(const WebsiteRecord& record, Layer layer);

void to_json(nlohmann::json& j, const WebsiteRecord& record);
void from_json(const nlohmann::json& j, WebsiteRecord& record);

}  // namespace webcent
