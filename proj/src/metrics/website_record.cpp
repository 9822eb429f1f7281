#include "webcent/website_record.hpp"

namespace webcent {

std::optional<std::string> provider_key(const WebsiteRecord& record, Layer layer) {
  switch (layer) {
    case Layer::Hosting:
      if (record.hosting) return record.hosting->org_id;
      break;
    case Layer::Dns:
      if (record.dns) return record.dns->org_id;
      break;
    case Layer::Tld:
      if (!record.tld.empty()) return record.tld;
      break;
    case Layer::Ca:
      if (record.ca) return record.ca->owner;
      break;
  }
  return std::nullopt;
}

std::optional<std::string> provider_hq(const WebsiteRecord& record, Layer layer) {
  const std::string* hq = nullptr;
  switch (layer) {
    case Layer::Hosting:
      if (record.hosting) hq = &record.hosting->hq;
      break;
    case Layer::Dns:
      if (record.dns) hq = &record.dns->hq;
      break;
    case Layer::Ca:
      if (record.ca) hq = &record.ca->hq;
      break;
    case Layer::Tld:
      break;
  }
  if (hq == nullptr || hq->empty()) return std::nullopt;
  return *hq;
}

namespace {

nlohmann::json network_json(const std::optional<NetworkProvider>& p) {
  if (!p) return nullptr;
  return {{"asn", p->asn}, {"org_id", p->org_id}, {"org_name", p->org_name}, {"hq", p->hq}};
}

std::optional<NetworkProvider> network_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  NetworkProvider p;
  j.at("asn").get_to(p.asn);
  j.at("org_id").get_to(p.org_id);
  j.at("org_name").get_to(p.org_name);
  j.at("hq").get_to(p.hq);
  return p;
}

}  // namespace

void to_json(nlohmann::json& j, const WebsiteRecord& r) {
  j = nlohmann::json{{"domain", r.domain},
                     {"country", r.country},
                     {"tld", r.tld},
                     {"hosting", network_json(r.hosting)},
                     {"dns", network_json(r.dns)},
                     {"hosting_continent", r.hosting_continent},
                     {"dns_continent", r.dns_continent}};
  if (r.ca) {
    j["ca"] = {{"owner", r.ca->owner}, {"hq", r.ca->hq}};
  } else {
    j["ca"] = nullptr;
  }
}

void from_json(const nlohmann::json& j, WebsiteRecord& r) {
  j.at("domain").get_to(r.domain);
  j.at("country").get_to(r.country);
  j.at("tld").get_to(r.tld);
  r.hosting = network_from(j.at("hosting"));
  r.dns = network_from(j.at("dns"));
  j.at("hosting_continent").get_to(r.hosting_continent);
  j.at("dns_continent").get_to(r.dns_continent);
  const auto& ca = j.at("ca");
  if (ca.is_null()) {
    r.ca.reset();
  } else {
    r.ca = CaProvider{ca.at("owner").get<std::string>(), ca.at("hq").get<std::string>()};
  }
}

}  // namespace webcent
