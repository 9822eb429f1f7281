#include "webcent/layer.hpp"

namespace webcent {

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::Hosting: return "hosting";
    case Layer::Dns: return "dns";
    case Layer::Tld: return "tld";
    case Layer::Ca: return "ca";
  }
  return "unknown";
}

std::optional<Layer> parse_layer(std::string_view name) {
  for (Layer layer : kAllLayers) {
    if (to_string(layer) == name) return layer;
  }
  return std::nullopt;
}

}  // namespace webcent
