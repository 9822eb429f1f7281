#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace webcent {

// Web-infrastructure layer. The enumerator order is the report order.
enum class Layer { Hosting, Dns, Tld, Ca };

inline constexpr std::array<Layer, 4> kAllLayers = {Layer::Hosting, Layer::Dns, Layer::Tld,
                                                    Layer::Ca};

std::string_view to_string(Layer layer);
std::optional<Layer> parse_layer(std::string_view name);

}  // namespace webcent
