#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <utility>
#include <vector>

#include "webcent/ingest/csv.hpp"
#include "webcent/ingest/ip.hpp"

namespace webcent::ingest {

// Binary trie keyed by prefix bits, one root per address family. Lookup walks
// the address bits and remembers the deepest node carrying a value.
template <typename Value>
class PrefixTrie {
 public:
  PrefixTrie() : nodes_(2) {}

  // Inserting an existing prefix replaces its value.
  void insert(const Prefix& prefix, Value value) {
    std::uint32_t node = root(prefix.network.family());
    for (int i = 0; i < prefix.length; ++i) {
      const int b = prefix.network.bit(i);
      if (nodes_[node].child[b] == 0) {
        nodes_[node].child[b] = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
      }
      node = nodes_[node].child[b];
    }
    if (!nodes_[node].value) ++size_;
    nodes_[node].value = std::move(value);
  }

  // Value and length of the longest prefix containing `ip`.
  std::optional<std::pair<Value, int>> longest_match(const IpAddress& ip) const {
    std::uint32_t node = root(ip.family());
    std::optional<std::pair<Value, int>> best;
    if (nodes_[node].value) best.emplace(*nodes_[node].value, 0);
    for (int i = 0; i < ip.bit_width(); ++i) {
      node = nodes_[node].child[ip.bit(i)];
      if (node == 0) break;
      if (nodes_[node].value) best.emplace(*nodes_[node].value, i + 1);
    }
    return best;
  }

  std::size_t size() const { return size_; }

 private:
  struct Node {
    std::uint32_t child[2] = {0, 0};  // 0 means absent; node 0 is never a child
    std::optional<Value> value;
  };

  static std::uint32_t root(Family family) { return family == Family::V4 ? 0 : 1; }

  std::vector<Node> nodes_;
  std::size_t size_ = 0;
};

// Prefix to origin ASN, longest-prefix match.
class PrefixTable {
 public:
  void insert(const Prefix& prefix, std::uint32_t asn);
  std::optional<std::uint32_t> lookup(const IpAddress& ip) const;
  std::size_t size() const { return trie_.size(); }

  // Rows whose origin field lists several ASNs ("12_34" or "12,34"); the first
  // one is used.
  std::size_t multi_origin_rows() const { return multi_origin_rows_; }

  // Whitespace-separated `prefix length asn` lines; '#' comments allowed.
  static PrefixTable load(std::istream& in, ParseReport& report);

 private:
  PrefixTrie<std::uint32_t> trie_;
  std::size_t multi_origin_rows_ = 0;
};

// Prefixes announced from many locations.
class AnycastSet {
 public:
  void insert(const Prefix& prefix) { trie_.insert(prefix, true); }
  bool contains(const IpAddress& ip) const { return trie_.longest_match(ip).has_value(); }
  std::size_t size() const { return trie_.size(); }

  // One CIDR per line; '#' comments allowed.
  static AnycastSet load(std::istream& in, ParseReport& report);

 private:
  PrefixTrie<bool> trie_;
};

}  // namespace webcent::ingest
