#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace skyoct {

struct Ipv4Address {
  std::uint32_t value = 0;

  static Ipv4Address parse(std::string_view text);
  std::string to_string() const;

  auto operator<=>(const Ipv4Address&) const = default;
};

// An IPv4 prefix; the network address always has its host bits cleared.
class Cidr {
 public:
  Cidr() = default;
  Cidr(Ipv4Address network, int length);

  static Cidr parse(std::string_view text);
  static Cidr host(Ipv4Address addr) { return Cidr(addr, 32); }

  Ipv4Address network() const { return network_; }
  int length() const { return length_; }
  std::uint32_t mask() const { return length_ == 0 ? 0u : ~0u << (32 - length_); }
  bool contains(Ipv4Address addr) const { return (addr.value & mask()) == network_.value; }
  bool contains(const Cidr& other) const { return other.length_ >= length_ && contains(other.network_); }

  // Requires length() > 0.
  Cidr parent() const;
  Cidr sibling() const;

  std::string to_string() const;

  auto operator<=>(const Cidr&) const = default;

 private:
  Ipv4Address network_{};
  int length_ = 0;
};

}  // namespace skyoct
