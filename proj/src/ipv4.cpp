#include "skyoctopus/ipv4.hpp"

#include <charconv>

#include "skyoctopus/error.hpp"

namespace skyoct {

Ipv4Address Ipv4Address::parse(std::string_view text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    unsigned part = 0;
    const auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc() || next == p || part > 255 || next - p > 3) {
      fail(ErrorKind::kInput, "malformed IPv4 address '" + std::string(text) + "'");
    }
    value = (value << 8) | part;
    p = next;
    if (octet < 3) {
      if (p == end || *p != '.') fail(ErrorKind::kInput, "malformed IPv4 address '" + std::string(text) + "'");
      ++p;
    }
  }
  if (p != end) fail(ErrorKind::kInput, "malformed IPv4 address '" + std::string(text) + "'");
  return Ipv4Address{value};
}

std::string Ipv4Address::to_string() const {
  return std::to_string(value >> 24) + "." + std::to_string((value >> 16) & 0xff) + "." +
         std::to_string((value >> 8) & 0xff) + "." + std::to_string(value & 0xff);
}

Cidr::Cidr(Ipv4Address network, int length) : network_(network), length_(length) {
  if (length < 0 || length > 32) fail(ErrorKind::kInput, "prefix length out of [0, 32]");
  network_.value &= mask();
}

Cidr Cidr::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) fail(ErrorKind::kInput, "malformed CIDR '" + std::string(text) + "'");
  const Ipv4Address addr = Ipv4Address::parse(text.substr(0, slash));
  const std::string_view len_text = text.substr(slash + 1);
  int len = -1;
  const auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
  if (ec != std::errc() || ptr != len_text.data() + len_text.size() || len < 0 || len > 32) {
    fail(ErrorKind::kInput, "malformed CIDR '" + std::string(text) + "'");
  }
  Cidr c(addr, len);
  if (c.network_.value != addr.value) {
    fail(ErrorKind::kInput, "CIDR '" + std::string(text) + "' has host bits set");
  }
  return c;
}

Cidr Cidr::parent() const {
  if (length_ == 0) fail(ErrorKind::kInput, "0.0.0.0/0 has no parent");
  return Cidr(network_, length_ - 1);
}

Cidr Cidr::sibling() const {
  if (length_ == 0) fail(ErrorKind::kInput, "0.0.0.0/0 has no sibling");
  return Cidr(Ipv4Address{network_.value ^ (1u << (32 - length_))}, length_);
}

std::string Cidr::to_string() const { return network_.to_string() + "/" + std::to_string(length_); }

}  // namespace skyoct
