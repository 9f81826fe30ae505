#pragma once

#include <compare>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace saz {

struct DnComponent {
  std::string attribute;
  std::string value;

  friend auto operator<=>(const DnComponent&, const DnComponent&) = default;
};

/// Ordered attribute/value list naming a certificate subject. Always valid once constructed:
/// non-empty, attributes match [A-Za-z][A-Za-z0-9]*, values non-empty and free of control
/// characters.
class DistinguishedName {
 public:
  explicit DistinguishedName(std::vector<DnComponent> components);
  DistinguishedName(std::initializer_list<DnComponent> components)
      : DistinguishedName(std::vector<DnComponent>(components)) {}

  const std::vector<DnComponent>& components() const noexcept { return components_; }
  std::size_t size() const noexcept { return components_.size(); }

  /// This DN extended by one trailing ("CN","proxy") component.
  DistinguishedName with_proxy() const;
  bool ends_with_proxy() const;

  friend auto operator<=>(const DistinguishedName&, const DistinguishedName&) = default;
  friend bool operator==(const DistinguishedName&, const DistinguishedName&) = default;

 private:
  std::vector<DnComponent> components_;
};

inline const DnComponent kProxyComponent{"CN", "proxy"};

/// Slash notation, "/" and "\" in values escaped with a backslash.
std::string serialize_dn(const DistinguishedName& dn);
/// Exact inverse of serialize_dn; throws Error(MalformedDN).
DistinguishedName parse_dn(std::string_view text);

/// Strips all trailing ("CN","proxy") components, never below one component.
DistinguishedName extract_base_dn(const DistinguishedName& leaf_subject);

}  // namespace saz
