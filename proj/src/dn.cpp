#include "saz/dn.hpp"

#include <cctype>

#include "saz/error.hpp"

namespace saz {
namespace {

bool valid_attribute(std::string_view a) {
  if (a.empty() || !std::isalpha(static_cast<unsigned char>(a[0]))) return false;
  for (char c : a) {
    auto u = static_cast<unsigned char>(c);
    if (u >= 0x80 || !std::isalnum(u)) return false;
  }
  return true;
}

bool valid_value(std::string_view v) {
  if (v.empty()) return false;
  for (char c : v) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x20 || u == 0x7f) return false;
  }
  return true;
}

}  // namespace

DistinguishedName::DistinguishedName(std::vector<DnComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw Error(Errc::MalformedDN, "empty DN");
  for (const auto& c : components_) {
    if (!valid_attribute(c.attribute))
      throw Error(Errc::MalformedDN, "bad attribute '" + c.attribute + "'");
    if (!valid_value(c.value))
      throw Error(Errc::MalformedDN, "bad value for attribute " + c.attribute);
  }
}

DistinguishedName DistinguishedName::with_proxy() const {
  auto comps = components_;
  comps.push_back(kProxyComponent);
  return DistinguishedName(std::move(comps));
}

bool DistinguishedName::ends_with_proxy() const { return components_.back() == kProxyComponent; }

std::string serialize_dn(const DistinguishedName& dn) {
  std::string out;
  for (const auto& c : dn.components()) {
    out += '/';
    out += c.attribute;
    out += '=';
    for (char ch : c.value) {
      if (ch == '/' || ch == '\\') out += '\\';
      out += ch;
    }
  }
  return out;
}

DistinguishedName parse_dn(std::string_view text) {
  if (text.empty()) throw Error(Errc::MalformedDN, "empty input");
  if (text[0] != '/') throw Error(Errc::MalformedDN, "missing leading '/'");

  std::vector<DnComponent> comps;
  std::size_t i = 1;
  while (true) {
    DnComponent comp;
    while (i < text.size() && text[i] != '=' && text[i] != '/') comp.attribute += text[i++];
    if (i >= text.size() || text[i] != '=')
      throw Error(Errc::MalformedDN, "component without '='");
    ++i;
    while (i < text.size() && text[i] != '/') {
      if (text[i] == '\\') {
        if (i + 1 >= text.size()) throw Error(Errc::MalformedDN, "dangling escape");
        char next = text[i + 1];
        if (next != '/' && next != '\\') throw Error(Errc::MalformedDN, "invalid escape");
        comp.value += next;
        i += 2;
      } else {
        comp.value += text[i++];
      }
    }
    if (comp.attribute.empty()) throw Error(Errc::MalformedDN, "empty attribute");
    if (comp.value.empty()) throw Error(Errc::MalformedDN, "empty value");
    comps.push_back(std::move(comp));
    if (i >= text.size()) break;
    ++i;  // skip '/'
  }
  return DistinguishedName(std::move(comps));
}

DistinguishedName extract_base_dn(const DistinguishedName& leaf_subject) {
  auto comps = leaf_subject.components();
  while (comps.size() > 1 && comps.back() == kProxyComponent) comps.pop_back();
  return DistinguishedName(std::move(comps));
}

}  // namespace saz
