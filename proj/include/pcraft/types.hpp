#pragma once

#include <array>
#include <string>
#include <string_view>

#include "pcraft/error.hpp"

namespace pcraft {

enum class NodeVariant { native, ft_ilr, ft_tx };
enum class Deployment { cloud, on_premises };
/// Over-provisioning technique: passive failover or active route anywhere.
enum class Technique { passive_failover, active_route_anywhere };

inline constexpr std::array kAllVariants{NodeVariant::native, NodeVariant::ft_ilr, NodeVariant::ft_tx};

inline std::string to_string(NodeVariant v) {
  switch (v) {
    case NodeVariant::native: return "native";
    case NodeVariant::ft_ilr: return "ft_ilr";
    case NodeVariant::ft_tx: return "ft_tx";
  }
  return "?";
}

inline std::string to_string(Deployment d) {
  return d == Deployment::cloud ? "cloud" : "on-premises";
}

inline std::string to_string(Technique t) {
  return t == Technique::passive_failover ? "pf" : "ara";
}

inline NodeVariant parse_variant(std::string_view s) {
  if (s == "native") return NodeVariant::native;
  if (s == "ft_ilr") return NodeVariant::ft_ilr;
  if (s == "ft_tx") return NodeVariant::ft_tx;
  throw InvalidArgument("unknown node variant '" + std::string(s) + "' (expected native, ft_ilr or ft_tx)");
}

inline Deployment parse_deployment(std::string_view s) {
  if (s == "cloud") return Deployment::cloud;
  if (s == "on-premises" || s == "on_premises" || s == "onprem") return Deployment::on_premises;
  throw InvalidArgument("unknown deployment '" + std::string(s) + "' (expected cloud or on-premises)");
}

inline Technique parse_technique(std::string_view s) {
  if (s == "pf" || s == "PF" || s == "passive_failover") return Technique::passive_failover;
  if (s == "ara" || s == "ARA" || s == "active_route_anywhere") return Technique::active_route_anywhere;
  throw InvalidArgument("unknown technique '" + std::string(s) + "' (expected pf or ara)");
}

}  // namespace pcraft
