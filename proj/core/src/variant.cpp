#include "mrx/variant.hpp"

#include <array>
#include <utility>

#include "mrx/error.hpp"

namespace mrx {

namespace {

constexpr std::array<std::pair<Architecture, std::string_view>, 6> kArchitectures{{
    {Architecture::Full, "Full"},
    {Architecture::Base, "Base"},
    {Architecture::CA, "CA"},
    {Architecture::CP, "CP"},
    {Architecture::PlannerOnly, "PlannerOnly"},
    {Architecture::ReactiveOnly, "ReactiveOnly"},
}};

constexpr std::array<std::pair<AllocatorKind, std::string_view>, 4> kAllocators{{
    {AllocatorKind::Coupled, "coupled"},
    {AllocatorKind::Greedy, "greedy"},
    {AllocatorKind::Hungarian, "hungarian"},
    {AllocatorKind::Auction, "auction"},
}};

}  // namespace

std::string_view to_string(Architecture a) {
  for (const auto& [k, v] : kArchitectures) {
    if (k == a) return v;
  }
  return "Full";
}

std::string_view to_string(AllocatorKind a) {
  for (const auto& [k, v] : kAllocators) {
    if (k == a) return v;
  }
  return "coupled";
}

bool Variant::couples_assignment() const {
  return architecture != Architecture::Base && architecture != Architecture::CP;
}

SwitchMode Variant::switch_mode() const {
  switch (architecture) {
    case Architecture::Full:
    case Architecture::CP: return SwitchMode::Gated;
    case Architecture::ReactiveOnly: return SwitchMode::FixedReactive;
    default: return SwitchMode::FixedPlanner;
  }
}

std::string Variant::label() const {
  std::string out(to_string(architecture));
  out += '+';
  out += to_string(allocator);
  out += init == GateInit::Warm ? "+warm" : "+cold";
  out += adaptation == GateAdaptation::Adaptive ? "-adaptive" : "-static";
  return out;
}

Variant Variant::parse(std::string_view text) {
  Variant v;
  bool have_arch = false;
  while (!text.empty()) {
    const auto plus = text.find('+');
    const auto part = text.substr(0, plus);
    text.remove_prefix(plus == std::string_view::npos ? text.size() : plus + 1);
    bool matched = false;
    if (!have_arch) {
      for (const auto& [k, name] : kArchitectures) {
        if (part == name) {
          v.architecture = k;
          matched = have_arch = true;
        }
      }
      if (!matched) throw ConfigError("unknown variant architecture '" + std::string(part) + "'");
      continue;
    }
    for (const auto& [k, name] : kAllocators) {
      if (part == name) {
        v.allocator = k;
        matched = true;
      }
    }
    const auto dash = part.find('-');
    if (!matched && dash != std::string_view::npos) {
      const auto init = part.substr(0, dash);
      const auto adapt = part.substr(dash + 1);
      if ((init == "warm" || init == "cold") && (adapt == "static" || adapt == "adaptive")) {
        v.init = init == "warm" ? GateInit::Warm : GateInit::Cold;
        v.adaptation = adapt == "adaptive" ? GateAdaptation::Adaptive : GateAdaptation::Static;
        matched = true;
      }
    }
    if (!matched) throw ConfigError("unknown variant part '" + std::string(part) + "'");
  }
  if (!have_arch) throw ConfigError("empty variant tag");
  return v;
}

}  // namespace mrx
