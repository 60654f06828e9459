#pragma once

#include <string>
#include <string_view>

namespace mrx {

// Which coupling links are live.
//   Full          fidelity-weighted assignment + gated switching
//   Base          p = 1 in assignment, planner branch fixed
//   CA            fidelity-weighted assignment, planner branch fixed
//   CP            p = 1 in assignment, gated switching
//   PlannerOnly   fidelity-weighted assignment, planner branch fixed
//   ReactiveOnly  fidelity-weighted assignment, reactive branch fixed
// A fixed planner branch still falls back to the reactive action whenever
// the planner has no valid action.
enum class Architecture { Full, Base, CA, CP, PlannerOnly, ReactiveOnly };
enum class AllocatorKind { Coupled, Greedy, Hungarian, Auction };
enum class GateInit { Cold, Warm };
enum class GateAdaptation { Static, Adaptive };
enum class SwitchMode { Gated, FixedPlanner, FixedReactive };

struct Variant {
  Architecture architecture = Architecture::Full;
  AllocatorKind allocator = AllocatorKind::Coupled;
  GateInit init = GateInit::Warm;
  GateAdaptation adaptation = GateAdaptation::Static;

  bool couples_assignment() const;
  SwitchMode switch_mode() const;

  // "<architecture>+<allocator>+<init>-<adaptation>", e.g. Full+coupled+warm-static.
  std::string label() const;

  // Accepts an architecture name optionally followed by "+allocator" and/or
  // "+init-adaptation" parts in any order, e.g. "CP", "Full+greedy",
  // "Full+cold-adaptive".
  static Variant parse(std::string_view text);

  bool operator==(const Variant&) const = default;
};

std::string_view to_string(Architecture a);
std::string_view to_string(AllocatorKind a);

}  // namespace mrx
