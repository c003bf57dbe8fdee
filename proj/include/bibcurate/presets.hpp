#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace bibcurate {

// Shipped search strings, stored verbatim. Each excludes two curated
// libraries; their keys are exposed so callers can rebind them onto a local
// catalog. Note the broad string spells the second key with a lower-case 'm'.

inline constexpr std::string_view kPresetStrict =
    R"q(body:("Fermi Paradox" NOT "Pasta") OR abs:("SETI" NOT "Nepal") OR body:("Drake Equation" AND "intelligence") OR body:("technosignature") OR body:("technosignatures") OR abs:("Extraterrestrial Intelligence" NOT "Elastic Tensor Imaging" NOT "Exceptional Topological Insulator" NOT "Temperature Index" NOT "Temperature Indicator" NOT "effector-triggered immunity" NOT "Energy-tracking Impulse" NOT "energy-technology installation" NOT "Electronic-Transport-Informatics" NOT "electrothermal instability") NOT docs(library/qazeXzDISj-d06qbiWLoXQ) NOT docs(library/k1BwfM56QgKbl6X-PXADqg))q";

inline constexpr std::string_view kPresetBroad =
    R"q((body:("Fermi Paradox") OR body:("SETI") OR body:("Drake Equation") OR body:("technosignature") OR body:("technosignatures") OR body:("Extraterrestrial Intelligence")) NOT docs(library/k1Bwfm56QgKbl6X-PXADqg) NOT docs(library/qazeXzDISj-d06qbiWLoXQ))q";

inline constexpr std::string_view kExcludedA = "qazeXzDISj-d06qbiWLoXQ";
inline constexpr std::string_view kExcludedB = "k1BwfM56QgKbl6X-PXADqg";
inline constexpr std::string_view kExcludedBAlt = "k1Bwfm56QgKbl6X-PXADqg";

struct Preset {
  std::string_view name;
  std::string_view text;
};

inline constexpr Preset kPresets[] = {
    {"preset-strict", kPresetStrict},
    {"preset-broad", kPresetBroad},
};

/// Accepts "preset-strict", "strict", "preset-broad" or "broad".
inline std::optional<Preset> find_preset(std::string_view name) {
  for (const Preset& p : kPresets) {
    if (p.name == name || p.name.substr(7) == name) return p;
  }
  return std::nullopt;
}

}  // namespace bibcurate
