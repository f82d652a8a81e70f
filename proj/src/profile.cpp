#include "reg/profile.hpp"

#include <string>

#include "reg/error.hpp"

namespace reg {

std::string_view to_string(SpeakerProfile profile) {
  switch (profile) {
    case SpeakerProfile::kOverspecifier: return "overspecifier";
    case SpeakerProfile::kMinimalist: return "minimalist";
    case SpeakerProfile::kMixed: return "mixed";
  }
  return "?";
}

SpeakerProfile parse_profile(std::string_view name) {
  for (SpeakerProfile p : kAllProfiles) {
    if (to_string(p) == name) return p;
  }
  fail(ErrorKind::kParse, "unknown speaker profile '" + std::string(name) + "'");
}

}  // namespace reg
