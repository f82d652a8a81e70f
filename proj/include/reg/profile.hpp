#pragma once

#include <string>
#include <string_view>

namespace reg {

// Overspecification profile of a speaker.
enum class SpeakerProfile { kOverspecifier, kMinimalist, kMixed };

inline constexpr SpeakerProfile kAllProfiles[] = {
    SpeakerProfile::kOverspecifier, SpeakerProfile::kMinimalist,
    SpeakerProfile::kMixed};

std::string_view to_string(SpeakerProfile profile);
// Throws ErrorKind::kParse on an unknown name.
SpeakerProfile parse_profile(std::string_view name);

}  // namespace reg
