#pragma once

#include <stdexcept>
#include <string>

namespace codenames_rl {

// Every failure surfaced by the library carries a stable machine-readable
// code. The protocol layer forwards it verbatim as `error.code`.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

namespace errc {
inline constexpr const char* kBadInput = "bad_input";
inline constexpr const char* kMalformedFile = "malformed_file";
inline constexpr const char* kUnknownWord = "unknown_word";
inline constexpr const char* kIllegalHint = "illegal_hint";
inline constexpr const char* kBarrenTargetSet = "barren_target_set";
inline constexpr const char* kEpisodeOver = "episode_over";
inline constexpr const char* kAlreadyRevealed = "already_revealed";
inline constexpr const char* kOutOfPhase = "out_of_phase";
inline constexpr const char* kInvalidConfig = "invalid_config";
}  // namespace errc

}  // namespace codenames_rl
