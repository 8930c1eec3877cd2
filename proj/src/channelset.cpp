// SPDX-License-Identifier: Apache-2.0
#include "hewsim/channelset.hpp"

#include <algorithm>

namespace hewsim {

ChannelSet ChannelSet::make(int first, int count, int primary) {
  ChannelSet cs{first, count, primary};
  auto violations = cs.check();
  if (!violations.empty()) throw ConfigError("invalid channel set: " + violations.front());
  return cs;
}

ChannelSet ChannelSet::from_channels(const std::vector<int>& channels, int primary) {
  if (channels.empty()) throw ConfigError("channel set must be non-empty");
  std::vector<int> sorted = channels;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] != sorted[i - 1] + 1) throw ConfigError("channels not contiguous");
  }
  return make(sorted.front(), static_cast<int>(sorted.size()), primary);
}

std::vector<std::string> ChannelSet::check() const {
  std::vector<std::string> out;
  if (count <= 0) out.push_back("channel set must be non-empty");
  if (count != 1 && count != 2 && count != 4 && count != 8)
    out.push_back("width must be 1,2,4,8");
  if (first < 0 || last() >= kMaxBasicChannels)
    out.push_back("channels must lie in 0.." + std::to_string(kMaxBasicChannels - 1));
  if (count > 0 && !contains(primary)) out.push_back("primary must be a member of the set");
  return out;
}

std::string ChannelSet::to_string() const {
  if (count == 1) return std::to_string(first);
  return std::to_string(first) + "-" + std::to_string(last());
}

}  // namespace hewsim
