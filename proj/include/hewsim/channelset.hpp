// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hewsim/common.hpp"

namespace hewsim {

// The band is modelled as 8 basic 20 MHz channels (160 MHz total).
inline constexpr int kMaxBasicChannels = 8;

// A contiguous block of basic 20 MHz channels with a marked primary.
// Valid sets have size 1, 2, 4 or 8 (20/40/80/160 MHz). The struct itself is
// a plain aggregate so invalid values can be represented and reported by
// check(); use make()/from_channels() to construct validated sets.
struct ChannelSet {
  int first = 0;
  int count = 1;
  int primary = 0;

  static ChannelSet make(int first, int count, int primary);
  static ChannelSet from_channels(const std::vector<int>& channels, int primary);

  // Empty when the set satisfies all invariants; each entry names one
  // violated invariant.
  std::vector<std::string> check() const;

  int last() const { return first + count - 1; }
  bool contains(int ch) const { return ch >= first && ch <= last(); }
  bool contains(const ChannelSet& other) const {
    return other.first >= first && other.last() <= last();
  }
  bool intersects(const ChannelSet& other) const {
    return first <= other.last() && other.first <= last();
  }
  int width_mhz() const { return count * 20; }
  std::string to_string() const;

  bool operator==(const ChannelSet&) const = default;
};

}  // namespace hewsim
