// SPDX-License-Identifier: Apache-2.0
#include "hewsim/engine.hpp"

#include <array>

namespace hewsim {

EventQueue::Handle EventQueue::schedule(SimTime t, EventKind kind, int subject,
                                        std::int64_t payload) {
  if (t < clock_) {
    throw SimError("schedule: event time " + std::to_string(t) +
                   " is before the clock " + std::to_string(clock_));
  }
  Event e{t, next_seq_++, kind, subject, payload};
  heap_.push(e);
  ++live_;
  return e.seq;
}

void EventQueue::cancel(Handle h) {
  if (cancelled_.insert(h).second && live_ > 0) --live_;
}

std::optional<Event> EventQueue::pop_next(SimTime t_end) {
  while (!heap_.empty()) {
    const Event& top = heap_.top();
    if (top.time > t_end) break;
    Event e = top;
    heap_.pop();
    if (auto it = cancelled_.find(e.seq); it != cancelled_.end()) {
      cancelled_.erase(it);
      continue;
    }
    --live_;
    ++processed_;
    clock_ = e.time;
    return e;
  }
  clock_ = t_end;
  return std::nullopt;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t scenario_seed, std::string_view node_id,
                           std::string_view purpose) {
  std::uint64_t state = scenario_seed;
  state ^= splitmix64(state) ^ fnv1a64(node_id);
  state ^= splitmix64(state) ^ fnv1a64(purpose);
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); i += 2) {
    std::uint64_t w = splitmix64(state);
    words[i] = static_cast<std::uint32_t>(w);
    words[i + 1] = static_cast<std::uint32_t>(w >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  gen_.seed(seq);
}

std::uint64_t RandomStream::uniform(std::uint64_t n) {
  if (n == 0) throw SimError("rng_uniform: n must be >= 1");
  const std::uint64_t x = gen_();
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(x) * static_cast<unsigned __int128>(n)) >> 64);
}

double RandomStream::uniform_unit() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

}  // namespace hewsim
