#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace byzset {

using AgentId = std::size_t;
using ValueId = std::size_t;

inline constexpr std::size_t kMaxSetWidth = 64;

/// A set of small indices (< 64) packed into one machine word.
///
/// The tag parameter keeps agent sets and value sets from being mixed up;
/// both are plain bitmasks so set algebra stays exact and cheap.
template <typename Tag>
class IndexSet {
 public:
  constexpr IndexSet() = default;
  constexpr explicit IndexSet(std::uint64_t bits) : bits_(bits) {}
  IndexSet(std::initializer_list<std::size_t> items) {
    for (auto i : items) insert(i);
  }

  /// {0, 1, ..., n-1}
  static constexpr IndexSet range(std::size_t n) {
    return IndexSet(n >= kMaxSetWidth ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
  }
  static IndexSet single(std::size_t i) {
    IndexSet s;
    s.insert(i);
    return s;
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool contains(std::size_t i) const {
    return i < kMaxSetWidth && ((bits_ >> i) & 1U) != 0;
  }
  void insert(std::size_t i) {
    check(i);
    bits_ |= std::uint64_t{1} << i;
  }
  void erase(std::size_t i) {
    check(i);
    bits_ &= ~(std::uint64_t{1} << i);
  }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool subset_of(IndexSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool intersects(IndexSet other) const { return (bits_ & other.bits_) != 0; }
  /// Lowest member; undefined on the empty set.
  constexpr std::size_t front() const { return static_cast<std::size_t>(std::countr_zero(bits_)); }

  std::vector<std::size_t> to_vector() const {
    std::vector<std::size_t> out;
    out.reserve(size());
    for (auto i : *this) out.push_back(i);
    return out;
  }

  class iterator {
   public:
    using value_type = std::size_t;
    using difference_type = std::ptrdiff_t;
    constexpr iterator() = default;
    constexpr explicit iterator(std::uint64_t rest) : rest_(rest) {}
    constexpr std::size_t operator*() const { return static_cast<std::size_t>(std::countr_zero(rest_)); }
    constexpr iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    constexpr iterator operator++(int) {
      auto copy = *this;
      ++*this;
      return copy;
    }
    constexpr bool operator==(const iterator&) const = default;

   private:
    std::uint64_t rest_ = 0;
  };
  constexpr iterator begin() const { return iterator(bits_); }
  constexpr iterator end() const { return iterator(0); }

  friend constexpr IndexSet operator|(IndexSet a, IndexSet b) { return IndexSet(a.bits_ | b.bits_); }
  friend constexpr IndexSet operator&(IndexSet a, IndexSet b) { return IndexSet(a.bits_ & b.bits_); }
  friend constexpr IndexSet operator-(IndexSet a, IndexSet b) { return IndexSet(a.bits_ & ~b.bits_); }
  IndexSet& operator|=(IndexSet o) { bits_ |= o.bits_; return *this; }
  IndexSet& operator&=(IndexSet o) { bits_ &= o.bits_; return *this; }
  IndexSet& operator-=(IndexSet o) { bits_ &= ~o.bits_; return *this; }
  friend constexpr bool operator==(IndexSet, IndexSet) = default;
  /// Orders by packed bitmask, which is the enumeration order used everywhere.
  friend constexpr auto operator<=>(IndexSet a, IndexSet b) { return a.bits_ <=> b.bits_; }

 private:
  static void check(std::size_t i) {
    if (i >= kMaxSetWidth) throw std::out_of_range("index " + std::to_string(i) + " exceeds set width");
  }
  std::uint64_t bits_ = 0;
};

struct AgentTag {};
struct ValueTag {};
using AgentSet = IndexSet<AgentTag>;
using ValueSet = IndexSet<ValueTag>;

/// Visits every subset of `set` (empty set and `set` itself included) in
/// increasing bitmask order. If `fn` returns bool, false stops the walk and
/// the function returns false.
template <typename Tag, typename Fn>
bool for_each_subset(IndexSet<Tag> set, Fn&& fn) {
  const std::uint64_t mask = set.bits();
  std::uint64_t sub = 0;
  while (true) {
    if constexpr (std::is_same_v<std::invoke_result_t<Fn&, IndexSet<Tag>>, bool>) {
      if (!fn(IndexSet<Tag>(sub))) return false;
    } else {
      fn(IndexSet<Tag>(sub));
    }
    if (sub == mask) return true;
    sub = (sub - mask) & mask;
  }
}

std::string format_agent_set(AgentSet s);

}  // namespace byzset
