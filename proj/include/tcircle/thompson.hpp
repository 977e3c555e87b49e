#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcircle/circle.hpp"
#include "tcircle/covering_map.hpp"
#include "tcircle/dyadic.hpp"

namespace tcircle {

/// An element of T_phi: source piece j is carried onto target piece
/// pairing[j] by phi_J^{-1} o phi_I. Both partitions start at 0.
struct ThompsonElement {
  MapPtr map;
  DyadicPartition source;
  DyadicPartition target;
  std::vector<std::size_t> pairing;

  std::size_t size() const { return source.size(); }
};

struct Validation {
  bool ok = true;
  std::optional<std::size_t> piece;  // first violating source piece
  std::string diagnostic;

  explicit operator bool() const { return ok; }
};

namespace detail {

inline Validation invalid(std::optional<std::size_t> piece, std::string why) {
  return Validation{false, piece, std::move(why)};
}

/// Combinatorial checks: sizes, tilings, and a cyclic-rotation pairing.
inline Validation check_structure(const ThompsonElement& g) {
  if (!g.map) return invalid(std::nullopt, "element has no covering map");
  if (g.source.size() != g.target.size()) {
    return invalid(std::nullopt, "source has " + std::to_string(g.source.size()) +
                                     " pieces, target has " + std::to_string(g.target.size()));
  }
  if (g.pairing.size() != g.source.size()) {
    return invalid(std::nullopt, "pairing length differs from the number of pieces");
  }
  if (auto d = g.source.tiling_defect()) return invalid(d->first, "source: " + d->second);
  if (auto d = g.target.tiling_defect()) return invalid(d->first, "target: " + d->second);
  const std::size_t r = g.size();
  for (std::size_t j = 0; j < r; ++j) {
    if (g.pairing[j] >= r) return invalid(j, "pairing index out of range");
    if (g.pairing[j] != (g.pairing[0] + j) % r) {
      return invalid(j, "pairing does not preserve cyclic order");
    }
  }
  return {};
}

inline CirclePoint apply_piece(const CoveringMap& phi, const DyadicInterval& from,
                               const DyadicInterval& to, CirclePoint p) {
  return CirclePoint(chart_inverse(phi, to, chart_forward(phi, from, p)));
}

}  // namespace detail

/// Checks partition structure, cyclic order of the pairing and continuity at
/// every breakpoint (to 1e-8).
inline Validation validate(const ThompsonElement& g) {
  if (auto v = detail::check_structure(g); !v) return v;
  const CoveringMap& phi = *g.map;
  const std::size_t r = g.size();
  for (std::size_t j = 0; j < r; ++j) {
    const std::size_t next = (j + 1) % r;
    const auto& I = g.source[j];
    const auto& In = g.source[next];
    const CirclePoint end_image =
        detail::apply_piece(phi, I, g.target[g.pairing[j]], CirclePoint(I.right));
    const CirclePoint start_image =
        detail::apply_piece(phi, In, g.target[g.pairing[next]], CirclePoint(In.left));
    if (distance(end_image, start_image) > 1e-8) {
      return detail::invalid(j, "discontinuous at the right end of piece " + std::to_string(j));
    }
  }
  return {};
}

/// g(p) and g'(p). At a breakpoint the piece on the counterclockwise side is
/// used.
inline std::pair<CirclePoint, double> eval_and_slope(const ThompsonElement& g, CirclePoint p) {
  if (auto v = detail::check_structure(g); !v) {
    throw Error(ErrorCode::InvalidElement, v.diagnostic);
  }
  const CoveringMap& phi = *g.map;
  const std::size_t j = g.source.locate(p.value());
  const DyadicInterval& I = g.source[j];
  const DyadicInterval& J = g.target[g.pairing[j]];
  const double y = chart_inverse(phi, J, chart_forward(phi, I, p));
  const double num = lift_power_with_multiplier(phi, p.value(), static_cast<int>(I.degree)).multiplier;
  const double den = lift_power_with_multiplier(phi, y, static_cast<int>(J.degree)).multiplier;
  return {CirclePoint(y), num / den};
}

inline CirclePoint eval(const ThompsonElement& g, CirclePoint p) { return eval_and_slope(g, p).first; }

using PiecePair = std::pair<DyadicInterval, DyadicInterval>;

/// Builds an element from (source piece, target piece) pairs given in any
/// order. The pieces on each side must tile the circle.
inline ThompsonElement from_pairs(MapPtr map, std::vector<PiecePair> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const PiecePair& a, const PiecePair& b) {
    return a.first.left_numerator() < b.first.left_numerator();
  });
  std::vector<DyadicInterval> src;
  std::vector<DyadicInterval> tgt;
  src.reserve(pairs.size());
  tgt.reserve(pairs.size());
  for (const auto& [s, t] : pairs) {
    src.push_back(s);
    tgt.push_back(t);
  }
  std::vector<std::size_t> order(tgt.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tgt[a].left_numerator() < tgt[b].left_numerator();
  });
  std::vector<std::size_t> pairing(tgt.size());
  std::vector<DyadicInterval> sorted_tgt(tgt.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    pairing[order[pos]] = pos;
    sorted_tgt[pos] = tgt[order[pos]];
  }
  ThompsonElement g{std::move(map), DyadicPartition(std::move(src)),
                    DyadicPartition(std::move(sorted_tgt)), std::move(pairing)};
  if (auto v = detail::check_structure(g); !v) {
    throw Error(ErrorCode::InvalidElement, v.diagnostic);
  }
  return g;
}

inline std::vector<PiecePair> pairs_of(const ThompsonElement& g) {
  std::vector<PiecePair> out;
  out.reserve(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) out.emplace_back(g.source[j], g.target[g.pairing[j]]);
  return out;
}

/// Identity on the uniform partition of the given degree.
inline ThompsonElement identity_element(MapPtr map, unsigned degree = 1) {
  const DyadicPartition P = uniform_partition(*map, degree);
  std::vector<std::size_t> pairing(P.size());
  std::iota(pairing.begin(), pairing.end(), std::size_t{0});
  return ThompsonElement{std::move(map), P, P, std::move(pairing)};
}

inline bool is_identity(const ThompsonElement& g) {
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (!g.source[j].same_address(g.target[g.pairing[j]])) return false;
  }
  return true;
}

/// Element given by (degree, index) addresses and a cyclic offset, as in the
/// JSON form: source piece j goes to target piece (j + offset) mod r.
inline ThompsonElement element_from_addresses(
    MapPtr map, const std::vector<std::pair<unsigned, std::uint64_t>>& source,
    const std::vector<std::pair<unsigned, std::uint64_t>>& target, std::size_t offset) {
  auto build = [&](const std::vector<std::pair<unsigned, std::uint64_t>>& addrs) {
    std::vector<DyadicInterval> out;
    out.reserve(addrs.size());
    for (auto [d, i] : addrs) out.push_back(dyadic_interval(*map, d, i));
    return DyadicPartition(std::move(out));
  };
  ThompsonElement g{map, build(source), build(target), {}};
  const std::size_t r = g.source.size();
  g.pairing.resize(r);
  for (std::size_t j = 0; j < r; ++j) g.pairing[j] = r == 0 ? 0 : (j + offset) % r;
  return g;
}

/// g o h. h's target partition and g's source partition are brought to their
/// common dyadic refinement; each split is transported through the paired
/// piece on the other side. The coarser piece is always the one split.
inline ThompsonElement compose(const ThompsonElement& g, const ThompsonElement& h) {
  for (const ThompsonElement* e : {&g, &h}) {
    if (auto v = detail::check_structure(*e); !v) throw Error(ErrorCode::InvalidElement, v.diagnostic);
  }
  if (!(*g.map == *h.map)) {
    throw Error(ErrorCode::InvalidElement, "elements belong to different covering maps");
  }
  const CoveringMap& phi = *g.map;

  // h as (source, target) pairs in target order; g in source order.
  std::vector<PiecePair> hp(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) hp[h.pairing[j]] = {h.source[j], h.target[h.pairing[j]]};
  std::deque<PiecePair> hq(hp.begin(), hp.end());
  const auto gp = pairs_of(g);
  std::deque<PiecePair> gq(gp.begin(), gp.end());

  auto split_pair = [&](std::deque<PiecePair>& q) {
    const PiecePair top = q.front();
    q.pop_front();
    const auto [a0, a1] = split(phi, top.first);
    const auto [b0, b1] = split(phi, top.second);
    q.emplace_front(a1, b1);
    q.emplace_front(a0, b0);
  };

  std::vector<PiecePair> out;
  while (!hq.empty() && !gq.empty()) {
    const DyadicInterval& mid_h = hq.front().second;
    const DyadicInterval& mid_g = gq.front().first;
    if (mid_h.same_address(mid_g)) {
      out.emplace_back(hq.front().first, gq.front().second);
      hq.pop_front();
      gq.pop_front();
    } else if (mid_h.degree < mid_g.degree) {
      split_pair(hq);
    } else {
      split_pair(gq);
    }
  }
  if (!hq.empty() || !gq.empty()) {
    throw Error(ErrorCode::InvalidElement, "partitions failed to refine to a common tiling");
  }
  return from_pairs(g.map, std::move(out));
}

inline ThompsonElement invert(const ThompsonElement& g) {
  if (auto v = detail::check_structure(g); !v) throw Error(ErrorCode::InvalidElement, v.diagnostic);
  auto pairs = pairs_of(g);
  for (auto& p : pairs) std::swap(p.first, p.second);
  return from_pairs(g.map, std::move(pairs));
}

/// Merges adjacent sibling pieces whose images are siblings in the same
/// order, until no such pair remains. Evaluation is unchanged.
inline ThompsonElement reduce(const ThompsonElement& g) {
  if (auto v = detail::check_structure(g); !v) throw Error(ErrorCode::InvalidElement, v.diagnostic);
  const CoveringMap& phi = *g.map;
  auto pairs = pairs_of(g);
  auto siblings = [](const DyadicInterval& a, const DyadicInterval& b) {
    return a.degree == b.degree && a.degree > 0 && a.index % 2 == 0 && b.index == a.index + 1;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
      const auto& [s0, t0] = pairs[i];
      const auto& [s1, t1] = pairs[i + 1];
      if (siblings(s0, s1) && siblings(t0, t1)) {
        const PiecePair merged{dyadic_interval(phi, s0.degree - 1, s0.index / 2),
                               dyadic_interval(phi, t0.degree - 1, t0.index / 2)};
        pairs[i] = merged;
        pairs.erase(pairs.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        changed = true;
        break;
      }
    }
  }
  return from_pairs(g.map, std::move(pairs));
}

namespace detail {

/// Greedy tiling of [u, v] (numerators over 2^kMaxDegree) by maximal dyadic
/// intervals.
inline std::vector<std::pair<unsigned, std::uint64_t>> tile_span(std::uint64_t u, std::uint64_t v) {
  std::vector<std::pair<unsigned, std::uint64_t>> out;
  while (u < v) {
    unsigned d = 0;
    while (true) {
      const std::uint64_t width = std::uint64_t{1} << (kMaxDegree - d);
      if (u % width == 0 && u + width <= v) break;
      ++d;
    }
    const std::uint64_t width = std::uint64_t{1} << (kMaxDegree - d);
    out.emplace_back(d, u / width);
    u += width;
  }
  return out;
}

/// Tiling of the cyclic span from numerator `from` to numerator `to`,
/// listed in counterclockwise order starting at `from`.
inline std::vector<DyadicInterval> tile_cyclic(const CoveringMap& phi, std::uint64_t from,
                                               std::uint64_t to) {
  constexpr std::uint64_t full = std::uint64_t{1} << kMaxDegree;
  std::vector<std::pair<unsigned, std::uint64_t>> addrs;
  if (from == to) return {};
  if (from < to) {
    addrs = tile_span(from, to);
  } else {
    addrs = tile_span(from, full);
    auto tail = tile_span(0, to);
    addrs.insert(addrs.end(), tail.begin(), tail.end());
  }
  std::vector<DyadicInterval> out;
  out.reserve(addrs.size());
  for (auto [d, i] : addrs) out.push_back(dyadic_interval(phi, d, i));
  return out;
}

/// Splits the first lowest-degree piece in place.
inline void split_largest(const CoveringMap& phi, std::vector<DyadicInterval>& pieces) {
  auto it = std::min_element(pieces.begin(), pieces.end(),
                             [](const DyadicInterval& a, const DyadicInterval& b) {
                               return a.degree < b.degree;
                             });
  const auto [a, b] = split(phi, *it);
  *it = b;
  pieces.insert(it, a);
}

}  // namespace detail

/// An element equal to phi^s on a neighbourhood of x.
///
/// The one or two degree-n intervals whose closure holds x are sent to their
/// phi^s images, which are degree-(n-s) intervals. The complements of both
/// local arcs are tiled by maximal dyadic intervals, the shorter tiling is
/// refined until the counts match, and the pieces are paired in cyclic order.
/// Throws NeighborhoodTooSmall when the local image already covers the
/// circle while the local source does not; a larger n avoids that.
inline ThompsonElement build_local_power(MapPtr map, CirclePoint x, unsigned s, unsigned n) {
  if (n <= s) throw Error(ErrorCode::InvalidInput, "need n > s");
  require_degree(n);
  const CoveringMap& phi = *map;
  const std::uint64_t count = std::uint64_t{1} << n;

  // Locate the degree-n interval [grid(k), grid(k+1)) holding x.
  std::uint64_t lo = 0;
  std::uint64_t hi = count;
  while (hi - lo > 1) {
    const std::uint64_t mid = (lo + hi) / 2;
    if (grid_point(phi, n, mid) <= x.value()) lo = mid; else hi = mid;
  }
  std::vector<std::uint64_t> local;
  const CirclePoint left(grid_point(phi, n, lo));
  const CirclePoint right(grid_point(phi, n, lo + 1));
  constexpr double kOnGrid = 1e-12;
  if (distance(x, left) <= kOnGrid) {
    local = {(lo + count - 1) % count, lo};
  } else if (distance(x, right) <= kOnGrid) {
    local = {lo, (lo + 1) % count};
  } else {
    local = {lo};
  }

  const unsigned m = n - s;
  const std::uint64_t image_count = std::uint64_t{1} << m;
  const std::uint64_t src_scale = std::uint64_t{1} << (kMaxDegree - n);
  const std::uint64_t tgt_scale = std::uint64_t{1} << (kMaxDegree - m);
  constexpr std::uint64_t full = std::uint64_t{1} << kMaxDegree;

  std::vector<PiecePair> pairs;
  for (std::uint64_t k : local) {
    pairs.emplace_back(dyadic_interval(phi, n, k), dyadic_interval(phi, m, k % image_count));
  }
  const std::uint64_t src_from = ((local.back() + 1) * src_scale) % full;
  const std::uint64_t src_to = local.front() * src_scale;
  const std::uint64_t tgt_from = ((local.back() % image_count + 1) * tgt_scale) % full;
  const std::uint64_t tgt_to = (local.front() % image_count) * tgt_scale;

  auto src_rest = detail::tile_cyclic(phi, src_from, src_to);
  auto tgt_rest = detail::tile_cyclic(phi, tgt_from, tgt_to);
  if (src_rest.empty() != tgt_rest.empty()) {
    throw Error(ErrorCode::NeighborhoodTooSmall,
                "phi^" + std::to_string(s) + " of the degree-" + std::to_string(n) +
                    " neighbourhood covers the circle; use a larger degree");
  }
  while (src_rest.size() < tgt_rest.size()) detail::split_largest(phi, src_rest);
  while (tgt_rest.size() < src_rest.size()) detail::split_largest(phi, tgt_rest);
  for (std::size_t i = 0; i < src_rest.size(); ++i) pairs.emplace_back(src_rest[i], tgt_rest[i]);
  return from_pairs(std::move(map), std::move(pairs));
}

// JSON form: {"source":[[degree,index],...],"target":[[degree,index],...],"offset":k}
// with an optional "map" entry holding the covering map.

inline nlohmann::json element_to_json(const ThompsonElement& g, bool with_map = false) {
  auto addrs = [](const DyadicPartition& P) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& I : P.intervals()) a.push_back({I.degree, I.index});
    return a;
  };
  nlohmann::json j;
  if (with_map) j["map"] = map_to_json(*g.map);
  j["source"] = addrs(g.source);
  j["target"] = addrs(g.target);
  j["offset"] = g.pairing.empty() ? 0 : g.pairing[0];
  return j;
}

inline ThompsonElement element_from_json(const nlohmann::json& j, MapPtr fallback_map) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "element JSON must be an object");
  MapPtr map = fallback_map;
  if (j.contains("map")) map = std::make_shared<const CoveringMap>(map_from_json(j["map"]));
  if (!map) throw Error(ErrorCode::InvalidInput, "element JSON has no map and none was given");
  auto addrs = [&](const char* key) {
    std::vector<std::pair<unsigned, std::uint64_t>> out;
    if (!j.contains(key) || !j[key].is_array()) {
      throw Error(ErrorCode::InvalidInput, std::string("element JSON needs array \"") + key + "\"");
    }
    for (const auto& e : j[key]) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
        throw Error(ErrorCode::InvalidInput, "dyadic address must be [degree, index]");
      }
      const auto d = e[0].get<unsigned>();
      const auto i = e[1].get<std::uint64_t>();
      if (d > kMaxDegree || i >= (std::uint64_t{1} << d)) {
        throw Error(ErrorCode::InvalidInput, "dyadic address out of range");
      }
      out.emplace_back(d, i);
    }
    return out;
  };
  const auto src = addrs("source");
  const auto tgt = addrs("target");
  const std::size_t offset = j.value("offset", std::size_t{0});
  return element_from_addresses(std::move(map), src, tgt, offset);
}

}  // namespace tcircle
