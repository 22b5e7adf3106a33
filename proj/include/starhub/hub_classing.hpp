#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "starhub/error.hpp"
#include "starhub/instance.hpp"

namespace starhub {

// Geometric bucketing of hubs by spoke length for a given base r > 1 and
// shift lambda in [0,1).
//
// Class 0 holds the zero-length hubs. For l >= 1, class k >= 1 is the
// half-open band  r^max(k-2+lambda, 0) <= l < r^(k-1+lambda),  and the
// hub's scale is u = r^(k-1+lambda) (u = 0 in class 0).
struct HubClassing {
  double r = 2.0;
  double lambda = 0.0;
  std::vector<std::int64_t> lengths;
  std::vector<int> alpha;       // class per hub
  int kappa_max = 0;
  std::vector<double> u;        // scale per hub
  std::vector<int> class_order; // evens descending, 0, odds ascending
  std::vector<std::size_t> hub_order;

  std::size_t hub_count() const noexcept { return alpha.size(); }

  // Signed position on the line: +u for odd classes, -u for even ones.
  double position(std::size_t hub) const { return alpha[hub] % 2 == 1 ? u[hub] : -u[hub]; }

  std::vector<std::size_t> hubs_in_class(int kappa) const {
    std::vector<std::size_t> out;
    for (std::size_t i : hub_order)
      if (alpha[i] == kappa) out.push_back(i);
    return out;
  }
};

// r^(k-1+lambda); shared by band edges and u so the two never disagree.
inline double class_scale(double r, int kappa, double lambda) {
  return std::pow(r, static_cast<double>(kappa - 1) + lambda);
}

inline double class_floor(double r, int kappa, double lambda) {
  return kappa <= 1 ? 1.0 : class_scale(r, kappa - 1, lambda);
}

// Class of a single spoke length, by scanning the bands upward.
inline int hub_class(std::int64_t length, double r, double lambda) {
  if (length == 0) return 0;
  const auto l = static_cast<double>(length);
  for (int kappa = 1;; ++kappa) {
    if (class_floor(r, kappa, lambda) <= l && l < class_scale(r, kappa, lambda)) return kappa;
    if (kappa > 100000) throw Error(ErrorKind::internal_error, "hub class scan did not terminate");
  }
}

inline std::vector<int> class_label_order(int kappa_max) {
  std::vector<int> order;
  for (int k = kappa_max - (kappa_max % 2); k >= 0; k -= 2) order.push_back(k);
  for (int k = 1; k <= kappa_max; k += 2) order.push_back(k);
  return order;
}

inline HubClassing classify_hubs(std::span<const std::int64_t> lengths, double r, double lambda) {
  if (!(r > 1.0) || !std::isfinite(r)) throw Error(ErrorKind::invalid_argument, "classification base r must exceed 1");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw Error(ErrorKind::invalid_argument, "lambda must lie in [0,1)");

  HubClassing hc;
  hc.r = r;
  hc.lambda = lambda;
  hc.lengths.assign(lengths.begin(), lengths.end());
  const std::size_t h = lengths.size();
  hc.alpha.resize(h);
  hc.u.resize(h);
  for (std::size_t i = 0; i < h; ++i) {
    if (lengths[i] < 0) throw Error(ErrorKind::invalid_argument, "negative spoke length");
    hc.alpha[i] = hub_class(lengths[i], r, lambda);
    hc.u[i] = lengths[i] == 0 ? 0.0 : class_scale(r, hc.alpha[i], lambda);
    hc.kappa_max = std::max(hc.kappa_max, hc.alpha[i]);
  }
  hc.class_order = class_label_order(hc.kappa_max);

  // Inside a class: ascending length, then index.
  std::vector<std::size_t> by_length(h);
  for (std::size_t i = 0; i < h; ++i) by_length[i] = i;
  std::stable_sort(by_length.begin(), by_length.end(),
                   [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  for (int kappa : hc.class_order)
    for (std::size_t i : by_length)
      if (hc.alpha[i] == kappa) hc.hub_order.push_back(i);
  return hc;
}

inline HubClassing classify_hubs(const Instance& inst, double r, double lambda) {
  return classify_hubs(inst.spoke_lengths(), r, lambda);
}

}  // namespace starhub
