#include "hnm/timebin.hpp"

#include <algorithm>

namespace hnm {

FockIndex::FockIndex(std::size_t n_labels, int max_photons) : n_labels_(n_labels), max_photons_(max_photons) {
  if (max_photons < 0) throw CutoffError("photon cap must be non-negative");
  const auto kmax = static_cast<std::size_t>(max_photons);
  // C(n, k) for n < n_labels + kmax, k <= kmax
  const std::size_t nmax = n_labels + kmax + 1;
  binom_.assign(kmax + 1, std::vector<std::uint64_t>(nmax, 0));
  for (std::size_t n = 0; n < nmax; ++n) binom_[0][n] = 1;
  for (std::size_t k = 1; k <= kmax; ++k)
    for (std::size_t n = k; n < nmax; ++n) binom_[k][n] = binom_[k][n - 1] + binom_[k - 1][n - 1];

  // multisets of size n over L labels: C(L + n - 1, n)
  offsets_.assign(kmax + 2, 0);
  for (std::size_t n = 0; n <= kmax; ++n) {
    const std::uint64_t count = n == 0 ? 1 : (n_labels == 0 ? 0 : choose(n_labels + n - 1, n));
    offsets_[n + 1] = offsets_[n] + static_cast<std::size_t>(count);
  }
}

std::uint64_t FockIndex::choose(std::size_t n, std::size_t k) const {
  if (k > n) return 0;
  return binom_[k][n];
}

std::size_t FockIndex::index(std::span<const std::size_t> labels) const {
  const std::size_t n = labels.size();
  if (n > static_cast<std::size_t>(max_photons_)) throw DimensionError("too many photons for the Fock cap");
  std::size_t rank = 0;
  for (std::size_t i = 0; i < n; ++i) rank += static_cast<std::size_t>(choose(labels[i] + i, i + 1));
  return offsets_[n] + rank;
}

int FockIndex::photon_count(std::size_t f) const {
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), f);
  return static_cast<int>(it - offsets_.begin()) - 1;
}

std::vector<std::size_t> FockIndex::decode(std::size_t f) const {
  if (f >= size()) throw DimensionError("Fock index out of range");
  const int n = photon_count(f);
  std::size_t rank = f - offsets_[static_cast<std::size_t>(n)];
  std::vector<std::size_t> labels(static_cast<std::size_t>(n));
  for (std::size_t i = labels.size(); i-- > 0;) {
    // largest c with C(c, i + 1) <= rank, then l_i = c - i
    std::size_t lo = i, hi = n_labels_ + i; // C(lo, i+1) = 0 <= rank
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (choose(mid, i + 1) <= rank)
        lo = mid;
      else
        hi = mid - 1;
    }
    labels[i] = lo - i;
    rank -= static_cast<std::size_t>(choose(lo, i + 1));
  }
  return labels;
}

} // namespace hnm
