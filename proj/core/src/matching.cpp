#include "coverscan/matching.hpp"

#include <cmath>
#include <string>

#include "coverscan/error.hpp"
#include "detail/distance.hpp"

namespace coverscan {
namespace {

void check_compatible(const DescriptorSet& query, const DescriptorSet& reference) {
  if (query.kind() != reference.kind() || query.length() != reference.length()) {
    throw InvalidArgument("query and reference descriptors differ in kind or length");
  }
}

// Best-k insertion that keeps (distance, index) lexicographic order; later
// indices never displace an equal distance.
template <class D>
struct TopK {
  int k;
  int filled = 0;
  D dist[2];
  std::uint32_t idx[2];

  void offer(D d, std::uint32_t i) {
    if (filled < k) {
      int p = filled++;
      while (p > 0 && d < dist[p - 1]) {
        dist[p] = dist[p - 1];
        idx[p] = idx[p - 1];
        --p;
      }
      dist[p] = d;
      idx[p] = i;
    } else if (d < dist[k - 1]) {
      int p = k - 1;
      while (p > 0 && d < dist[p - 1]) {
        dist[p] = dist[p - 1];
        idx[p] = idx[p - 1];
        --p;
      }
      dist[p] = d;
      idx[p] = i;
    }
  }
};

// W > 0 fixes the row length at compile time so the popcount loop unrolls.
template <int W>
void scan_binary(const DescriptorSet& query, const DescriptorSet& reference, int k, MatchSet& out) {
  const int words = W > 0 ? W : query.words_per_row();
  const std::uint64_t* rdata = reference.word_data().data();
  const std::size_t nr = reference.size();
  for (std::size_t q = 0; q < query.size(); ++q) {
    const std::uint64_t* qv = query.bit_row(q).data();
    TopK<int> top{k, 0, {}, {}};
    for (std::size_t r = 0; r < nr; ++r) {
      const std::uint64_t* rv = rdata + r * static_cast<std::size_t>(words);
      int d;
      if constexpr (W > 0) {
        d = detail::hamming_fixed<W>(qv, rv);
      } else {
        d = detail::hamming(qv, rv, words);
      }
      if (top.filled < k || d < top.dist[k - 1]) top.offer(d, static_cast<std::uint32_t>(r));
    }
    for (int i = 0; i < k; ++i) {
      out.pairs.push_back({static_cast<std::uint32_t>(q), top.idx[i], static_cast<double>(top.dist[i])});
    }
  }
}

MatchSet knn_small(const DescriptorSet& query, const DescriptorSet& reference, int k) {
  MatchSet out;
  out.total_queries = query.size();
  out.retained_count = query.size();
  out.pairs.reserve(query.size() * static_cast<std::size_t>(k));
  const std::size_t nr = reference.size();
  if (query.kind() == DescriptorKind::Float) {
    const int n = query.length();
    const float* rdata = reference.float_data().data();
    for (std::size_t q = 0; q < query.size(); ++q) {
      const float* qv = query.float_row(q).data();
      TopK<float> top{k, 0, {}, {}};
      for (std::size_t r = 0; r < nr; ++r) {
        top.offer(detail::squared_l2(qv, rdata + r * static_cast<std::size_t>(n), n), static_cast<std::uint32_t>(r));
      }
      for (int i = 0; i < k; ++i) {
        out.pairs.push_back({static_cast<std::uint32_t>(q), top.idx[i], std::sqrt(static_cast<double>(top.dist[i]))});
      }
    }
  } else {
    switch (query.words_per_row()) {
      case 4:
        scan_binary<4>(query, reference, k, out);
        break;
      case 8:
        scan_binary<8>(query, reference, k, out);
        break;
      default:
        scan_binary<0>(query, reference, k, out);
    }
  }
  return out;
}

}  // namespace

void MatcherParams::validate() const {
  if (k != 1 && k != 2) throw InvalidArgument("k must be 1 or 2");
  if (!(nndr_threshold > 0.0 && nndr_threshold <= 1.0)) throw InvalidArgument("NNDR threshold must lie in (0, 1]");
}

double descriptor_distance(const DescriptorRef& a, const DescriptorRef& b) {
  if (a.kind != b.kind || a.length != b.length) {
    throw InvalidArgument("descriptors differ in kind or length (" + std::to_string(a.length) + " vs " +
                          std::to_string(b.length) + ")");
  }
  if (a.kind == DescriptorKind::Float) {
    double s = 0.0;
    for (int j = 0; j < a.length; ++j) {
      const double d = static_cast<double>(a.values[j]) - b.values[j];
      s += d * d;
    }
    return std::sqrt(s);
  }
  return detail::hamming(a.bits.data(), b.bits.data(), words_for_bits(a.length));
}

MatchSet match_1nn(const DescriptorSet& query, const DescriptorSet& reference) {
  if (query.empty() || reference.empty()) throw InvalidArgument("match_1nn needs nonempty descriptor sets");
  check_compatible(query, reference);
  return knn_small(query, reference, 1);
}

MatchSet knn_exact(const DescriptorSet& query, const DescriptorSet& reference, int k) {
  if (k < 1 || k > 2) throw InvalidArgument("exact k-NN supports k = 1 or 2");
  if (query.empty() || reference.empty()) throw InvalidArgument("k-NN needs nonempty descriptor sets");
  if (static_cast<std::size_t>(k) > reference.size()) throw InvalidArgument("k exceeds the reference set size");
  check_compatible(query, reference);
  return knn_small(query, reference, k);
}

MatchSet apply_nndr(const MatchSet& knn, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("NNDR threshold must lie in (0, 1]");
  MatchSet out;
  out.total_queries = knn.total_queries;
  std::size_t i = 0;
  while (i < knn.pairs.size()) {
    std::size_t end = i + 1;
    while (end < knn.pairs.size() && knn.pairs[end].query == knn.pairs[i].query) ++end;
    if (end - i < 2) throw InvalidArgument("NNDR needs two neighbours per query");
    const double d1 = knn.pairs[i].distance;
    const double d2 = knn.pairs[i + 1].distance;
    if (d2 == 0.0 || d1 / d2 <= tau) out.pairs.push_back(knn.pairs[i]);
    i = end;
  }
  out.retained_count = out.pairs.size();
  return out;
}

MatchSet match_2nn_nndr(const DescriptorSet& query, const DescriptorSet& reference, double tau) {
  if (reference.size() < 2) throw InvalidArgument("NNDR matching needs at least two reference descriptors");
  return apply_nndr(knn_exact(query, reference, 2), tau);
}

double score_sum_distances(const MatchSet& m) {
  if (m.pairs.empty()) return kEmptyScore;
  double s = 0.0;
  for (const Match& p : m.pairs) s += p.distance;
  return s;
}

double matching_rate(const MatchSet& m) {
  if (m.total_queries == 0) return 0.0;
  return 100.0 * static_cast<double>(m.retained_count) / static_cast<double>(m.total_queries);
}

}  // namespace coverscan
