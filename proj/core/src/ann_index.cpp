#include "coverscan/ann_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

#include "coverscan/error.hpp"
#include "detail/distance.hpp"

namespace coverscan {
namespace {

constexpr int kSplitCandidates = 5;
constexpr int kVarianceSample = 100;

// Sorted (distance, index) list of the best k seen so far.
template <class D>
class BestK {
 public:
  explicit BestK(int k) : k_(static_cast<std::size_t>(k)) { items_.reserve(k_ + 1); }

  bool full() const { return items_.size() == k_; }
  D worst() const { return items_.back().first; }
  std::size_t size() const { return items_.size(); }

  void offer(D d, std::uint32_t i) {
    if (full() && !(std::pair{d, i} < items_.back())) return;
    const auto pos = std::upper_bound(items_.begin(), items_.end(), std::pair{d, i});
    items_.insert(pos, {d, i});
    if (items_.size() > k_) items_.pop_back();
  }

  const std::vector<std::pair<D, std::uint32_t>>& items() const { return items_; }

 private:
  std::size_t k_;
  std::vector<std::pair<D, std::uint32_t>> items_;
};

}  // namespace

void AnnParams::validate() const {
  if (trees < 1) throw InvalidArgument("ANN forest needs at least one tree");
  if (checks < 1) throw InvalidArgument("ANN checks must be positive");
  if (leaf_size < 1) throw InvalidArgument("ANN leaf size must be positive");
  if (tables < 1) throw InvalidArgument("LSH needs at least one table");
  if (key_bits < 1 || key_bits > 24) throw InvalidArgument("LSH key bits must lie in [1, 24]");
  if (probe_radius < 0 || probe_radius > 3) throw InvalidArgument("LSH probe radius must lie in [0, 3]");
  if (min_candidates < 1) throw InvalidArgument("LSH candidate minimum must be positive");
}

AnnIndex AnnIndex::build(const DescriptorSet& reference, const AnnParams& params) {
  params.validate();
  if (reference.empty()) throw InvalidArgument("cannot index an empty descriptor set");
  AnnIndex idx;
  idx.params_ = params;
  idx.data_ = reference;
  if (reference.kind() == DescriptorKind::Float) {
    idx.build_forest();
  } else {
    if (params.key_bits > reference.length()) throw InvalidArgument("LSH key is longer than the descriptor");
    idx.build_tables();
  }
  return idx;
}

void AnnIndex::build_forest() {
  const int dims = data_.length();
  const auto n = static_cast<std::uint32_t>(data_.size());
  std::mt19937_64 rng(params_.seed);
  auto value = [&](std::uint32_t i, int d) { return data_.float_row(i)[d]; };

  trees_.resize(static_cast<std::size_t>(params_.trees));
  for (Tree& tree : trees_) {
    tree.order.resize(n);
    std::iota(tree.order.begin(), tree.order.end(), 0u);
    std::shuffle(tree.order.begin(), tree.order.end(), rng);

    std::vector<double> mean(dims);
    std::vector<double> var(dims);
    std::vector<int> dim_rank(dims);
    // Explicit stack of node ids awaiting a split.
    tree.nodes.push_back({-1, 0.0f, {-1, -1}, 0, static_cast<int>(n)});
    std::vector<int> pending{0};
    while (!pending.empty()) {
      const int id = pending.back();
      pending.pop_back();
      const int begin = tree.nodes[id].begin;
      const int end = tree.nodes[id].end;
      if (end - begin <= params_.leaf_size) continue;

      const int sample = std::min(end - begin, kVarianceSample);
      std::fill(mean.begin(), mean.end(), 0.0);
      std::fill(var.begin(), var.end(), 0.0);
      for (int s = 0; s < sample; ++s) {
        const auto row = data_.float_row(tree.order[begin + s]);
        for (int d = 0; d < dims; ++d) mean[d] += row[d];
      }
      for (double& m : mean) m /= sample;
      for (int s = 0; s < sample; ++s) {
        const auto row = data_.float_row(tree.order[begin + s]);
        for (int d = 0; d < dims; ++d) var[d] += (row[d] - mean[d]) * (row[d] - mean[d]);
      }
      std::iota(dim_rank.begin(), dim_rank.end(), 0);
      const int top = std::min(kSplitCandidates, dims);
      std::partial_sort(dim_rank.begin(), dim_rank.begin() + top, dim_rank.end(),
                        [&](int a, int b) { return var[a] > var[b] || (var[a] == var[b] && a < b); });
      const int dim = dim_rank[std::uniform_int_distribution<int>(0, top - 1)(rng)];

      auto first = tree.order.begin() + begin;
      auto last = tree.order.begin() + end;
      float split = static_cast<float>(mean[dim]);
      auto mid = std::partition(first, last, [&](std::uint32_t i) { return value(i, dim) < split; });
      if (mid == first || mid == last) {
        auto half = first + (end - begin) / 2;
        std::nth_element(first, half, last, [&](std::uint32_t a, std::uint32_t b) { return value(a, dim) < value(b, dim); });
        split = value(*half, dim);
        mid = std::partition(first, last, [&](std::uint32_t i) { return value(i, dim) < split; });
        if (mid == first) continue;  // every value equals the minimum: keep as a leaf
      }
      const int cut = static_cast<int>(mid - tree.order.begin());
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({-1, 0.0f, {-1, -1}, begin, cut});
      tree.nodes.push_back({-1, 0.0f, {-1, -1}, cut, end});
      tree.nodes[id].dim = dim;
      tree.nodes[id].split = split;
      tree.nodes[id].child[0] = left;
      tree.nodes[id].child[1] = left + 1;
      pending.push_back(left + 1);
      pending.push_back(left);
    }
  }
}

void AnnIndex::build_tables() {
  const int bits = data_.length();
  // Small indexes get shorter keys, about two entries per bucket.
  const int key_bits = std::min({params_.key_bits, bits, std::max(4, static_cast<int>(std::bit_width(data_.size())) - 1)});
  const std::size_t buckets = std::size_t{1} << key_bits;
  std::mt19937_64 rng(params_.seed);
  std::vector<int> all(bits);
  std::iota(all.begin(), all.end(), 0);

  tables_.resize(static_cast<std::size_t>(params_.tables));
  std::vector<std::uint32_t> keys(data_.size());
  for (Table& t : tables_) {
    std::shuffle(all.begin(), all.end(), rng);
    t.bits.assign(all.begin(), all.begin() + key_bits);
    t.offsets.assign(buckets + 1, 0);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      keys[i] = table_key(t, data_.bit_row(i));
      ++t.offsets[keys[i] + 1];
    }
    std::partial_sum(t.offsets.begin(), t.offsets.end(), t.offsets.begin());
    t.items.resize(data_.size());
    std::vector<std::uint32_t> fill(t.offsets.begin(), t.offsets.end() - 1);
    for (std::size_t i = 0; i < data_.size(); ++i) t.items[fill[keys[i]]++] = static_cast<std::uint32_t>(i);
  }
}

std::uint32_t AnnIndex::table_key(const Table& t, std::span<const std::uint64_t> words) const {
  std::uint32_t key = 0;
  for (std::size_t b = 0; b < t.bits.size(); ++b) {
    const int j = t.bits[b];
    key |= static_cast<std::uint32_t>((words[j >> 6] >> (j & 63)) & 1u) << b;
  }
  return key;
}

MatchSet AnnIndex::knn(const DescriptorSet& query, int k) const {
  if (query.kind() != data_.kind() || query.length() != data_.length()) {
    throw InvalidArgument("query descriptors differ from the indexed kind or length");
  }
  if (k < 1 || static_cast<std::size_t>(k) > data_.size()) throw InvalidArgument("k must lie in [1, index size]");

  MatchSet out;
  out.total_queries = query.size();
  out.retained_count = query.size();
  out.pairs.reserve(query.size() * static_cast<std::size_t>(k));
  const std::size_t n = data_.size();
  std::vector<std::uint32_t> stamp(n, 0);
  std::uint32_t epoch = 0;

  if (data_.kind() == DescriptorKind::Float) {
    const int dims = data_.length();
    const float* base = data_.float_data().data();
    auto dist = [&](const float* q, std::uint32_t i) {
      return detail::squared_l2(q, base + static_cast<std::size_t>(i) * dims, dims);
    };
    const bool exhaustive = static_cast<std::size_t>(k) >= n || n <= static_cast<std::size_t>(params_.leaf_size);
    using Branch = std::pair<float, std::pair<int, int>>;  // bound, (tree, node)
    for (std::size_t qi = 0; qi < query.size(); ++qi) {
      const float* q = query.float_row(qi).data();
      BestK<float> best(k);
      if (exhaustive) {
        for (std::size_t i = 0; i < n; ++i) best.offer(dist(q, static_cast<std::uint32_t>(i)), static_cast<std::uint32_t>(i));
      } else {
        ++epoch;
        std::priority_queue<Branch, std::vector<Branch>, std::greater<>> heap;
        int leaves = 0;
        auto descend = [&](int t, int node, float bound) {
          const Tree& tree = trees_[t];
          while (tree.nodes[node].dim >= 0) {
            const Node& nd = tree.nodes[node];
            const float diff = q[nd.dim] - nd.split;
            const int near = diff < 0 ? 0 : 1;
            heap.push({bound + diff * diff, {t, nd.child[1 - near]}});
            node = nd.child[near];
          }
          const Node& leaf = tree.nodes[node];
          for (int p = leaf.begin; p < leaf.end; ++p) {
            const std::uint32_t i = tree.order[p];
            if (stamp[i] == epoch) continue;
            stamp[i] = epoch;
            best.offer(dist(q, i), i);
          }
          ++leaves;
        };
        for (int t = 0; t < static_cast<int>(trees_.size()); ++t) descend(t, 0, 0.0f);
        while (!heap.empty() && (leaves < params_.checks || !best.full())) {
          const auto [bound, where] = heap.top();
          heap.pop();
          if (best.full() && bound >= best.worst()) break;
          descend(where.first, where.second, bound);
        }
      }
      for (const auto& [d, i] : best.items()) {
        out.pairs.push_back({static_cast<std::uint32_t>(qi), i, std::sqrt(static_cast<double>(d))});
      }
    }
    return out;
  }

  const int words = data_.words_per_row();
  const std::uint64_t* base = data_.word_data().data();
  auto dist = [&](const std::uint64_t* q, std::uint32_t i) {
    const std::uint64_t* r = base + static_cast<std::size_t>(i) * words;
    switch (words) {
      case 4:
        return detail::hamming_fixed<4>(q, r);
      case 8:
        return detail::hamming_fixed<8>(q, r);
      default:
        return detail::hamming(q, r, words);
    }
  };
  const int kb = tables_.empty() ? 0 : static_cast<int>(tables_[0].bits.size());
  const auto enough = static_cast<std::size_t>(params_.min_candidates);
  std::vector<std::uint32_t> keys(tables_.size());
  std::vector<std::uint32_t> flips;
  // Flip masks grouped by radius: all single bits, then pairs, then triples.
  if (params_.probe_radius >= 1) {
    for (int a = 0; a < kb; ++a) flips.push_back(1u << a);
  }
  if (params_.probe_radius >= 2) {
    for (int a = 0; a < kb; ++a) {
      for (int b = a + 1; b < kb; ++b) flips.push_back(1u << a | 1u << b);
    }
  }
  if (params_.probe_radius >= 3) {
    for (int a = 0; a < kb; ++a) {
      for (int b = a + 1; b < kb; ++b) {
        for (int c = b + 1; c < kb; ++c) flips.push_back(1u << a | 1u << b | 1u << c);
      }
    }
  }
  // Candidates are gathered first, then verified in one pass.
  std::vector<std::uint32_t> cand(n + 1);
  for (std::size_t qi = 0; qi < query.size(); ++qi) {
    const std::uint64_t* q = query.bit_row(qi).data();
    BestK<int> best(k);
    std::size_t candidates = 0;
    if (static_cast<std::size_t>(k) < n) {
      ++epoch;
      for (std::size_t t = 0; t < tables_.size(); ++t) keys[t] = table_key(tables_[t], query.bit_row(qi));
      auto scan = [&](const Table& t, std::uint32_t bucket) {
        for (std::uint32_t p = t.offsets[bucket]; p < t.offsets[bucket + 1]; ++p) {
          const std::uint32_t i = t.items[p];
          cand[candidates] = i;
          candidates += stamp[i] != epoch;
          stamp[i] = epoch;
        }
      };
      for (std::size_t t = 0; t < tables_.size() && candidates < enough; ++t) scan(tables_[t], keys[t]);
      std::size_t f = 0;
      while (f < flips.size() && candidates < enough) {
        // One radius level at a time across all tables.
        const int r = std::popcount(flips[f]);
        std::size_t level_end = f;
        while (level_end < flips.size() && std::popcount(flips[level_end]) == r) ++level_end;
        for (std::size_t t = 0; t < tables_.size() && candidates < enough; ++t) {
          for (std::size_t m = f; m < level_end && candidates < enough; ++m) scan(tables_[t], keys[t] ^ flips[m]);
        }
        f = level_end;
      }
      for (std::size_t c = 0; c < candidates; ++c) {
        const int d = dist(q, cand[c]);
        if (!best.full() || d <= best.worst()) best.offer(d, cand[c]);
      }
    }
    if (candidates < static_cast<std::size_t>(k)) {
      best = BestK<int>(k);
      for (std::size_t i = 0; i < n; ++i) best.offer(dist(q, static_cast<std::uint32_t>(i)), static_cast<std::uint32_t>(i));
    }
    for (const auto& [d, i] : best.items()) {
      out.pairs.push_back({static_cast<std::uint32_t>(qi), i, static_cast<double>(d)});
    }
  }
  return out;
}

}  // namespace coverscan
