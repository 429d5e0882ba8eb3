#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "memr/gaussian.hpp"
#include "memr/math_util.hpp"

namespace memr {

// Complete binary tree of partial sums over nonnegative leaf masses. Parents
// are always recomputed as left+right, so every internal node equals the
// exact floating-point sum of its children after any update sequence.
class SumTree {
 public:
  explicit SumTree(std::size_t min_leaves);

  std::size_t leaf_count() const { return leaves_; }
  double total() const { return nodes_[1]; }
  double leaf(std::size_t i) const;
  void set(std::size_t i, double value);

  // Leaf owning prefix mass u; valid for u in [0, total()).
  std::size_t find_prefix(double u) const;

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  std::size_t leaves_ = 0;
  std::vector<double> nodes_;  // 1-based heap layout, size 2*leaves_
};

struct EnvTransition {
  std::vector<double> state;
  std::vector<double> action;
  std::vector<double> next_state;
  double reward = 0.0;
  bool done = false;
  double priority = 1.0;
};

struct SampledState {
  std::size_t index = 0;        // slot in the buffer
  std::uint64_t round = 0;      // insertion round, for stale-update detection
  std::vector<double> state;
  double probability = 0.0;     // P(i) = p_i^alpha / sum_k p_k^alpha
  double weight = 1.0;          // (N*P(i))^-beta, max-normalized per batch
};

// Prioritized ring buffer of real transitions with a sum-tree index over
// priority^alpha.
class EnvReplayBuffer {
 public:
  EnvReplayBuffer(std::size_t capacity, double alpha, double eps = kPriorityEps);

  std::size_t add(EnvTransition t);  // returns the slot written

  // Stratified prioritized sampling: draw m prefixes, one per equal sub-range
  // of [0, total), and descend the tree. Weights are (N*P(i))^-beta divided
  // by the largest raw weight in this batch.
  std::vector<SampledState> sample_states(std::size_t m, double beta, Rng& rng) const;

  // Rewrites priorities (clamped at eps) and repairs the tree. When rounds is
  // nonempty, entries whose slot has been overwritten since sampling are
  // skipped and counted instead of applied.
  void update_priorities(std::span<const std::size_t> indices,
                         std::span<const double> new_priorities,
                         std::span<const std::uint64_t> rounds = {});

  const EnvTransition& at(std::size_t i) const;
  std::uint64_t round_of(std::size_t i) const;
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  double alpha() const { return alpha_; }
  double eps() const { return eps_; }
  std::uint64_t stale_update_count() const { return stale_updates_; }
  const SumTree& tree() const { return tree_; }

  void save(std::ostream& os) const;
  static EnvReplayBuffer load(std::istream& is);

 private:
  std::size_t capacity_;
  double alpha_;
  double eps_;
  SumTree tree_;
  std::vector<EnvTransition> slots_;
  std::vector<std::uint64_t> round_of_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;
  std::uint64_t add_count_ = 0;
  std::uint64_t stale_updates_ = 0;
};

struct ModelSample {
  std::vector<double> state;
  std::vector<double> action;
  std::vector<double> next_state;  // model-predicted
  double reward = 0.0;             // model-predicted
  double weight = 1.0;             // importance weight in (0, 1]
  std::uint64_t round = 0;         // generation round, stamped by the buffer
};

// Ring of fixed-size segments. Each segment holds exactly segment_size model
// rollouts generated under one sampling distribution; policy batches never
// span segments.
class SegmentedModelBuffer {
 public:
  SegmentedModelBuffer(std::size_t segment_size, std::size_t segment_capacity);

  // Stores the batch as one new segment (evicting the oldest when full) and
  // returns the generation round stamped on its entries.
  std::uint64_t push_segment(std::vector<ModelSample> batch);

  // Uniform segment choice, then b entries uniform without replacement from
  // that segment. All returned entries share one generation round.
  std::vector<ModelSample> sample_batch(std::size_t b, Rng& rng) const;

  std::size_t segment_size() const { return segment_size_; }
  std::size_t segment_capacity() const { return ring_.size(); }
  std::size_t segment_count() const { return count_; }
  std::size_t total_size() const { return count_ * segment_size_; }
  const std::vector<ModelSample>& segment(std::size_t occupied_index) const;

  void save(std::ostream& os) const;
  static SegmentedModelBuffer load(std::istream& is);

 private:
  struct Segment {
    std::uint64_t round = 0;
    std::vector<ModelSample> items;
  };

  std::size_t segment_size_;
  std::vector<Segment> ring_;
  std::size_t next_ = 0;
  std::size_t count_ = 0;
  std::uint64_t next_round_ = 0;
};

// Linear anneal of the importance-weight exponent.
struct BetaSchedule {
  double beta_start = 0.4;
  double beta_end = 1.0;
  long total_steps = 1;

  double at(long step) const;
};

}  // namespace memr
