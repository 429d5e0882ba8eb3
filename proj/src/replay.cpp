#include "memr/replay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "memr/binary_io.hpp"

namespace memr {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void write_transition(std::ostream& os, const EnvTransition& t) {
  io::write_f64_vec(os, t.state);
  io::write_f64_vec(os, t.action);
  io::write_f64_vec(os, t.next_state);
  io::write_f64(os, t.reward);
  io::write_u32(os, t.done ? 1 : 0);
  io::write_f64(os, t.priority);
}

EnvTransition read_transition(std::istream& is) {
  EnvTransition t;
  t.state = io::read_f64_vec(is, "transition state");
  t.action = io::read_f64_vec(is, "transition action");
  t.next_state = io::read_f64_vec(is, "transition next_state");
  t.reward = io::read_f64(is, "transition reward");
  t.done = io::read_u32(is, "transition done") != 0;
  t.priority = io::read_f64(is, "transition priority");
  return t;
}

void write_model_sample(std::ostream& os, const ModelSample& s) {
  io::write_f64_vec(os, s.state);
  io::write_f64_vec(os, s.action);
  io::write_f64_vec(os, s.next_state);
  io::write_f64(os, s.reward);
  io::write_f64(os, s.weight);
  io::write_u64(os, s.round);
}

ModelSample read_model_sample(std::istream& is) {
  ModelSample s;
  s.state = io::read_f64_vec(is, "model sample state");
  s.action = io::read_f64_vec(is, "model sample action");
  s.next_state = io::read_f64_vec(is, "model sample next_state");
  s.reward = io::read_f64(is, "model sample reward");
  s.weight = io::read_f64(is, "model sample weight");
  s.round = io::read_u64(is, "model sample round");
  return s;
}

}  // namespace

SumTree::SumTree(std::size_t min_leaves) {
  if (min_leaves == 0) throw std::invalid_argument("SumTree: need at least one leaf");
  leaves_ = next_pow2(min_leaves);
  nodes_.assign(2 * leaves_, 0.0);
}

double SumTree::leaf(std::size_t i) const {
  if (i >= leaves_) throw std::invalid_argument("SumTree::leaf: index out of range");
  return nodes_[leaves_ + i];
}

void SumTree::set(std::size_t i, double value) {
  if (i >= leaves_) throw std::invalid_argument("SumTree::set: index out of range");
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("SumTree::set: leaf mass must be finite and >= 0");
  }
  std::size_t node = leaves_ + i;
  nodes_[node] = value;
  node >>= 1;
  while (node >= 1) {
    nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
    node >>= 1;
  }
}

std::size_t SumTree::find_prefix(double u) const {
  std::size_t node = 1;
  while (node < leaves_) {
    const std::size_t left = 2 * node;
    if (u < nodes_[left]) {
      node = left;
    } else {
      u -= nodes_[left];
      node = left + 1;
    }
  }
  return node - leaves_;
}

void SumTree::save(std::ostream& os) const {
  io::write_u64(os, leaves_);
  for (std::size_t i = 0; i < leaves_; ++i) io::write_f64(os, nodes_[leaves_ + i]);
}

void SumTree::load(std::istream& is) {
  const std::size_t leaves = io::read_u64(is, "sumtree leaves");
  if (leaves == 0 || (leaves & (leaves - 1)) != 0) {
    throw std::runtime_error("SumTree::load: leaf count not a power of two");
  }
  leaves_ = leaves;
  nodes_.assign(2 * leaves_, 0.0);
  for (std::size_t i = 0; i < leaves_; ++i) {
    const double v = io::read_f64(is, "sumtree leaf");
    nodes_[leaves_ + i] = v;
  }
  for (std::size_t node = leaves_ - 1; node >= 1; --node) {
    nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
  }
}

EnvReplayBuffer::EnvReplayBuffer(std::size_t capacity, double alpha, double eps)
    : capacity_(capacity), alpha_(alpha), eps_(eps), tree_(capacity) {
  if (capacity == 0) throw std::invalid_argument("EnvReplayBuffer: capacity must be >= 1");
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("EnvReplayBuffer: alpha must be in [0, 1]");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("EnvReplayBuffer: eps must be positive");
  slots_.resize(capacity_);
  round_of_.assign(capacity_, 0);
}

std::size_t EnvReplayBuffer::add(EnvTransition t) {
  t.priority = std::max(eps_, t.priority);
  const std::size_t slot = next_;
  const double mass = std::pow(t.priority, alpha_);
  slots_[slot] = std::move(t);
  round_of_[slot] = ++add_count_;
  tree_.set(slot, mass);
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  return slot;
}

std::vector<SampledState> EnvReplayBuffer::sample_states(std::size_t m, double beta,
                                                         Rng& rng) const {
  if (size_ == 0) throw std::invalid_argument("EnvReplayBuffer: cannot sample empty buffer");
  if (m == 0) throw std::invalid_argument("EnvReplayBuffer: m must be >= 1");
  if (beta < 0.0 || beta > 1.0) {
    throw std::invalid_argument("EnvReplayBuffer: beta must be in [0, 1]");
  }
  const double total = tree_.total();
  const double n = static_cast<double>(size_);

  std::vector<SampledState> out;
  out.reserve(m);
  double max_raw = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double lo = total * static_cast<double>(j) / static_cast<double>(m);
    const double hi = total * static_cast<double>(j + 1) / static_cast<double>(m);
    const double u = rng.uniform(lo, hi);
    std::size_t idx = tree_.find_prefix(u);
    if (idx >= size_) idx = size_ - 1;  // guards float fallout at the top edge
    const double prob = tree_.leaf(idx) / total;
    const double raw = std::pow(n * prob, -beta);
    max_raw = std::max(max_raw, raw);
    SampledState s;
    s.index = idx;
    s.round = round_of_[idx];
    s.state = slots_[idx].state;
    s.probability = prob;
    s.weight = raw;
    out.push_back(std::move(s));
  }
  for (auto& s : out) s.weight /= max_raw;
  return out;
}

void EnvReplayBuffer::update_priorities(std::span<const std::size_t> indices,
                                        std::span<const double> new_priorities,
                                        std::span<const std::uint64_t> rounds) {
  if (indices.size() != new_priorities.size()) {
    throw std::invalid_argument("update_priorities: index/priority length mismatch");
  }
  if (!rounds.empty() && rounds.size() != indices.size()) {
    throw std::invalid_argument("update_priorities: rounds length mismatch");
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= capacity_ || round_of_[i] == 0) {
      throw std::invalid_argument("update_priorities: index not occupied");
    }
    if (!rounds.empty() && rounds[k] != round_of_[i]) {
      ++stale_updates_;
      continue;
    }
    const double p = std::max(eps_, new_priorities[k]);
    slots_[i].priority = p;
    tree_.set(i, std::pow(p, alpha_));
  }
}

const EnvTransition& EnvReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::invalid_argument("EnvReplayBuffer::at: index out of range");
  return slots_[i];
}

std::uint64_t EnvReplayBuffer::round_of(std::size_t i) const {
  if (i >= size_) throw std::invalid_argument("EnvReplayBuffer::round_of: index out of range");
  return round_of_[i];
}

void EnvReplayBuffer::save(std::ostream& os) const {
  io::write_u64(os, capacity_);
  io::write_f64(os, alpha_);
  io::write_f64(os, eps_);
  io::write_u64(os, size_);
  io::write_u64(os, next_);
  io::write_u64(os, add_count_);
  io::write_u64(os, stale_updates_);
  for (std::size_t i = 0; i < size_; ++i) {
    write_transition(os, slots_[i]);
    io::write_u64(os, round_of_[i]);
  }
}

EnvReplayBuffer EnvReplayBuffer::load(std::istream& is) {
  const std::size_t capacity = io::read_u64(is, "env buffer capacity");
  const double alpha = io::read_f64(is, "env buffer alpha");
  const double eps = io::read_f64(is, "env buffer eps");
  EnvReplayBuffer buf(capacity, alpha, eps);
  buf.size_ = io::read_u64(is, "env buffer size");
  buf.next_ = io::read_u64(is, "env buffer next");
  buf.add_count_ = io::read_u64(is, "env buffer add count");
  buf.stale_updates_ = io::read_u64(is, "env buffer stale count");
  if (buf.size_ > capacity || buf.next_ >= std::max<std::size_t>(capacity, 1)) {
    throw std::runtime_error("EnvReplayBuffer::load: inconsistent sizes");
  }
  for (std::size_t i = 0; i < buf.size_; ++i) {
    buf.slots_[i] = read_transition(is);
    buf.round_of_[i] = io::read_u64(is, "env buffer round");
    buf.tree_.set(i, std::pow(buf.slots_[i].priority, alpha));
  }
  return buf;
}

SegmentedModelBuffer::SegmentedModelBuffer(std::size_t segment_size,
                                           std::size_t segment_capacity)
    : segment_size_(segment_size), ring_(segment_capacity) {
  if (segment_size == 0 || segment_capacity == 0) {
    throw std::invalid_argument("SegmentedModelBuffer: sizes must be >= 1");
  }
}

std::uint64_t SegmentedModelBuffer::push_segment(std::vector<ModelSample> batch) {
  if (batch.size() != segment_size_) {
    throw std::invalid_argument("SegmentedModelBuffer: batch size must equal segment size");
  }
  const std::uint64_t round = next_round_++;
  for (auto& s : batch) s.round = round;
  ring_[next_] = Segment{round, std::move(batch)};
  next_ = (next_ + 1) % ring_.size();
  count_ = std::min(count_ + 1, ring_.size());
  return round;
}

std::vector<ModelSample> SegmentedModelBuffer::sample_batch(std::size_t b, Rng& rng) const {
  if (count_ == 0) throw std::invalid_argument("SegmentedModelBuffer: buffer is empty");
  if (b == 0 || b > segment_size_) {
    throw std::invalid_argument("SegmentedModelBuffer: batch size must be in [1, segment size]");
  }
  // Occupied slots are 0..count_-1 until the ring wraps, then all slots.
  const std::size_t pick = rng.uniform_index(count_);
  const Segment& seg = ring_[count_ < ring_.size() ? pick : (next_ + pick) % ring_.size()];

  std::vector<std::size_t> idx(segment_size_);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<ModelSample> out;
  out.reserve(b);
  for (std::size_t j = 0; j < b; ++j) {
    const std::size_t r = j + rng.uniform_index(segment_size_ - j);
    std::swap(idx[j], idx[r]);
    out.push_back(seg.items[idx[j]]);
  }
  for (const auto& s : out) {
    if (s.round != seg.round) {
      throw std::logic_error("SegmentedModelBuffer: batch mixes generation rounds");
    }
  }
  return out;
}

const std::vector<ModelSample>& SegmentedModelBuffer::segment(std::size_t occupied_index) const {
  if (occupied_index >= count_) {
    throw std::invalid_argument("SegmentedModelBuffer::segment: index out of range");
  }
  const std::size_t slot =
      count_ < ring_.size() ? occupied_index : (next_ + occupied_index) % ring_.size();
  return ring_[slot].items;
}

void SegmentedModelBuffer::save(std::ostream& os) const {
  io::write_u64(os, segment_size_);
  io::write_u64(os, ring_.size());
  io::write_u64(os, next_);
  io::write_u64(os, count_);
  io::write_u64(os, next_round_);
  for (std::size_t i = 0; i < count_; ++i) {
    const std::size_t slot = count_ < ring_.size() ? i : (next_ + i) % ring_.size();
    io::write_u64(os, ring_[slot].round);
    for (const auto& s : ring_[slot].items) write_model_sample(os, s);
  }
}

SegmentedModelBuffer SegmentedModelBuffer::load(std::istream& is) {
  const std::size_t segment_size = io::read_u64(is, "model buffer segment size");
  const std::size_t capacity = io::read_u64(is, "model buffer capacity");
  SegmentedModelBuffer buf(segment_size, capacity);
  const std::size_t next = io::read_u64(is, "model buffer next");
  const std::size_t count = io::read_u64(is, "model buffer count");
  buf.next_round_ = io::read_u64(is, "model buffer round counter");
  if (count > capacity || next >= capacity) {
    throw std::runtime_error("SegmentedModelBuffer::load: inconsistent sizes");
  }
  // Segments were written oldest-first; replay them through the ring.
  for (std::size_t i = 0; i < count; ++i) {
    Segment seg;
    seg.round = io::read_u64(is, "model buffer segment round");
    seg.items.resize(segment_size);
    for (auto& s : seg.items) s = read_model_sample(is);
    buf.ring_[buf.next_] = std::move(seg);
    buf.next_ = (buf.next_ + 1) % capacity;
    buf.count_ = std::min(buf.count_ + 1, capacity);
  }
  if (buf.next_ != next || buf.count_ != count) {
    throw std::runtime_error("SegmentedModelBuffer::load: ring state mismatch");
  }
  return buf;
}

double BetaSchedule::at(long step) const {
  if (step < 0) throw std::invalid_argument("BetaSchedule: step must be >= 0");
  if (total_steps <= 0) return beta_end;
  const double frac =
      std::min(1.0, static_cast<double>(step) / static_cast<double>(total_steps));
  return beta_start + (beta_end - beta_start) * frac;
}

}  // namespace memr
