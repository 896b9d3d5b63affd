#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgrao/core.hpp"
#include "mgrao/learner.hpp"
#include "mgrao/rng.hpp"

namespace mgrao {

// Resource amounts drawn for children are clipped into [kResourceFloor, 1]
// so every child owns a usable, strictly positive amount.
inline constexpr double kResourceFloor = 1e-6;

// Task quality saturates once the committed amount covers the type's demand:
// q = min(1, amount / demand). Demands are strictly positive.
struct QualityModel {
  std::vector<double> demand;  // per task type, in (0, 1]

  double quality(TaskTypeId type, double amount) const {
    const double d = demand.at(static_cast<std::size_t>(type));
    if (!(d > 0.0)) throw std::invalid_argument("QualityModel: demand must be positive");
    if (!(amount >= 0.0)) throw std::invalid_argument("QualityModel: negative amount");
    return std::min(1.0, amount / d);
  }
};

// How a parent picks the child for each atomic task: explore with
// probability epsilon (Boltzmann over its value estimates), otherwise take
// the greedy argmax.
struct ChildSelectionPolicy {
  double epsilon = 0.0;  // in [0, 1]

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
      throw std::invalid_argument("ChildSelectionPolicy: epsilon outside [0, 1]");
  }
};

// Each episode every parent independently toggles between active and
// inactive with this probability. Identity, group and preferences persist
// across absences.
struct VolatilityModel {
  double churn_probability = 0.0;  // in [0, 1]

  void validate() const {
    if (!(churn_probability >= 0.0 && churn_probability <= 1.0))
      throw std::invalid_argument("VolatilityModel: churn probability outside [0, 1]");
  }
};

struct ParentAgent {
  ParentId id = 0;
  bool active = true;
  std::vector<double> preferences;  // hidden valuation over task types, sums to 1
  // Running mean of task values received, per (child, task type); this is
  // the estimate child selection acts on. Unseen pairs estimate 0.
  std::vector<std::vector<double>> value_mean;
  std::vector<std::vector<long long>> value_count;

  double estimate(ChildId child, TaskTypeId type) const {
    return value_mean.at(child).at(type);
  }

  void observe(ChildId child, TaskTypeId type, double value) {
    long long& n = value_count.at(child).at(type);
    ++n;
    value_mean[child][type] += (value - value_mean[child][type]) / static_cast<double>(n);
  }
};

// A child either splits every possessed resource uniformly over the task
// types (fixed baseline) or runs a learner.
struct ChildAgent {
  ChildId id = 0;
  int task_types = 0;
  std::optional<MgraoLearner> learner;

  // Amount committed to one task; queried before the sample is recorded.
  double planned_amount(ParentId parent, TaskTypeId type, ResourceId resource,
                        double possessed) const {
    if (!learner) return possessed / static_cast<double>(task_types);
    return learner->allocation_for(parent, type, resource, possessed);
  }

  void note_allocation(ParentId parent) {
    if (learner) learner->record_sample(parent);
  }

  void feedback(ParentId parent, TaskTypeId type, double value) {
    if (learner) learner->update(parent, type, value);
  }
};

// Static world layout plus everything the valuation side needs.
struct World {
  SystemDescriptor descriptor;
  QualityModel quality;
  std::vector<std::vector<double>> parent_preferences;  // per parent, over all types
};

struct WorldParams {
  int parents = 10;
  int children = 1;
  int task_types = 20;
  int composite_type_count = 10;
  int composite_size = 5;
  int resources = 1;

  void validate() const {
    if (parents < 1) throw std::invalid_argument("WorldParams: parents < 1");
    if (children < 1) throw std::invalid_argument("WorldParams: children < 1");
    if (task_types < 1) throw std::invalid_argument("WorldParams: task_types < 1");
    if (composite_type_count < 1)
      throw std::invalid_argument("WorldParams: composite_type_count < 1");
    if (composite_size < 1 || composite_size > task_types)
      throw std::invalid_argument("WorldParams: composite_size outside [1, task_types]");
    if (resources < 1) throw std::invalid_argument("WorldParams: resources < 1");
    if (parents < composite_type_count)
      throw std::invalid_argument("WorldParams: fewer parents than composite types");
  }
};

// Draw one world. The draw order is fixed (member sets, demands, resources,
// preferences) so a seed pins the world bit for bit:
//   member sets: uniform distinct type ids, stored ascending
//   demand per type: uniform on (0, 1]
//   resource amounts: normal(0.5, 0.2) clipped to [kResourceFloor, 1]
//   preferences: symmetric Dirichlet via normalized unit exponentials
inline World build_world(const WorldParams& params, std::mt19937_64& rng) {
  params.validate();
  World world;
  SystemDescriptor& sd = world.descriptor;
  sd.parent_count = params.parents;
  sd.child_count = params.children;
  sd.task_type_count = params.task_types;
  sd.resource_count = params.resources;

  std::uniform_real_distribution<double> u01(0.0, 1.0);

  // Composite member sets: partial Fisher-Yates over the type ids.
  for (int t = 0; t < params.composite_type_count; ++t) {
    std::vector<TaskTypeId> pool(params.task_types);
    std::iota(pool.begin(), pool.end(), 0);
    for (int k = 0; k < params.composite_size; ++k) {
      std::uniform_int_distribution<int> pick(k, params.task_types - 1);
      std::swap(pool[k], pool[pick(rng)]);
    }
    CompositeTaskType ct;
    ct.member_types.assign(pool.begin(), pool.begin() + params.composite_size);
    std::sort(ct.member_types.begin(), ct.member_types.end());
    sd.composite_types.push_back(std::move(ct));
  }

  for (int t = 0; t < params.task_types; ++t)
    world.quality.demand.push_back(1.0 - u01(rng));  // strictly positive

  std::normal_distribution<double> amount_dist(0.5, 0.2);
  sd.resource_map.amounts.assign(params.children,
                                 std::vector<double>(params.resources, 0.0));
  for (int c = 0; c < params.children; ++c) {
    for (int r = 0; r < params.resources; ++r) {
      sd.resource_map.amounts[c][r] =
          std::clamp(amount_dist(rng), kResourceFloor, 1.0);
    }
  }

  std::exponential_distribution<double> unit_exp(1.0);
  for (int p = 0; p < params.parents; ++p) {
    std::vector<double> pref(params.task_types);
    double total = 0.0;
    for (double& v : pref) {
      v = std::max(unit_exp(rng), 1e-12);  // keep every preference positive
      total += v;
    }
    for (double& v : pref) v /= total;
    world.parent_preferences.push_back(std::move(pref));
  }

  // Parent p issues composite type p mod |composites|; every type is owned
  // because there are at least as many parents as composite types.
  sd.composite_owners.assign(params.composite_type_count, {});
  for (int p = 0; p < params.parents; ++p)
    sd.composite_owners[p % params.composite_type_count].push_back(p);
  sd.task_frequency.assign(params.composite_type_count, 1);

  return world;
}

// Composite tasks issued this episode: one per active parent whose owned
// type is due, in ascending parent id order. Task ids are globally fresh.
struct Arrival {
  ParentId parent = 0;
  CompositeTask task;
};

inline std::vector<Arrival> generate_workload(const World& world,
                                              const std::vector<ParentAgent>& parents,
                                              long episode, TaskInstanceId& next_task_id,
                                              TaskInstanceId& next_composite_id) {
  std::vector<Arrival> arrivals;
  const SystemDescriptor& sd = world.descriptor;
  const int composite_count = static_cast<int>(sd.composite_types.size());
  for (const ParentAgent& parent : parents) {
    if (!parent.active) continue;
    const int ct = parent.id % composite_count;
    if (episode % sd.task_frequency[ct] != 0) continue;
    Arrival arrival;
    arrival.parent = parent.id;
    arrival.task.composite_id = next_composite_id++;
    arrival.task.composite_type = ct;
    arrival.task.issued_at = episode;
    for (TaskTypeId type : sd.composite_types[ct].member_types)
      arrival.task.atomics.push_back(AtomicTask{next_task_id++, type, ""});
    arrivals.push_back(std::move(arrival));
  }
  return arrivals;
}

// Pick a child for every atomic task of one composite. With a single child
// no randomness is consumed. Otherwise two draws per atomic keep the stream
// layout identical whichever branch is taken: explore with probability
// epsilon (Boltzmann over the parent's estimates), else greedy argmax with
// ties broken towards the lowest child id.
inline TaskAllocation allocate_composite(const ParentAgent& parent, const CompositeTask& task,
                                         int child_count, const ChildSelectionPolicy& policy,
                                         std::mt19937_64& rng) {
  policy.validate();
  if (child_count < 1) throw std::invalid_argument("allocate_composite: no children");
  TaskAllocation allocation;
  allocation.composite_id = task.composite_id;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (const AtomicTask& atomic : task.atomics) {
    if (child_count == 1) {
      allocation.child_of_atomic.push_back(0);
      continue;
    }
    const double explore = u01(rng);
    const double pick = u01(rng);
    ChildId chosen = 0;
    if (explore < policy.epsilon) {
      // Boltzmann selection over e^{estimate}.
      std::vector<double> mass(child_count);
      double total = 0.0;
      for (int c = 0; c < child_count; ++c) {
        mass[c] = std::exp(parent.estimate(c, atomic.type));
        total += mass[c];
      }
      double cut = pick * total;
      double acc = 0.0;
      chosen = child_count - 1;
      for (int c = 0; c < child_count; ++c) {
        acc += mass[c];
        if (cut < acc) {
          chosen = c;
          break;
        }
      }
    } else {
      double best = parent.estimate(0, atomic.type);
      for (int c = 1; c < child_count; ++c) {
        const double est = parent.estimate(c, atomic.type);
        if (est > best) {
          best = est;
          chosen = c;
        }
      }
    }
    allocation.child_of_atomic.push_back(chosen);
  }
  return allocation;
}

// Relative value the parent puts on each atomic of a composite: its hidden
// preferences restricted to the member types and re-normalized. Aligned
// with CompositeTask::atomics; entries are positive and sum to 1.
inline std::vector<double> compute_ctv(const CompositeTask& task,
                                       const std::vector<double>& preferences) {
  std::vector<double> shares(task.atomics.size());
  double total = 0.0;
  for (std::size_t i = 0; i < task.atomics.size(); ++i) {
    shares[i] = preferences.at(task.atomics[i].type);
    total += shares[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("compute_ctv: no positive preference mass");
  for (double& s : shares) s /= total;
  return shares;
}

// Aggregate quality of one composite: preference-share weighted task quality.
inline double compute_taq(const std::vector<double>& ctv, const std::vector<double>& quality) {
  if (ctv.size() != quality.size())
    throw std::invalid_argument("compute_taq: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < ctv.size(); ++i) acc += ctv[i] * quality[i];
  return acc;
}

// Value attributed to one atomic task; summed over a composite this returns
// the aggregate quality exactly (the conservation invariant).
inline double compute_atv(double taq, double ctv_share) { return taq * ctv_share; }

// One volatility step: each parent toggles activity with the configured
// probability. Returns the number of flips. No draws when churn is off.
inline int churn_step(std::vector<ParentAgent>& parents, const VolatilityModel& volatility,
                      std::mt19937_64& rng) {
  volatility.validate();
  if (volatility.churn_probability <= 0.0) return 0;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int flips = 0;
  for (ParentAgent& parent : parents) {
    if (u01(rng) < volatility.churn_probability) {
      parent.active = !parent.active;
      ++flips;
    }
  }
  return flips;
}

struct SimulationConfig {
  bool use_learner = true;  // false runs the fixed uniform-split baseline
  int learner_groups = 1;   // parent groups m for learner children
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.0;
  double churn_probability = 0.0;
  std::uint64_t seed = 0;
};

/**
 * Episode loop over one world: churn, workload generation, per-composite
 * child selection, resource commitment, execution quality and value
 * feedback. Utility of an episode is the summed aggregate quality of the
 * composites issued in it.
 *
 * All randomness comes from streams derived from the configured seed, so a
 * (world, config) pair replays bit for bit.
 */
class Simulation {
 public:
  Simulation(World world, const SimulationConfig& cfg)
      : world_(std::move(world)),
        cfg_(cfg),
        churn_rng_(make_rng(cfg.seed, RngStream::kChurn)),
        alloc_rng_(make_rng(cfg.seed, RngStream::kAllocation)) {
    const auto issues = validate_system(world_.descriptor);
    if (!issues.empty())
      throw std::invalid_argument("Simulation: invalid system: " + issues.front());
    ChildSelectionPolicy{cfg_.epsilon}.validate();
    VolatilityModel{cfg_.churn_probability}.validate();
    const SystemDescriptor& sd = world_.descriptor;

    for (int p = 0; p < sd.parent_count; ++p) {
      ParentAgent parent;
      parent.id = p;
      parent.preferences = world_.parent_preferences.at(p);
      parent.value_mean.assign(sd.child_count, std::vector<double>(sd.task_type_count, 0.0));
      parent.value_count.assign(sd.child_count,
                                std::vector<long long>(sd.task_type_count, 0));
      parents_.push_back(std::move(parent));
    }

    for (int c = 0; c < sd.child_count; ++c) {
      ChildAgent child;
      child.id = c;
      child.task_types = sd.task_type_count;
      if (cfg_.use_learner) {
        LearnerConfig lc;
        lc.alpha = cfg_.alpha;
        lc.gamma = cfg_.gamma;
        lc.groups = cfg_.learner_groups;
        lc.task_types = sd.task_type_count;
        child.learner.emplace(lc, ParentGroupMap::round_robin(sd.parent_count, lc.groups),
                              sd.resource_count);
      }
      children_.push_back(std::move(child));
    }
  }

  // Advance one episode and return its utility.
  double run_episode() {
    churn_step(parents_, VolatilityModel{cfg_.churn_probability}, churn_rng_);
    const auto arrivals =
        generate_workload(world_, parents_, episode_, next_task_id_, next_composite_id_);
    double utility = 0.0;
    const SystemDescriptor& sd = world_.descriptor;
    const ChildSelectionPolicy policy{cfg_.epsilon};

    for (const Arrival& arrival : arrivals) {
      ParentAgent& parent = parents_[arrival.parent];
      const CompositeTask& task = arrival.task;
      const TaskAllocation allocation =
          allocate_composite(parent, task, sd.child_count, policy, alloc_rng_);

      // Execute every atomic: commit an amount of the first resource, read
      // off the resulting quality. The amount is planned before the sample
      // is recorded.
      std::vector<double> quality(task.atomics.size());
      for (std::size_t i = 0; i < task.atomics.size(); ++i) {
        const AtomicTask& atomic = task.atomics[i];
        ChildAgent& child = children_[allocation.child_of_atomic[i]];
        const double possessed = sd.resource_map.amount(child.id, 0);
        const double amount = child.planned_amount(parent.id, atomic.type, 0, possessed);
        child.note_allocation(parent.id);
        quality[i] = world_.quality.quality(atomic.type, amount);
        ++atomic_executions_;
      }

      // Valuation and feedback: the composite's aggregate quality is split
      // over the atomics in proportion to the parent's preference shares.
      const std::vector<double> ctv = compute_ctv(task, parent.preferences);
      const double taq = compute_taq(ctv, quality);
      utility += taq;
      double split_total = 0.0;
      for (std::size_t i = 0; i < task.atomics.size(); ++i) {
        const AtomicTask& atomic = task.atomics[i];
        ChildAgent& child = children_[allocation.child_of_atomic[i]];
        const double atv = compute_atv(taq, ctv[i]);
        split_total += atv;
        child.feedback(parent.id, atomic.type, atv);
        parent.observe(child.id, atomic.type, atv);
        ++feedback_events_;
      }
      max_conservation_error_ =
          std::max(max_conservation_error_, std::abs(split_total - taq));
    }

    ++episode_;
    return utility;
  }

  long episode() const { return episode_; }
  double max_conservation_error() const { return max_conservation_error_; }
  long long atomic_executions() const { return atomic_executions_; }
  long long feedback_events() const { return feedback_events_; }

  int active_parent_count() const {
    int n = 0;
    for (const ParentAgent& p : parents_) n += p.active ? 1 : 0;
    return n;
  }

  const std::vector<ParentAgent>& parents() const { return parents_; }
  const ChildAgent& child(int c) const { return children_.at(c); }
  const World& world() const { return world_; }

  // Amounts every child would commit right now, per task type and resource.
  SystemResourceAllocationSnapshot snapshot() const {
    const SystemDescriptor& sd = world_.descriptor;
    SystemResourceAllocationSnapshot snap;
    snap.episode = episode_;
    snap.amounts.assign(
        sd.child_count,
        std::vector<std::vector<double>>(sd.task_type_count,
                                         std::vector<double>(sd.resource_count, 0.0)));
    for (int c = 0; c < sd.child_count; ++c) {
      for (int r = 0; r < sd.resource_count; ++r) {
        const double possessed = sd.resource_map.amount(c, r);
        for (int t = 0; t < sd.task_type_count; ++t) {
          snap.amounts[c][t][r] = children_[c].planned_amount(0, t, r, possessed);
        }
      }
    }
    return snap;
  }

 private:
  World world_;
  SimulationConfig cfg_;
  std::vector<ParentAgent> parents_;
  std::vector<ChildAgent> children_;
  std::mt19937_64 churn_rng_;
  std::mt19937_64 alloc_rng_;
  long episode_ = 0;
  TaskInstanceId next_task_id_ = 0;
  TaskInstanceId next_composite_id_ = 0;
  double max_conservation_error_ = 0.0;
  long long atomic_executions_ = 0;
  long long feedback_events_ = 0;
};

}  // namespace mgrao
