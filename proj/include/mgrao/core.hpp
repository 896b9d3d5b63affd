#pragma once

#include <set>
#include <string>
#include <vector>

namespace mgrao {

using ParentId = int;
using ChildId = int;
using TaskTypeId = int;
using ResourceId = int;
using TaskInstanceId = long long;

// A composite task type is a fixed set of atomic task types, stored as a
// strictly increasing id list. Composite types are index-addressed.
struct CompositeTaskType {
  std::vector<TaskTypeId> member_types;
};

// One atomic work item. The payload is carried around but never interpreted;
// behaviour depends only on the type id.
struct AtomicTask {
  TaskInstanceId task_id = 0;
  TaskTypeId type = 0;
  std::string payload;
};

// One issued instance of a composite type: exactly one atomic per member
// type, in member order.
struct CompositeTask {
  TaskInstanceId composite_id = 0;
  int composite_type = 0;  // index into SystemDescriptor::composite_types
  std::vector<AtomicTask> atomics;
  long issued_at = 0;  // episode index
};

// Amount of each resource each child possesses; amounts[child][resource].
struct ResourceMap {
  std::vector<std::vector<double>> amounts;

  double amount(ChildId child, ResourceId resource) const {
    return amounts.at(child).at(resource);
  }
};

// Which child runs which atomic task of one composite.
struct TaskAllocation {
  TaskInstanceId composite_id = 0;
  std::vector<ChildId> child_of_atomic;  // aligned with CompositeTask::atomics
};

// Static description of a full system; everything a run needs apart from the
// random seed.
struct SystemDescriptor {
  int parent_count = 0;
  int child_count = 0;
  int task_type_count = 0;  // atomic types, dense ids 0..n-1
  int resource_count = 0;
  std::vector<CompositeTaskType> composite_types;
  std::vector<std::vector<ParentId>> composite_owners;  // per composite type
  std::vector<int> task_frequency;  // episodes between arrivals, >= 1, per composite type
  ResourceMap resource_map;
};

// The set of atomic types a composite instance spans.
inline std::set<TaskTypeId> type_of_composite(const CompositeTask& task) {
  std::set<TaskTypeId> types;
  for (const AtomicTask& a : task.atomics) types.insert(a.type);
  return types;
}

// Structural checks over a descriptor; returns one message per defect, empty
// means the system is runnable.
inline std::vector<std::string> validate_system(const SystemDescriptor& sd) {
  std::vector<std::string> issues;
  auto flag = [&issues](const std::string& msg) { issues.push_back(msg); };

  if (sd.parent_count <= 0) flag("parent_count must be positive");
  if (sd.child_count <= 0) flag("child_count must be positive");
  if (sd.task_type_count <= 0) flag("task_type_count must be positive");
  if (sd.resource_count <= 0) flag("resource_count must be positive");
  if (sd.composite_types.empty()) flag("no composite task types");

  for (std::size_t t = 0; t < sd.composite_types.size(); ++t) {
    const auto& members = sd.composite_types[t].member_types;
    const std::string where = "composite type " + std::to_string(t);
    if (members.empty()) flag(where + ": empty member set");
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (members[k] < 0 || members[k] >= sd.task_type_count)
        flag(where + ": member type id out of range");
      if (k > 0 && members[k] <= members[k - 1])
        flag(where + ": member types not strictly increasing");
    }
  }

  if (sd.composite_owners.size() != sd.composite_types.size()) {
    flag("composite_owners does not cover every composite type");
  } else {
    for (std::size_t t = 0; t < sd.composite_owners.size(); ++t) {
      const std::string where = "composite type " + std::to_string(t);
      if (sd.composite_owners[t].empty()) flag(where + ": no owning parent");
      for (ParentId p : sd.composite_owners[t]) {
        if (p < 0 || p >= sd.parent_count) flag(where + ": owner id out of range");
      }
    }
  }

  if (sd.task_frequency.size() != sd.composite_types.size()) {
    flag("task_frequency does not cover every composite type");
  } else {
    for (std::size_t t = 0; t < sd.task_frequency.size(); ++t) {
      if (sd.task_frequency[t] < 1)
        flag("composite type " + std::to_string(t) + ": task frequency below 1");
    }
  }

  if (static_cast<int>(sd.resource_map.amounts.size()) != sd.child_count) {
    flag("resource map does not cover every child");
  } else {
    for (int c = 0; c < sd.child_count; ++c) {
      if (static_cast<int>(sd.resource_map.amounts[c].size()) != sd.resource_count) {
        flag("child " + std::to_string(c) + ": resource row has wrong length");
        continue;
      }
      for (int r = 0; r < sd.resource_count; ++r) {
        if (!(sd.resource_map.amounts[c][r] >= 0.0))
          flag("child " + std::to_string(c) + ": negative resource amount");
      }
    }
  }

  return issues;
}

// Committed resource amounts at one episode; amounts[child][task type][resource].
struct SystemResourceAllocationSnapshot {
  long episode = 0;
  std::vector<std::vector<std::vector<double>>> amounts;
};

}  // namespace mgrao
