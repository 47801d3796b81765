#pragma once

#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "opflow/core.hpp"
#include "opflow/sim.hpp"

namespace opflow {

/// Shortest remaining total processing time. Clairvoyant; used as the optimal
/// baseline. Ties go to the smaller job id.
class SrptPolicy final : public Policy {
public:
	std::string name() const override { return "srpt"; }
	bool clairvoyant() const override { return true; }
	std::optional<JobId> choose(const SchedulerView& view, const RemainingOracle* oracle) override;
};

/// SRPT over active operations. Ties: smaller operation index, then smaller job id.
class OpsSrptPolicy final : public Policy {
public:
	std::string name() const override { return "ops-srpt"; }
	std::optional<JobId> choose(const SchedulerView& view, const RemainingOracle* oracle) override;
};

/// Queue/stack state of the chunk algorithm.
struct ChunkAlgState {
	/// (current class, size of active operation, job id); begin() is front.
	using FullKey = std::tuple<int, Size, JobId>;

	std::vector<int> cls;          ///< current class by job id
	std::set<FullKey> full;        ///< J^full
	std::vector<JobId> part;       ///< J^part, back() is top

	bool has_top() const noexcept { return !part.empty(); }
	JobId top() const { return part.back(); }
	/// +inf (INT_MAX) when the stack is empty.
	int top_class() const;
	const FullKey& front() const { return *full.begin(); }
};

/// One J^full insertion: job j entered the queue at time t with class k.
struct FullInsertion {
	Time t = 0;
	JobId job = 0;
	int cls = 0;
	bool operator==(const FullInsertion&) const = default;
};

/// The chunk/class algorithm:
///  1. while |J^full| >= |J(t)|/4 and class(front) < class(top): move front to the stack;
///  2. process top;
///  3. on the next step, if top's new active operation q has k_q >= class + 1,
///     move it back to J^full with class k_q.
/// Throws InvariantViolation if the stack stops being strictly class-monotone
/// or |J^full| drops below |J(t)|/4 - 1.
class ChunkPolicy final : public Policy {
public:
	std::string name() const override { return "chunk"; }
	void reset() override;
	std::optional<JobId> choose(const SchedulerView& view, const RemainingOracle* oracle) override;

	const ChunkAlgState& state() const noexcept { return state_; }
	std::span<const FullInsertion> insertions() const noexcept { return insertions_; }
	/// Number of invariant checks performed so far (two per step).
	std::size_t checks() const noexcept { return checks_; }

private:
	void check_invariants(const SchedulerView& view, const char* where);
	void insert_full(JobId j, int k, Size active_size, Time t);

	ChunkAlgState state_;
	std::vector<FullInsertion> insertions_;
	std::vector<char> known_;
	std::vector<std::size_t> seen_op_;
	JobId last_ = kIdle;
	std::size_t checks_ = 0;
};

/// Replays a fixed per-slot schedule (kIdle entries idle).
class ReplayPolicy final : public Policy {
public:
	ReplayPolicy(std::string name, std::vector<JobId> schedule)
		: name_(std::move(name)), schedule_(std::move(schedule)) {}
	std::string name() const override { return name_; }
	std::optional<JobId> choose(const SchedulerView& view, const RemainingOracle* oracle) override;

private:
	std::string name_;
	std::vector<JobId> schedule_;
};

struct BruteForceResult {
	Time total_flow = 0;
	std::vector<JobId> schedule;  ///< witness, one entry per slot
};

/// Exact minimum total flow time over all integer-slot preemptive schedules,
/// by memoized search over (time, remaining sizes). Throws InputError when the
/// total volume exceeds `cap`.
BruteForceResult brute_force_optimal(const Instance& instance, Size cap = 20);

/// "srpt", "ops-srpt", "chunk". "bruteforce" needs the instance, see make_policy_for.
std::unique_ptr<Policy> make_policy(const std::string& name);
/// Like make_policy, but also builds "bruteforce" (optimal replay) for `instance`.
std::unique_ptr<Policy> make_policy_for(const std::string& name, const Instance& instance);

}  // namespace opflow
