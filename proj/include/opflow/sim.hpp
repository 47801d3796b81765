#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opflow/core.hpp"
#include "opflow/io.hpp"

namespace opflow {

inline constexpr JobId kIdle = std::numeric_limits<JobId>::max();

/// What a non-clairvoyant scheduler may know about one active job. Sizes of
/// operations after the active one, and the job's operation count, are not
/// representable here.
struct VisibleJobState {
	JobId id = 0;
	Time release = 0;
	std::size_t active_op = 0;
	Size active_size = 0;       ///< full size of the active operation
	Size active_remaining = 0;  ///< p_{j_i}(t), always >= 1
	std::span<const Size> completed_ops;
};

struct SchedulerView {
	Time now = 0;
	std::span<const VisibleJobState> active;  ///< sorted by id
};

/// Privileged channel for clairvoyant baselines: true remaining total size per
/// job id. Only handed to policies that ask for it, and only when the source is
/// a fixed instance.
struct RemainingOracle {
	std::span<const Size> remaining_total;
	Size remaining(JobId j) const { return remaining_total[j]; }
};

class Policy {
public:
	virtual ~Policy() = default;
	virtual std::string name() const = 0;
	virtual bool clairvoyant() const { return false; }
	/// Called once before a run.
	virtual void reset() {}
	/// Pick an active job to process during [now, now+1], or nullopt to idle.
	/// `oracle` is non-null only for clairvoyant policies.
	virtual std::optional<JobId> choose(const SchedulerView& view, const RemainingOracle* oracle) = 0;
};

/// Everything an adaptive adversary can see when asked for a size.
struct RunHistory {
	Time now = 0;
	std::span<const JobId> processed;            ///< slot t -> job or kIdle, t < now
	std::span<const std::size_t> completed_ops;  ///< per job
	std::span<const std::vector<Size>> revealed; ///< per job, sizes revealed so far
};

/// Source of jobs whose operation sizes are decided at reveal time.
class Adversary {
public:
	virtual ~Adversary() = default;
	/// Release date per job id. Fixed up front.
	virtual std::vector<Time> releases() const = 0;
	/// Size of operation `op` of `job`, called exactly once when it becomes
	/// active; nullopt means the job has no operation `op`.
	virtual std::optional<Size> reveal(JobId job, std::size_t op, const RunHistory& history) = 0;
	virtual void reset() {}
};

/// Per-timestep record of one run.
struct Trace {
	std::vector<Time> release;
	std::vector<Time> completion;
	std::vector<JobId> processed;        ///< slot [t, t+1] for t < horizon()
	std::vector<std::uint32_t> active;   ///< |J(t)| for t in [0, horizon()]

	Time horizon() const noexcept { return static_cast<Time>(processed.size()); }
	std::size_t job_count() const noexcept { return release.size(); }
	std::uint32_t active_at(Time t) const noexcept;
	Time flow(JobId j) const { return completion.at(j) - release.at(j); }
	std::vector<Time> flows() const;
	Time total_flow() const;
	/// y_j(t) for every job.
	std::vector<Size> cumulative_processing(Time t) const;

	bool operator==(const Trace&) const = default;
};

struct SimResult {
	std::string policy;
	Trace trace;
	Instance realized;
};

struct SimOptions {
	/// Abort once the clock passes this. 0 means: total volume + max release
	/// for fixed instances, kDefaultAdversaryGuard for adversaries.
	Time horizon_guard = 0;
	static constexpr Time kDefaultAdversaryGuard = Time{1} << 26;
};

class HorizonExceeded : public InvariantViolation {
public:
	explicit HorizonExceeded(Time guard)
		: InvariantViolation("sim.horizon_guard", "run exceeded " + std::to_string(guard) + " slots") {}
};

SimResult simulate(const Instance& instance, Policy& policy, SimOptions options = {});
SimResult simulate(Adversary& source, Policy& policy, SimOptions options = {});

struct LocalCount {
	Time t = 0;
	std::uint32_t a = 0;
	std::uint32_t b = 0;
	double ratio = 1.0;
};

/// Pointwise active-job counts of two runs over the same realized instance.
std::vector<LocalCount> local_counts(const SimResult& a, const SimResult& b);

/// Largest a/b ratio and the earliest time it occurs.
struct MaxLocalRatio {
	double ratio = 1.0;
	Time at = 0;
};
MaxLocalRatio max_local_ratio(std::span<const LocalCount> counts);

/// Columns t, processed_job, alg_active, opt_active; idle slots print -1.
void write_trace_csv(std::ostream& out, const Trace& alg, const Trace& opt);

/// {policy, total_flow, flows, realized_instance}
Json summary_json(const SimResult& run);

}  // namespace opflow
