#include "opflow/sim.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace opflow {

std::uint32_t Trace::active_at(Time t) const noexcept
{
	if (t < 0 || t >= static_cast<Time>(active.size()))
		return 0;
	return active[static_cast<std::size_t>(t)];
}

std::vector<Time> Trace::flows() const
{
	std::vector<Time> f(job_count());
	for (JobId j = 0; j < f.size(); ++j)
		f[j] = flow(j);
	return f;
}

Time Trace::total_flow() const
{
	Time sum = 0;
	for (JobId j = 0; j < job_count(); ++j)
		sum += flow(j);
	return sum;
}

std::vector<Size> Trace::cumulative_processing(Time t) const
{
	std::vector<Size> y(job_count(), 0);
	const Time end = std::min(t, horizon());
	for (Time s = 0; s < end; ++s) {
		const JobId j = processed[static_cast<std::size_t>(s)];
		if (j != kIdle)
			++y[j];
	}
	return y;
}

namespace {

class FixedSource final : public Adversary {
public:
	explicit FixedSource(const Instance& inst) : inst_(inst) {}

	std::vector<Time> releases() const override
	{
		std::vector<Time> r;
		r.reserve(inst_.size());
		for (const auto& j : inst_.jobs)
			r.push_back(j.release);
		return r;
	}

	std::optional<Size> reveal(JobId job, std::size_t op, const RunHistory&) override
	{
		const auto& ops = inst_.jobs[job].ops;
		if (op >= ops.size())
			return std::nullopt;
		return ops[op];
	}

private:
	const Instance& inst_;
};

class Engine {
public:
	Engine(Adversary& source, Policy& policy, const std::vector<Size>* totals, Time guard)
		: source_(source), policy_(policy), guard_(guard)
	{
		release_ = source_.releases();
		const std::size_t n = release_.size();
		for (Time r : release_)
			if (r < 0)
				throw InputError("negative release date");
		revealed_.resize(n);
		completed_.assign(n, 0);
		remaining_op_.assign(n, 0);
		completion_.assign(n, -1);
		arrival_order_.resize(n);
		std::iota(arrival_order_.begin(), arrival_order_.end(), JobId{0});
		std::stable_sort(arrival_order_.begin(), arrival_order_.end(),
		                 [&](JobId a, JobId b) { return release_[a] < release_[b]; });
		if (totals) {
			remaining_total_ = *totals;
			oracle_.remaining_total = remaining_total_;
		}
	}

	SimResult run()
	{
		const std::size_t n = release_.size();
		std::size_t next_arrival = 0;
		std::size_t done = 0;
		JobId last = kIdle;
		std::vector<VisibleJobState> view_buf;

		for (Time t = 0;; ++t) {
			now_ = t;
			// (1) completion of the slot [t-1, t]
			if (last != kIdle) {
				if (--remaining_op_[last] == 0) {
					++completed_[last];
					if (advance(last))
						++done;
				}
			}
			// (2) arrivals
			while (next_arrival < n && release_[arrival_order_[next_arrival]] == t) {
				const JobId j = arrival_order_[next_arrival++];
				insert_active(j);
				if (advance(j))
					++done;
			}
			active_counts_.push_back(static_cast<std::uint32_t>(active_.size()));
			if (done == n && next_arrival == n)
				break;
			if (t >= guard_)
				throw HorizonExceeded(guard_);

			// (3) policy
			view_buf.clear();
			for (JobId j : active_) {
				const auto& rev = revealed_[j];
				VisibleJobState s;
				s.id = j;
				s.release = release_[j];
				s.active_op = completed_[j];
				s.active_size = rev[completed_[j]];
				s.active_remaining = remaining_op_[j];
				s.completed_ops = std::span<const Size>(rev).first(completed_[j]);
				view_buf.push_back(s);
			}
			const SchedulerView view{t, view_buf};
			const RemainingOracle* oracle = policy_.clairvoyant() ? &oracle_ : nullptr;
			if (policy_.clairvoyant() && oracle_.remaining_total.empty() && n > 0)
				throw InputError("policy " + policy_.name() + " needs true sizes; not available from an adaptive source");
			const std::optional<JobId> pick = policy_.choose(view, oracle);

			// (4) processing
			last = kIdle;
			if (pick) {
				if (!std::binary_search(active_.begin(), active_.end(), *pick))
					throw InvariantViolation("sim.policy_choice",
					                         policy_.name() + " named non-active job " + std::to_string(*pick) +
					                             " at t=" + std::to_string(t));
				last = *pick;
				if (!remaining_total_.empty())
					--remaining_total_[last];
			}
			processed_.push_back(last);
		}

		SimResult res;
		res.policy = policy_.name();
		res.trace.release = release_;
		res.trace.completion = completion_;
		res.trace.processed = std::move(processed_);
		res.trace.active = std::move(active_counts_);
		res.realized.jobs.resize(n);
		for (JobId j = 0; j < n; ++j)
			res.realized.jobs[j] = Job{release_[j], revealed_[j]};
		return res;
	}

private:
	// Reveal operations of j starting at index completed_[j] until a positive
	// one appears or the job ends. Returns true if j completed now.
	bool advance(JobId j)
	{
		for (;;) {
			const std::size_t op = completed_[j];
			RunHistory h{now_, processed_, completed_, revealed_};
			const std::optional<Size> size = source_.reveal(j, op, h);
			if (!size) {
				if (op == 0)
					throw InvariantViolation("sim.empty_job", "job " + std::to_string(j) + " has no operations");
				const auto& rev = revealed_[j];
				if (std::accumulate(rev.begin(), rev.end(), Size{0}) < 1)
					throw InvariantViolation("sim.empty_job", "job " + std::to_string(j) + " has total size 0");
				completion_[j] = now_;
				erase_active(j);
				return true;
			}
			if (*size < 0)
				throw InvariantViolation("sim.negative_size", "job " + std::to_string(j) + " op " +
				                                                  std::to_string(op) + " revealed as " +
				                                                  std::to_string(*size));
			revealed_[j].push_back(*size);
			if (*size > 0) {
				remaining_op_[j] = *size;
				return false;
			}
			++completed_[j];
		}
	}

	void insert_active(JobId j) { active_.insert(std::lower_bound(active_.begin(), active_.end(), j), j); }
	void erase_active(JobId j) { active_.erase(std::lower_bound(active_.begin(), active_.end(), j)); }

	Adversary& source_;
	Policy& policy_;
	Time guard_;
	Time now_ = 0;

	std::vector<Time> release_;
	std::vector<JobId> arrival_order_;
	std::vector<std::vector<Size>> revealed_;
	std::vector<std::size_t> completed_;
	std::vector<Size> remaining_op_;
	std::vector<Time> completion_;
	std::vector<Size> remaining_total_;
	RemainingOracle oracle_;

	std::vector<JobId> active_;
	std::vector<JobId> processed_;
	std::vector<std::uint32_t> active_counts_;
};

}  // namespace

SimResult simulate(const Instance& instance, Policy& policy, SimOptions options)
{
	validate(instance);
	FixedSource source(instance);
	std::vector<Size> totals;
	totals.reserve(instance.size());
	for (const auto& j : instance.jobs)
		totals.push_back(j.total());
	const Time guard =
		options.horizon_guard > 0 ? options.horizon_guard : instance.total_volume() + instance.max_release();
	policy.reset();
	return Engine(source, policy, &totals, guard).run();
}

SimResult simulate(Adversary& source, Policy& policy, SimOptions options)
{
	const Time guard = options.horizon_guard > 0 ? options.horizon_guard : SimOptions::kDefaultAdversaryGuard;
	source.reset();
	policy.reset();
	return Engine(source, policy, nullptr, guard).run();
}

std::vector<LocalCount> local_counts(const SimResult& a, const SimResult& b)
{
	if (!(a.realized == b.realized))
		throw InputError("local_counts: runs are over different realized instances");
	const Time end = std::max(a.trace.horizon(), b.trace.horizon());
	std::vector<LocalCount> out;
	out.reserve(static_cast<std::size_t>(end) + 1);
	for (Time t = 0; t <= end; ++t) {
		LocalCount c{t, a.trace.active_at(t), b.trace.active_at(t), 1.0};
		if (c.b == 0) {
			if (c.a != 0)
				throw InvariantViolation("sim.local_counts", "baseline has no active job at t=" + std::to_string(t) +
				                                                 " while the other run has " + std::to_string(c.a));
		} else {
			c.ratio = static_cast<double>(c.a) / static_cast<double>(c.b);
		}
		out.push_back(c);
	}
	return out;
}

MaxLocalRatio max_local_ratio(std::span<const LocalCount> counts)
{
	MaxLocalRatio best;
	for (const auto& c : counts)
		if (c.ratio > best.ratio) {
			best.ratio = c.ratio;
			best.at = c.t;
		}
	return best;
}

void write_trace_csv(std::ostream& out, const Trace& alg, const Trace& opt)
{
	out << "t,processed_job,alg_active,opt_active\n";
	const Time end = std::max(alg.horizon(), opt.horizon());
	for (Time t = 0; t <= end; ++t) {
		out << t << ',';
		if (t < alg.horizon() && alg.processed[static_cast<std::size_t>(t)] != kIdle)
			out << alg.processed[static_cast<std::size_t>(t)];
		else
			out << -1;
		out << ',' << alg.active_at(t) << ',' << opt.active_at(t) << '\n';
	}
}

Json summary_json(const SimResult& run)
{
	return Json{{"policy", run.policy},
	            {"total_flow", run.trace.total_flow()},
	            {"flows", run.trace.flows()},
	            {"realized_instance", to_json(run.realized)}};
}

}  // namespace opflow
