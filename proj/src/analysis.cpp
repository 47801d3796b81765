#include "opflow/analysis.hpp"

#include <algorithm>
#include <functional>

namespace opflow {

Time default_tau(const Trace& trace)
{
	Time best = 0;
	for (Time t = 0; t < static_cast<Time>(trace.active.size()); ++t)
		if (trace.active_at(t) > trace.active_at(best))
			best = t;
	return best;
}

namespace {

// Walks a trace slot by slot, tracking y_j and each job's current chunk.
class ChunkWalker {
public:
	ChunkWalker(const Trace& trace, const ChunkDecomposition& dec)
		: trace_(trace), dec_(dec), y_(trace.job_count(), 0), cur_(trace.job_count())
	{
		for (JobId j = 0; j < cur_.size(); ++j)
			cur_[j] = dec.first_chunk(j);
		order_.resize(trace.job_count());
		for (JobId j = 0; j < order_.size(); ++j)
			order_[j] = j;
		std::stable_sort(order_.begin(), order_.end(),
		                 [&](JobId a, JobId b) { return trace.release[a] < trace.release[b]; });
	}

	/// Visit arrivals at time t: fn(job, chunk index).
	template <class Fn>
	void arrivals(Time t, Fn&& fn)
	{
		while (next_ < order_.size() && trace_.release[order_[next_]] == t) {
			const JobId j = order_[next_++];
			fn(j, cur_[j]);
		}
	}

	/// Apply slot t. fn(job, finished chunk, next chunk or npos if the job is done)
	/// is called when the slot completes a chunk.
	template <class Fn>
	void process(Time t, Fn&& fn)
	{
		const JobId j = trace_.processed[static_cast<std::size_t>(t)];
		if (j == kIdle)
			return;
		++y_[j];
		const Chunk& c = dec_.chunks()[cur_[j]];
		if (y_[j] == c.end_offset()) {
			const std::size_t done = cur_[j];
			const std::size_t end = dec_.first_chunk(j) + dec_.chunks_of(j).size();
			const std::size_t next = done + 1 < end ? done + 1 : npos;
			if (next != npos)
				cur_[j] = next;
			fn(j, done, next);
		}
	}

	JobId job_at(Time t) const { return trace_.processed[static_cast<std::size_t>(t)]; }
	std::size_t current_chunk(JobId j) const { return cur_[j]; }
	Size y(JobId j) const { return y_[j]; }

	static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
	const Trace& trace_;
	const ChunkDecomposition& dec_;
	std::vector<Size> y_;
	std::vector<std::size_t> cur_;
	std::vector<JobId> order_;
	std::size_t next_ = 0;
};

void require_matching(const Trace& trace, const ChunkDecomposition& dec)
{
	if (trace.job_count() != dec.job_count())
		throw InputError("trace and chunk decomposition cover different job counts");
}

}  // namespace

ChunkTimeline::ChunkTimeline(const Trace& trace, const ChunkDecomposition& dec)
{
	require_matching(trace, dec);
	processed_class_.assign(static_cast<std::size_t>(trace.horizon()), kNoClass);
	activation_.assign(dec.chunks().size(), -1);
	completion_.assign(dec.chunks().size(), -1);
	ChunkWalker walk(trace, dec);
	for (Time t = 0; t <= trace.horizon(); ++t) {
		walk.arrivals(t, [&](JobId, std::size_t c) { activation_[c] = t; });
		if (t == trace.horizon())
			break;
		const JobId j = walk.job_at(t);
		if (j != kIdle)
			processed_class_[static_cast<std::size_t>(t)] = dec.chunks()[walk.current_chunk(j)].cls;
		walk.process(t, [&](JobId, std::size_t done, std::size_t next) {
			completion_[done] = t + 1;
			if (next != ChunkWalker::npos)
				activation_[next] = t + 1;
		});
	}
}

Time ChunkTimeline::last_at_least(int k, Time tau) const
{
	for (Time t = std::min<Time>(tau, static_cast<Time>(processed_class_.size())) - 1; t >= 0; --t) {
		const int c = processed_class_[static_cast<std::size_t>(t)];
		if (c != kNoClass && c >= k)
			return t;
	}
	return -1;
}

Time ChunkTimeline::last_idle(Time tau) const
{
	const auto n = static_cast<Time>(processed_class_.size());
	if (tau > n)
		return tau - 1;
	for (Time t = tau - 1; t >= 0; --t)
		if (processed_class_[static_cast<std::size_t>(t)] == kNoClass)
			return t;
	return -1;
}

std::size_t opt_alive_chunks(const Trace& opt, const ChunkDecomposition& dec, Time tau)
{
	require_matching(opt, dec);
	const std::vector<Size> y = opt.cumulative_processing(tau);
	std::size_t alive = 0;
	std::size_t jobs = 0;
	for (JobId j = 0; j < opt.job_count(); ++j) {
		if (opt.release[j] > tau || opt.completion[j] <= tau)
			continue;
		++jobs;
		for (const Chunk& c : dec.chunks_of(j))
			if (c.end_offset() > y[j])
				++alive;
	}
	if (alive > dec.params().m1 * jobs)
		throw InvariantViolation("analysis.opt_chunk_bound", "|J*_c| = " + std::to_string(alive) + " > m1 * |J*| = " +
		                                                         std::to_string(dec.params().m1 * jobs));
	return alive;
}

EndToEndReport end_to_end_bound_check(const Trace& alg, const Trace& opt, const ChunkDecomposition& dec)
{
	require_matching(opt, dec);
	EndToEndReport rep;
	rep.params = dec.params();
	const std::size_t m1 = rep.params.m1;
	const std::size_t m2 = rep.params.m2;
	const Time end = std::max(alg.horizon(), opt.horizon());

	ChunkWalker walk(opt, dec);
	std::size_t alive_chunks = 0;
	for (Time t = 0; t <= end; ++t) {
		walk.arrivals(t, [&](JobId j, std::size_t) { alive_chunks += dec.chunks_of(j).size(); });
		const std::uint32_t a = alg.active_at(t);
		const std::uint32_t o = opt.active_at(t);
		const BoundViolation here{t, a, o, alive_chunks};
		if (a > 168 * m2 * alive_chunks + 1)
			rep.chunk_bound_violations.push_back(here);
		if (a > 168 * m1 * m2 * o + 1)
			rep.job_bound_violations.push_back(here);
		if (alive_chunks > m1 * o)
			rep.opt_chunk_violations.push_back(here);
		if (o > 0)
			rep.max_job_ratio = std::max(rep.max_job_ratio, static_cast<double>(a) / static_cast<double>(o));
		if (t < opt.horizon())
			walk.process(t, [&](JobId, std::size_t, std::size_t) { --alive_chunks; });
	}
	return rep;
}

std::vector<Time> check_strict_classes(const Trace& alg, const ChunkDecomposition& dec)
{
	require_matching(alg, dec);
	// Chunk classes are floor(log2) of 64-bit sizes.
	std::array<std::size_t, 64> count{};
	std::vector<Time> bad;
	ChunkWalker walk(alg, dec);
	auto cls = [&](std::size_t c) { return static_cast<std::size_t>(dec.chunks()[c].cls); };
	for (Time t = 0; t < alg.horizon(); ++t) {
		walk.arrivals(t, [&](JobId, std::size_t c) { ++count[cls(c)]; });
		const JobId j = walk.job_at(t);
		if (j != kIdle) {
			const std::size_t k = cls(walk.current_chunk(j));
			std::size_t below = 0;
			for (std::size_t i = 0; i < k; ++i)
				below += count[i];
			const std::size_t equal = count[k] - 1;  // excluding the processed chunk
			if (below >= 1 && below + equal >= 2)
				bad.push_back(t);
		}
		walk.process(t, [&](JobId, std::size_t done, std::size_t next) {
			--count[cls(done)];
			if (next != ChunkWalker::npos)
				++count[cls(next)];
		});
	}
	return bad;
}

std::vector<Time> check_single_partial(const Trace& alg, const Instance& instance, Size p)
{
	std::vector<Size> rem(instance.size());
	for (JobId j = 0; j < rem.size(); ++j)
		rem[j] = instance.jobs[j].total();
	std::vector<Time> bad;
	for (Time t = 0; t <= alg.horizon(); ++t) {
		std::size_t small = 0;
		for (JobId j = 0; j < rem.size(); ++j)
			if (alg.release[j] <= t && alg.completion[j] > t && rem[j] < p)
				++small;
		if (small > 1)
			bad.push_back(t);
		if (t < alg.horizon() && alg.processed[static_cast<std::size_t>(t)] != kIdle)
			--rem[alg.processed[static_cast<std::size_t>(t)]];
	}
	return bad;
}

Size uniform_test_size(const Instance& instance)
{
	if (instance.empty())
		throw InputError("uniform-test instance: no jobs");
	const Size p = instance.jobs.front().ops.empty() ? 0 : instance.jobs.front().ops.front();
	for (const auto& job : instance.jobs)
		if (job.ops.size() != 2 || job.ops[0] != p || p < 1)
			throw InputError("not a uniform-test instance: every job needs two operations with equal first size");
	return p;
}

SwtReport verify_swt_volume_invariant(const Trace& alg, const Trace& opt, const Instance& instance, Time tau)
{
	const Size p = uniform_test_size(instance);
	const std::vector<Size> y = alg.cumulative_processing(tau);
	const std::vector<Size> ys = opt.cumulative_processing(tau);

	SwtReport rep;
	rep.tau = tau;
	rep.alg_active = alg.active_at(tau);
	rep.opt_active = opt.active_at(tau);
	std::vector<Size> alg_2a;
	for (JobId j = 0; j < instance.size(); ++j) {
		const Job& job = instance.jobs[j];
		if (job.ops[1] < p || job.release > tau)
			continue;
		const Size total = job.total();
		if (opt.completion[j] > tau) {
			++rep.opt_2a;
			rep.opt_volume += std::min(job.ops[1], total - ys[j]);
		}
		if (alg.completion[j] > tau)
			alg_2a.push_back(std::min(job.ops[1], total - y[j]));
	}
	std::sort(alg_2a.begin(), alg_2a.end(), std::greater<>());
	for (std::size_t i = 0; i < std::min(rep.opt_2a, alg_2a.size()); ++i)
		rep.alg_volume += alg_2a[i];
	return rep;
}

}  // namespace opflow
