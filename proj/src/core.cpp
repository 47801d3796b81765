#include "opflow/core.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace opflow {

Size Job::total() const noexcept
{
	return std::accumulate(ops.begin(), ops.end(), Size{0});
}

Size Instance::total_volume() const noexcept
{
	Size v = 0;
	for (const auto& j : jobs)
		v += j.total();
	return v;
}

Time Instance::max_release() const noexcept
{
	Time r = 0;
	for (const auto& j : jobs)
		r = std::max(r, j.release);
	return r;
}

void validate(const Instance& instance)
{
	for (std::size_t j = 0; j < instance.jobs.size(); ++j) {
		const Job& job = instance.jobs[j];
		const std::string where = "job " + std::to_string(j);
		if (job.release < 0)
			throw InputError(where + ": negative release date");
		if (job.ops.empty())
			throw InputError(where + ": no operations");
		for (Size p : job.ops)
			if (p < 0)
				throw InputError(where + ": negative operation size");
		if (job.total() < 1)
			throw InputError(where + ": total size must be at least 1");
	}
}

int class_of(Size p)
{
	if (p < 0)
		throw InputError("class_of: negative size " + std::to_string(p));
	if (p == 0)
		return kNoClass;
	return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(p))) - 1;
}

std::vector<Chunk> decompose_chunks(const Job& job, JobId id)
{
	std::vector<Chunk> out;
	Size offset = 0;
	Chunk cur{id, 0, 0, 0, kNoClass, 0};
	bool open = false;  // cur has a positive operation

	for (std::size_t i = 0; i < job.ops.size(); ++i) {
		const int k = class_of(job.ops[i]);
		if (open && k > cur.cls) {
			out.push_back(cur);
			cur = Chunk{id, i, i, 0, k, offset};
		}
		if (!open && k != kNoClass) {
			cur.cls = k;
			open = true;
		}
		cur.end_op = i + 1;
		cur.size += job.ops[i];
		offset += job.ops[i];
	}
	if (!open)
		throw InputError("decompose_chunks: job " + std::to_string(id) + " has no positive operation");
	out.push_back(cur);
	return out;
}

ChunkDecomposition::ChunkDecomposition(const Instance& instance)
{
	job_begin_.reserve(instance.size() + 1);
	for (JobId j = 0; j < instance.size(); ++j) {
		job_begin_.push_back(chunks_.size());
		auto cs = decompose_chunks(instance.jobs[j], j);
		params_.m = std::max(params_.m, instance.jobs[j].ops.size());
		params_.m1 = std::max(params_.m1, cs.size());
		for (const auto& c : cs)
			params_.m2 = std::max(params_.m2, c.op_count());
		chunks_.insert(chunks_.end(), cs.begin(), cs.end());
	}
	job_begin_.push_back(chunks_.size());
}

std::span<const Chunk> ChunkDecomposition::chunks_of(JobId j) const
{
	const std::size_t b = job_begin_.at(j);
	const std::size_t e = job_begin_.at(j + 1);
	return std::span<const Chunk>(chunks_).subspan(b, e - b);
}

std::size_t ChunkDecomposition::chunk_at(JobId j, Size y) const
{
	auto cs = chunks_of(j);
	auto it = std::upper_bound(cs.begin(), cs.end(), y,
	                           [](Size v, const Chunk& c) { return v < c.end_offset(); });
	if (it == cs.end())
		throw std::out_of_range("chunk_at: offset past end of job");
	return job_begin_[j] + static_cast<std::size_t>(it - cs.begin());
}

InstanceParams instance_params(const Instance& instance)
{
	return ChunkDecomposition(instance).params();
}

}  // namespace opflow
