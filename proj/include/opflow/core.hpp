#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace opflow {

using Time = std::int64_t;
using Size = std::int64_t;
using JobId = std::size_t;

/// Class of a zero-size operation. Compares below every real class.
inline constexpr int kNoClass = std::numeric_limits<int>::min();

/// Malformed input: bad file, schema violation, bad parameters. CLI exit code 1.
class InputError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// A checked invariant of the model or of an algorithm failed. CLI exit code 2.
class InvariantViolation : public std::runtime_error {
public:
	InvariantViolation(std::string invariant, const std::string& detail)
		: std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

	const std::string& invariant() const noexcept { return invariant_; }

private:
	std::string invariant_;
};

struct Job {
	Time release = 0;
	std::vector<Size> ops;

	Size total() const noexcept;
	bool operator==(const Job&) const = default;
};

struct Instance {
	std::vector<Job> jobs;

	std::size_t size() const noexcept { return jobs.size(); }
	bool empty() const noexcept { return jobs.empty(); }
	Size total_volume() const noexcept;
	Time max_release() const noexcept;

	bool operator==(const Instance&) const = default;
};

/// Throws InputError unless every job has a nonnegative release, nonnegative
/// operation sizes and a positive total size.
void validate(const Instance& instance);

/// floor(log2 p) for p >= 1; kNoClass for p == 0. Negative sizes throw.
int class_of(Size p);

/// A maximal run of operations whose classes do not exceed the class of the
/// run's first positive operation. Operation indices are half-open.
struct Chunk {
	JobId job = 0;
	std::size_t first_op = 0;
	std::size_t end_op = 0;
	Size size = 0;
	int cls = 0;
	/// Sum of the sizes of all operations before this chunk in its job.
	Size start_offset = 0;

	std::size_t op_count() const noexcept { return end_op - first_op; }
	Size end_offset() const noexcept { return start_offset + size; }
	bool operator==(const Chunk&) const = default;
};

/// Splits one job into chunks. Zero-size operations never open a chunk; they
/// extend the current one (leading zeros join the first chunk).
std::vector<Chunk> decompose_chunks(const Job& job, JobId id = 0);

struct InstanceParams {
	std::size_t m = 0;   ///< max operations per job
	std::size_t m1 = 0;  ///< max chunks per job
	std::size_t m2 = 0;  ///< max operations per chunk
	bool operator==(const InstanceParams&) const = default;
};

/// Chunks of every job, flattened, plus per-job index ranges into that list.
class ChunkDecomposition {
public:
	ChunkDecomposition() = default;
	explicit ChunkDecomposition(const Instance& instance);

	std::span<const Chunk> chunks() const noexcept { return chunks_; }
	std::span<const Chunk> chunks_of(JobId j) const;
	/// Index into chunks() of the first chunk of job j.
	std::size_t first_chunk(JobId j) const { return job_begin_.at(j); }
	std::size_t job_count() const noexcept { return job_begin_.empty() ? 0 : job_begin_.size() - 1; }
	/// Index into chunks() of the chunk of job j that contains processing offset y
	/// (the chunk holding the active operation once y units are done). Requires y < p_j.
	std::size_t chunk_at(JobId j, Size y) const;
	const InstanceParams& params() const noexcept { return params_; }

private:
	std::vector<Chunk> chunks_;
	std::vector<std::size_t> job_begin_;
	InstanceParams params_;
};

InstanceParams instance_params(const Instance& instance);

}  // namespace opflow
