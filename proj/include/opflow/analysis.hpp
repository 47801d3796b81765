#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opflow/core.hpp"
#include "opflow/io.hpp"
#include "opflow/sim.hpp"

namespace opflow {

/// Earliest t maximizing |J(t)|.
Time default_tau(const Trace& trace);

/// A run replayed at chunk granularity.
class ChunkTimeline {
public:
	ChunkTimeline(const Trace& trace, const ChunkDecomposition& dec);

	/// Class of the chunk processed during [t, t+1]; kNoClass for idle slots.
	std::span<const int> processed_class() const noexcept { return processed_class_; }
	/// Time each chunk becomes active (r_c); -1 if it never does within the trace.
	std::span<const Time> activation() const noexcept { return activation_; }
	/// Time each chunk's last unit of work is done; -1 if never.
	std::span<const Time> completion() const noexcept { return completion_; }

	/// t_{>=k}: last slot start before tau that processed a chunk of class >= k,
	/// or -1 if there is none.
	Time last_at_least(int k, Time tau) const;
	/// t_{>k}.
	Time last_above(int k, Time tau) const { return last_at_least(k + 1, tau); }
	/// Last idle slot before tau, or -1.
	Time last_idle(Time tau) const;

private:
	std::vector<int> processed_class_;
	std::vector<Time> activation_;
	std::vector<Time> completion_;
};

/// |J*_c(tau)|: chunks of jobs released by tau that the given run has not
/// completed by tau. Throws InvariantViolation if it exceeds m1 * |J*(tau)|.
std::size_t opt_alive_chunks(const Trace& opt, const ChunkDecomposition& dec, Time tau);

struct BoundViolation {
	Time t = 0;
	std::uint32_t alg = 0;
	std::uint32_t opt = 0;
	std::size_t opt_chunks = 0;
};

/// |J(t)| <= 168 m2 |J*_c(t)| + 1 and |J(t)| <= 168 m1 m2 |J*(t)| + 1 at every t.
struct EndToEndReport {
	InstanceParams params;
	std::vector<BoundViolation> chunk_bound_violations;
	std::vector<BoundViolation> job_bound_violations;
	/// Times where |J*_c| <= m1 |J*| fails; always empty unless the trace is corrupt.
	std::vector<BoundViolation> opt_chunk_violations;
	double max_job_ratio = 0.0;  ///< max_t |J(t)| / |J*(t)| over t with |J*(t)| > 0
	bool ok() const noexcept
	{
		return chunk_bound_violations.empty() && job_bound_violations.empty() && opt_chunk_violations.empty();
	}
};
EndToEndReport end_to_end_bound_check(const Trace& alg, const Trace& opt, const ChunkDecomposition& dec);

/// Per-slot check of the processed chunk's near-minimality: if an active chunk
/// of class < k(t) exists besides the processed one, no third chunk of class
/// <= k(t) may be active. Returns violating slot times.
std::vector<Time> check_strict_classes(const Trace& alg, const ChunkDecomposition& dec);

/// Times at which more than one active job has remaining size < p.
std::vector<Time> check_single_partial(const Trace& alg, const Instance& instance, Size p);

/// Common first-operation size of an m = 2 uniform-test instance; throws
/// InputError if the instance does not have that shape.
Size uniform_test_size(const Instance& instance);

struct SwtReport {
	Time tau = 0;
	Size alg_volume = 0;  ///< vol of the |Q*_2A| largest stage-2 type-A remainders (algorithm)
	Size opt_volume = 0;  ///< vol* of Q*_2A(tau)
	std::size_t opt_2a = 0;
	std::uint32_t alg_active = 0;
	std::uint32_t opt_active = 0;
	bool volume_ok() const noexcept { return alg_volume >= opt_volume; }
	bool local_ok() const noexcept { return alg_active <= 2 * opt_active; }
	bool ok() const noexcept { return volume_ok() && local_ok(); }
};
SwtReport verify_swt_volume_invariant(const Trace& alg, const Trace& opt, const Instance& instance, Time tau);

}  // namespace opflow
