#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "opflow/core.hpp"
#include "opflow/io.hpp"
#include "opflow/sim.hpp"

namespace opflow {

/// Sorted operation sizes in [1, max_size]; releases spread over roughly the
/// expected total volume.
Instance gen_monotone(std::size_t n, std::size_t m, Size max_size, std::uint64_t seed);

/// Two operations per job: [p, uniform in [0, max_job_size]].
Instance gen_uniform_tests(std::size_t n, Size p, Size max_job_size, std::uint64_t seed);

/// Operation counts uniform in [m_min, m_max], sizes log-uniform in
/// [size_min, size_max], each operation zero with probability zero_pct/100.
Instance gen_general(std::size_t n, std::size_t m_min, std::size_t m_max, Size size_min, Size size_max,
                     std::uint64_t seed, unsigned zero_pct = 10);

/// floor(2^{m/2}).
std::size_t randomized_lb_jobs(std::size_t m);
/// floor(2 (n - n^{3/4})).
Time randomized_lb_eval_time(std::size_t n);
/// Geometric with Pr[P = p] = 2^-p, by counting leading zeros of a 64-bit draw.
Size geometric_half(std::uint64_t draw);
/// One job of total size P split over m operations: ones, then zeros, then the rest.
std::vector<Size> randomized_lb_ops(Size P, std::size_t m);
/// randomized_lb_jobs(m) jobs at t = 0.
Instance gen_randomized_lb(std::size_t m, std::uint64_t seed);

struct OpsSrptLb {
	Instance instance;
	Size scale = 0;    ///< S
	Size epsilon = 0;  ///< in scaled units
	Size M = 0;
	Time t_hat = 0;    ///< scaled time where ops-srpt has k*+1 active jobs and OPT one
	std::size_t tail_jobs = 0;
};

/// Integer-scaled construction forcing ops-srpt into k*+1 active jobs. Throws
/// InputError if the instance would exceed `max_horizon` slots.
OpsSrptLb gen_opsrpt_logn_lb(unsigned k_star, Time max_horizon = Time{1} << 26);

/// Adaptive adversary: N(m+1) jobs at t = 0, first operations 1, later
/// operations 1 until N distinct jobs have finished m-1 operations; everything
/// revealed afterwards is 0.
class DetLbAdversary final : public Adversary {
public:
	DetLbAdversary(std::size_t N, std::size_t m);

	std::vector<Time> releases() const override;
	std::optional<Size> reveal(JobId job, std::size_t op, const RunHistory& history) override;
	void reset() override { reached_ = 0; }

	std::size_t N() const noexcept { return N_; }
	std::size_t m() const noexcept { return m_; }
	/// Jobs that have completed m-1 operations so far.
	std::size_t reached() const noexcept { return reached_; }

private:
	std::size_t N_;
	std::size_t m_;
	std::size_t reached_ = 0;
};

/// family + integer parameters + seed.
struct GenSpec {
	std::string family;
	std::map<std::string, std::int64_t> params;
	std::uint64_t seed = 0;
};

/// Parses "k=v,k=v" (integers only).
std::map<std::string, std::int64_t> parse_params(const std::string& text);

struct Generated {
	Instance instance;
	Json metadata;  ///< {family, params, seed, m, m1, m2, ...}
};

/// Families: monotone, uniform-tests, general, randomized-lb, opsrpt-lb.
/// det-lb is adaptive; see DetLbAdversary.
Generated generate(const GenSpec& spec);

/// Instance JSON with the metadata block attached.
Json to_json(const Generated& g);

}  // namespace opflow
