#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "opflow/analysis.hpp"

namespace opflow {

using Rational = boost::multiprecision::cpp_rational;

/// max(0, volume - (tau - earliest_release)).
Size excess(Size volume, Time earliest_release, Time tau);

/// e(S) for a set of chunk indices; 0 for the empty set. Every chunk's job must
/// be released by tau (InputError otherwise).
Size excess(const ChunkDecomposition& dec, std::span<const Time> release, std::span<const std::size_t> set, Time tau);

/// Chunk-level view of the algorithm's state at tau.
struct ChunkAccounting {
	Time tau = 0;
	ChunkDecomposition dec;
	std::vector<Time> release;           ///< per job
	std::vector<std::size_t> active;     ///< active chunk of every active job
	std::vector<char> full;              ///< per chunk: active at tau and untouched
	std::map<int, std::vector<std::size_t>> F;  ///< crucial class -> full active chunks
	/// t_{>=k} and t_{>k} per crucial class, -1 if none; both raised to the
	/// last idle slot before tau when that is later.
	std::map<int, Time> t_at_least;
	std::map<int, Time> t_above;

	std::size_t full_count() const;
	/// S_{<k}: chunks of class < k whose job is released in [t_{>=k}+1, tau].
	std::vector<std::size_t> below(int k) const;
	/// S_{<=k}: chunks of class <= k whose job is released in [t_{>k}+1, tau].
	std::vector<std::size_t> at_most(int k) const;
	/// Chunks of class < k (or <= k with `inclusive`) of jobs released in [from, tau].
	std::vector<std::size_t> window(int k, bool inclusive, Time from) const;
	Size volume(std::span<const std::size_t> set) const;
	Size excess_of(std::span<const std::size_t> set) const { return excess(dec, release, set, tau); }
};

ChunkAccounting account_chunks(const Trace& alg, const ChunkTimeline& timeline, const ChunkDecomposition& dec, Time tau);
ChunkAccounting account_chunks(const Trace& alg, const ChunkDecomposition& dec, Time tau);

struct AssumptionBreach {
	int k = 0;
	std::size_t chunk = 0;
	Time activated = 0;
	int cls = 0;
};

struct AssumptionReport {
	Time tau = 0;
	bool holds = true;
	/// (k, t_{>=k}, verdict) for k = 0..max class; t_{>=k} = -1 if undefined.
	struct PerClass {
		int k = 0;
		Time t_at_least = -1;
		bool holds = true;
	};
	std::vector<PerClass> per_class;
	std::vector<AssumptionBreach> breaches;
};

/// For every class k: each chunk active at tau that became active after
/// t_{>=k} must have class < k. An undefined t_{>=k} counts as -1, so a crucial
/// class that never ran fails the check.
AssumptionReport check_reduced_assumption(const Trace& alg, const ChunkTimeline& timeline, const ChunkDecomposition& dec,
                                          Time tau);
AssumptionReport check_reduced_assumption(const Trace& alg, const ChunkDecomposition& dec, Time tau);

struct DualEntry {
	int k = 0;
	bool at_most = false;  ///< set is S_{<=k} (|F(k)| >= 6 m2) rather than S_{<k}
	std::size_t F = 0;
	Time boundary = -1;    ///< t_{>=k} or t_{>k}
	std::vector<std::size_t> set;
	Size e = 0;
	Rational y;
	bool degenerate = false;  ///< S_{<k} with e = 0: y forced to 0
};

struct DualCertificate {
	Time tau = 0;
	std::size_t m2 = 0;
	std::uint32_t active_jobs = 0;
	std::size_t full_active = 0;
	std::vector<DualEntry> entries;  ///< one per crucial class, ascending k
	Rational objective;
	Rational objective_bound;        ///< |J(tau)|/(12 m2) - 1/(3 m2)
	/// Per chunk with a released job: sum over sets containing it of min(p_c, e) y.
	std::vector<Rational> slack;
	std::vector<Rational> slack_below;   ///< S_{<k} family only
	std::vector<Rational> slack_at_most; ///< S_{<=k} family only
	Rational max_slack, max_slack_below, max_slack_at_most;

	bool degenerate() const;
	bool feasible() const { return max_slack <= 14; }
	bool family_caps_ok() const { return max_slack_at_most < 4 && max_slack_below <= 10; }
	bool objective_ok() const { return objective >= objective_bound; }
};

DualCertificate build_dual_certificate(const ChunkAccounting& acc, std::uint32_t active_jobs);
DualCertificate build_dual_certificate(const Trace& alg, const ChunkDecomposition& dec, Time tau);

struct ExcessLemmaRow {
	int k = 0;
	Size e_below = 0;
	Size need_below = 0;
	Size e_at_most = 0;
	Size need_at_most = 0;  ///< may be negative
	bool below_ok() const { return e_below >= need_below; }
	bool at_most_ok() const { return e_at_most >= need_at_most; }
};

struct ExcessLemmaReport {
	std::vector<ExcessLemmaRow> rows;
	bool ok() const;
};

/// Both excess lower bounds for every crucial class. Throws InputError unless
/// `assumption` is a passing report for the same tau.
ExcessLemmaReport verify_excess_lemmas(const ChunkAccounting& acc, const AssumptionReport& assumption);

struct PrimalViolation {
	std::vector<std::size_t> set;
	Size lhs = 0;
	Size e = 0;
};

struct PrimalReport {
	Time tau = 0;
	std::size_t alive = 0;        ///< objective of the primal point, |J*_c(tau)|
	std::size_t deterministic = 0;
	std::size_t sampled = 0;
	std::vector<PrimalViolation> violations;
	bool ok() const noexcept { return violations.empty(); }
};

/// Checks the covering constraints of the chunk LP at x_c = [c alive in `opt` at
/// tau] on: per-job sets, the all-chunks set, class/release windows (which
/// include every S_{<k}, S_{<=k}), `extra_sets`, and `count` random subsets.
PrimalReport verify_primal_feasibility_sampled(const Trace& opt, const ChunkDecomposition& dec, Time tau,
                                               std::uint64_t seed, std::size_t count,
                                               std::span<const std::vector<std::size_t>> extra_sets = {});

Json to_json(const AssumptionReport& report);
Json to_json(const DualCertificate& cert);
Json to_json(const ExcessLemmaReport& report);
Json to_json(const PrimalReport& report);
Json to_json(const EndToEndReport& report);

}  // namespace opflow
