#include "opflow/certificate.hpp"

#include <algorithm>
#include <climits>
#include <random>
#include <set>

namespace opflow {

namespace {

using BigInt = boost::multiprecision::cpp_int;

int max_class(const ChunkDecomposition& dec)
{
	int k = 0;
	for (const Chunk& c : dec.chunks())
		k = std::max(k, c.cls);
	return k;
}

// Chunks of class < k (<= k if inclusive) whose job is released in [from, tau].
std::vector<std::size_t> window_set(const ChunkDecomposition& dec, std::span<const Time> release, int k, bool inclusive,
                                    Time from, Time tau)
{
	std::vector<std::size_t> out;
	const auto chunks = dec.chunks();
	for (std::size_t i = 0; i < chunks.size(); ++i) {
		const Chunk& c = chunks[i];
		const Time r = release[c.job];
		if (r < from || r > tau)
			continue;
		if (c.cls < k || (inclusive && c.cls == k))
			out.push_back(i);
	}
	return out;
}

std::vector<Time> releases_of(const Trace& trace) { return trace.release; }

Rational ratio(std::int64_t num, std::int64_t den) { return Rational(num) / Rational(den); }

std::string str(const Rational& r) { return r.str(); }

}  // namespace

Size excess(Size volume, Time earliest_release, Time tau) { return std::max<Size>(0, volume - (tau - earliest_release)); }

Size excess(const ChunkDecomposition& dec, std::span<const Time> release, std::span<const std::size_t> set, Time tau)
{
	if (set.empty())
		return 0;
	Size volume = 0;
	Time earliest = std::numeric_limits<Time>::max();
	for (std::size_t i : set) {
		const Chunk& c = dec.chunks()[i];
		const Time r = release[c.job];
		if (r > tau)
			throw InputError("excess: chunk " + std::to_string(i) + " belongs to a job released after tau");
		volume += c.size;
		earliest = std::min(earliest, r);
	}
	return excess(volume, earliest, tau);
}

std::size_t ChunkAccounting::full_count() const
{
	std::size_t n = 0;
	for (const auto& [k, v] : F)
		n += v.size();
	return n;
}

std::vector<std::size_t> ChunkAccounting::window(int k, bool inclusive, Time from) const
{
	return window_set(dec, release, k, inclusive, from, tau);
}

std::vector<std::size_t> ChunkAccounting::below(int k) const { return window(k, false, t_at_least.at(k) + 1); }

std::vector<std::size_t> ChunkAccounting::at_most(int k) const { return window(k, true, t_above.at(k) + 1); }

Size ChunkAccounting::volume(std::span<const std::size_t> set) const
{
	Size v = 0;
	for (std::size_t i : set)
		v += dec.chunks()[i].size;
	return v;
}

ChunkAccounting account_chunks(const Trace& alg, const ChunkTimeline& timeline, const ChunkDecomposition& dec, Time tau)
{
	if (alg.job_count() != dec.job_count())
		throw InputError("trace and chunk decomposition cover different job counts");
	if (tau < 0)
		throw InputError("tau must be nonnegative");
	ChunkAccounting acc;
	acc.tau = tau;
	acc.dec = dec;
	acc.release = releases_of(alg);
	acc.full.assign(dec.chunks().size(), 0);
	const std::vector<Size> y = alg.cumulative_processing(tau);
	for (JobId j = 0; j < alg.job_count(); ++j) {
		if (alg.release[j] > tau || alg.completion[j] <= tau)
			continue;
		const std::size_t c = dec.chunk_at(j, y[j]);
		acc.active.push_back(c);
		const Chunk& ch = dec.chunks()[c];
		if (y[j] == ch.start_offset) {
			acc.full[c] = 1;
			acc.F[ch.cls].push_back(c);
		}
	}
	// Nothing active during an idle slot can matter at tau, so the windows
	// never reach back past the current busy period.
	const Time idle = timeline.last_idle(tau);
	for (const auto& [k, v] : acc.F) {
		acc.t_at_least[k] = std::max(idle, timeline.last_at_least(k, tau));
		acc.t_above[k] = std::max(idle, timeline.last_above(k, tau));
	}
	return acc;
}

ChunkAccounting account_chunks(const Trace& alg, const ChunkDecomposition& dec, Time tau)
{
	return account_chunks(alg, ChunkTimeline(alg, dec), dec, tau);
}

AssumptionReport check_reduced_assumption(const Trace& alg, const ChunkTimeline& timeline, const ChunkDecomposition& dec,
                                          Time tau)
{
	AssumptionReport rep;
	rep.tau = tau;
	const ChunkAccounting acc = account_chunks(alg, timeline, dec, tau);
	const int top = max_class(dec);
	for (int k = 0; k <= top; ++k) {
		// t = -1 when nothing of class >= k ran yet: then every active chunk of
		// class >= k counts as activated after it.
		const Time t = timeline.last_at_least(k, tau);
		AssumptionReport::PerClass row{k, t, true};
		for (std::size_t c : acc.active) {
			const Time act = timeline.activation()[c];
			const int cls = dec.chunks()[c].cls;
			if (act > t && cls >= k) {
				row.holds = false;
				if (rep.breaches.size() < 16)
					rep.breaches.push_back({k, c, act, cls});
			}
		}
		rep.holds = rep.holds && row.holds;
		rep.per_class.push_back(row);
	}
	return rep;
}

AssumptionReport check_reduced_assumption(const Trace& alg, const ChunkDecomposition& dec, Time tau)
{
	return check_reduced_assumption(alg, ChunkTimeline(alg, dec), dec, tau);
}

bool DualCertificate::degenerate() const
{
	return std::any_of(entries.begin(), entries.end(), [](const DualEntry& e) { return e.degenerate; });
}

DualCertificate build_dual_certificate(const ChunkAccounting& acc, std::uint32_t active_jobs)
{
	DualCertificate cert;
	cert.tau = acc.tau;
	cert.m2 = acc.dec.params().m2;
	cert.active_jobs = active_jobs;
	cert.full_active = acc.full_count();
	const std::size_t n = acc.dec.chunks().size();
	cert.slack.assign(n, Rational(0));
	cert.slack_below.assign(n, Rational(0));
	cert.slack_at_most.assign(n, Rational(0));
	if (cert.m2 == 0)
		return cert;
	const auto m2 = static_cast<std::int64_t>(cert.m2);

	for (const auto& [k, chunks] : acc.F) {
		DualEntry e;
		e.k = k;
		e.F = chunks.size();
		e.at_most = e.F >= 6 * cert.m2;
		if (e.at_most) {
			e.boundary = acc.t_above.at(k);
			e.set = acc.at_most(k);
			e.e = acc.excess_of(e.set);
			e.y = Rational(1) / (Rational(m2) * Rational(BigInt(1) << k));
		} else {
			e.boundary = acc.t_at_least.at(k);
			e.set = acc.below(k);
			e.e = acc.excess_of(e.set);
			if (e.e > 0)
				e.y = ratio(static_cast<std::int64_t>(e.F), 3 * m2 * e.e);
			else
				e.degenerate = true;
		}
		cert.objective += Rational(e.e) * e.y;
		if (e.y != 0) {
			auto& family = e.at_most ? cert.slack_at_most : cert.slack_below;
			for (std::size_t c : e.set) {
				const Rational add = Rational(std::min(acc.dec.chunks()[c].size, e.e)) * e.y;
				cert.slack[c] += add;
				family[c] += add;
			}
		}
		cert.entries.push_back(std::move(e));
	}
	for (std::size_t c = 0; c < n; ++c) {
		cert.max_slack = std::max(cert.max_slack, cert.slack[c]);
		cert.max_slack_below = std::max(cert.max_slack_below, cert.slack_below[c]);
		cert.max_slack_at_most = std::max(cert.max_slack_at_most, cert.slack_at_most[c]);
	}
	cert.objective_bound = ratio(active_jobs, 12 * m2) - ratio(1, 3 * m2);
	return cert;
}

DualCertificate build_dual_certificate(const Trace& alg, const ChunkDecomposition& dec, Time tau)
{
	return build_dual_certificate(account_chunks(alg, dec, tau), alg.active_at(tau));
}

bool ExcessLemmaReport::ok() const
{
	return std::all_of(rows.begin(), rows.end(), [](const ExcessLemmaRow& r) { return r.below_ok() && r.at_most_ok(); });
}

ExcessLemmaReport verify_excess_lemmas(const ChunkAccounting& acc, const AssumptionReport& assumption)
{
	if (assumption.tau != acc.tau)
		throw InputError("verify_excess_lemmas: assumption was checked at a different tau");
	if (!assumption.holds)
		throw InputError("verify_excess_lemmas: the reduced-instance assumption does not hold at tau=" +
		                 std::to_string(acc.tau) + "; refusing to run");
	ExcessLemmaReport rep;
	const auto m2 = static_cast<Size>(acc.dec.params().m2);
	Size full_below = 0;  // sum of p_c over F(k') for k' < current k
	for (const auto& [k, chunks] : acc.F) {
		ExcessLemmaRow row;
		row.k = k;
		row.need_below = full_below;
		row.e_below = acc.excess_of(acc.below(k));
		Size here = 0;
		for (std::size_t c : chunks)
			here += acc.dec.chunks()[c].size;
		full_below += here;
		// 2 m2 2^{k+1} outgrows any realistic volume long before it overflows.
		row.need_at_most = k + 1 < 56 ? full_below - 2 * m2 * (Size{1} << (k + 1)) : std::numeric_limits<Size>::min();
		row.e_at_most = acc.excess_of(acc.at_most(k));
		rep.rows.push_back(row);
	}
	return rep;
}

PrimalReport verify_primal_feasibility_sampled(const Trace& opt, const ChunkDecomposition& dec, Time tau,
                                               std::uint64_t seed, std::size_t count,
                                               std::span<const std::vector<std::size_t>> extra_sets)
{
	if (opt.job_count() != dec.job_count())
		throw InputError("trace and chunk decomposition cover different job counts");
	PrimalReport rep;
	rep.tau = tau;
	const auto chunks = dec.chunks();
	const std::vector<Size> y = opt.cumulative_processing(tau);
	std::vector<char> alive(chunks.size(), 0);
	std::vector<std::size_t> released;
	for (std::size_t i = 0; i < chunks.size(); ++i) {
		const Chunk& c = chunks[i];
		if (opt.release[c.job] > tau)
			continue;
		released.push_back(i);
		if (c.end_offset() > y[c.job]) {
			alive[i] = 1;
			++rep.alive;
		}
	}

	auto check = [&](const std::vector<std::size_t>& set) {
		const Size e = excess(dec, opt.release, set, tau);
		Size lhs = 0;
		for (std::size_t i : set)
			if (alive[i])
				lhs += std::min(chunks[i].size, e);
		if (lhs < e && rep.violations.size() < 16)
			rep.violations.push_back({set, lhs, e});
	};

	// Deterministic families.
	for (JobId j = 0; j < dec.job_count(); ++j) {
		if (opt.release[j] > tau)
			continue;
		std::vector<std::size_t> set;
		for (std::size_t i = dec.first_chunk(j); i < dec.first_chunk(j) + dec.chunks_of(j).size(); ++i)
			set.push_back(i);
		check(set);
		++rep.deterministic;
	}
	check(released);
	++rep.deterministic;
	std::set<Time> starts;
	for (std::size_t i : released)
		starts.insert(opt.release[chunks[i].job]);
	const int top = max_class(dec);
	for (Time s : starts)
		for (int k = 1; k <= top + 1; ++k) {
			check(window_set(dec, opt.release, k, false, s, tau));
			++rep.deterministic;
		}
	for (const auto& set : extra_sets) {
		check(set);
		++rep.deterministic;
	}

	// Random subsets: alternately independent inclusion and thinned class/release windows.
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> unit(0.0, 1.0);
	std::vector<Time> start_list(starts.begin(), starts.end());
	std::vector<std::size_t> set;
	for (std::size_t s = 0; s < count && !released.empty(); ++s) {
		set.clear();
		const double q = unit(rng);
		if (s % 2 == 0) {
			for (std::size_t i : released)
				if (unit(rng) < q)
					set.push_back(i);
		} else {
			const Time from = start_list[std::uniform_int_distribution<std::size_t>(0, start_list.size() - 1)(rng)];
			const int k = std::uniform_int_distribution<int>(0, top + 1)(rng);
			const double keep = 0.5 + 0.5 * q;
			for (std::size_t i : released)
				if (opt.release[chunks[i].job] >= from && chunks[i].cls <= k && unit(rng) < keep)
					set.push_back(i);
		}
		check(set);
		++rep.sampled;
	}
	return rep;
}

Json to_json(const AssumptionReport& report)
{
	Json per = Json::array();
	for (const auto& row : report.per_class)
		per.push_back({{"k", row.k}, {"t_at_least", row.t_at_least}, {"holds", row.holds}});
	Json breaches = Json::array();
	for (const auto& b : report.breaches)
		breaches.push_back({{"k", b.k}, {"chunk", b.chunk}, {"activated", b.activated}, {"class", b.cls}});
	return Json{{"tau", report.tau}, {"holds", report.holds}, {"per_class", per}, {"breaches", breaches}};
}

Json to_json(const DualCertificate& cert)
{
	Json classes = Json::array();
	Json degenerate = Json::array();
	for (const auto& e : cert.entries) {
		classes.push_back({{"k", e.k},
		                   {"F", e.F},
		                   {"set", e.at_most ? "S_le_k" : "S_lt_k"},
		                   {"boundary", e.boundary},
		                   {"set_size", e.set.size()},
		                   {"excess", e.e},
		                   {"y", str(e.y)},
		                   {"degenerate", e.degenerate}});
		if (e.degenerate)
			degenerate.push_back(e.k);
	}
	return Json{{"tau", cert.tau},
	            {"m2", cert.m2},
	            {"active_jobs", cert.active_jobs},
	            {"full_active", cert.full_active},
	            {"classes", classes},
	            {"degenerate_classes", degenerate},
	            {"objective", str(cert.objective)},
	            {"objective_bound", str(cert.objective_bound)},
	            {"objective_ok", cert.objective_ok()},
	            {"max_slack", str(cert.max_slack)},
	            {"max_slack_below", str(cert.max_slack_below)},
	            {"max_slack_at_most", str(cert.max_slack_at_most)},
	            {"feasible", cert.feasible()},
	            {"family_caps_ok", cert.family_caps_ok()}};
}

Json to_json(const ExcessLemmaReport& report)
{
	Json rows = Json::array();
	for (const auto& r : report.rows)
		rows.push_back({{"k", r.k},
		                {"e_below", r.e_below},
		                {"need_below", r.need_below},
		                {"e_at_most", r.e_at_most},
		                {"need_at_most", r.need_at_most},
		                {"ok", r.below_ok() && r.at_most_ok()}});
	return Json{{"ok", report.ok()}, {"rows", rows}};
}

Json to_json(const PrimalReport& report)
{
	Json bad = Json::array();
	for (const auto& v : report.violations)
		bad.push_back({{"set", v.set}, {"lhs", v.lhs}, {"excess", v.e}});
	return Json{{"tau", report.tau},
	            {"alive_chunks", report.alive},
	            {"deterministic_sets", report.deterministic},
	            {"sampled_sets", report.sampled},
	            {"violations", bad},
	            {"ok", report.ok()}};
}

Json to_json(const EndToEndReport& report)
{
	auto list = [](const std::vector<BoundViolation>& v) {
		Json out = Json::array();
		for (std::size_t i = 0; i < std::min<std::size_t>(v.size(), 16); ++i)
			out.push_back({{"t", v[i].t}, {"alg", v[i].alg}, {"opt", v[i].opt}, {"opt_chunks", v[i].opt_chunks}});
		return out;
	};
	return Json{{"m", report.params.m},
	            {"m1", report.params.m1},
	            {"m2", report.params.m2},
	            {"chunk_bound_violations", report.chunk_bound_violations.size()},
	            {"job_bound_violations", report.job_bound_violations.size()},
	            {"opt_chunk_violations", report.opt_chunk_violations.size()},
	            {"first_violations", list(report.job_bound_violations.empty() ? report.chunk_bound_violations
	                                                                            : report.job_bound_violations)},
	            {"max_job_ratio", report.max_job_ratio},
	            {"ok", report.ok()}};
}

}  // namespace opflow
