#include "opflow/generators.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

namespace opflow {

namespace {

void sort_by_release(Instance& inst)
{
	std::stable_sort(inst.jobs.begin(), inst.jobs.end(),
	                 [](const Job& a, const Job& b) { return a.release < b.release; });
}

void require(bool ok, const std::string& what)
{
	if (!ok)
		throw InputError(what);
}

// Releases uniform in [0, horizon].
void spread_releases(Instance& inst, Time horizon, std::mt19937_64& rng)
{
	std::uniform_int_distribution<Time> rel(0, std::max<Time>(horizon, 0));
	for (auto& job : inst.jobs)
		job.release = rel(rng);
	sort_by_release(inst);
}

}  // namespace

Instance gen_monotone(std::size_t n, std::size_t m, Size max_size, std::uint64_t seed)
{
	require(n >= 1 && m >= 1, "gen_monotone: need n, m >= 1");
	require(max_size >= 1, "gen_monotone: need max >= 1");
	std::mt19937_64 rng(seed);
	std::uniform_int_distribution<Size> size(1, max_size);
	Instance inst;
	inst.jobs.resize(n);
	for (auto& job : inst.jobs) {
		job.ops.resize(m);
		for (auto& p : job.ops)
			p = size(rng);
		std::sort(job.ops.begin(), job.ops.end());
	}
	spread_releases(inst, static_cast<Time>(n * m) * (max_size + 1) / 2, rng);
	return inst;
}

Instance gen_uniform_tests(std::size_t n, Size p, Size max_job_size, std::uint64_t seed)
{
	require(n >= 1, "gen_uniform_tests: need n >= 1");
	require(p >= 1, "gen_uniform_tests: need p >= 1");
	require(max_job_size >= 0, "gen_uniform_tests: need max >= 0");
	std::mt19937_64 rng(seed);
	std::uniform_int_distribution<Size> second(0, max_job_size);
	Instance inst;
	inst.jobs.resize(n);
	for (auto& job : inst.jobs)
		job.ops = {p, second(rng)};
	spread_releases(inst, static_cast<Time>(n) * (2 * p + max_job_size) / 2, rng);
	return inst;
}

Instance gen_general(std::size_t n, std::size_t m_min, std::size_t m_max, Size size_min, Size size_max,
                     std::uint64_t seed, unsigned zero_pct)
{
	require(n >= 1, "gen_general: need n >= 1");
	require(m_min >= 1 && m_min <= m_max, "gen_general: need 1 <= m_min <= m_max");
	require(size_min >= 1 && size_min <= size_max, "gen_general: need 1 <= size_min <= size_max");
	require(zero_pct <= 100, "gen_general: zero_pct must be a percentage");
	std::mt19937_64 rng(seed);
	std::uniform_int_distribution<std::size_t> count(m_min, m_max);
	std::uniform_real_distribution<double> logsize(std::log2(static_cast<double>(size_min)),
	                                               std::log2(static_cast<double>(size_max) + 1.0));
	std::bernoulli_distribution zero(zero_pct / 100.0);
	Instance inst;
	inst.jobs.resize(n);
	Size volume = 0;
	for (auto& job : inst.jobs) {
		job.ops.resize(count(rng));
		for (auto& p : job.ops) {
			const bool z = zero(rng);
			const double u = logsize(rng);
			p = z ? 0 : std::clamp<Size>(static_cast<Size>(std::floor(std::exp2(u))), size_min, size_max);
		}
		if (job.total() == 0)
			job.ops.front() = size_min;
		volume += job.total();
	}
	spread_releases(inst, volume, rng);
	return inst;
}

std::size_t randomized_lb_jobs(std::size_t m)
{
	require(m >= 1 && m < 62, "randomized_lb: m out of range");
	// floor(sqrt(2^m)), exact.
	const std::uint64_t x = std::uint64_t{1} << m;
	auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(x)));
	while (r * r > x)
		--r;
	while ((r + 1) * (r + 1) <= x)
		++r;
	return static_cast<std::size_t>(r);
}

Time randomized_lb_eval_time(std::size_t n)
{
	const long double nn = static_cast<long double>(n);
	return static_cast<Time>(std::floor(2.0L * (nn - std::pow(nn, 0.75L))));
}

Size geometric_half(std::uint64_t draw) { return 1 + std::countl_zero(draw); }

std::vector<Size> randomized_lb_ops(Size P, std::size_t m)
{
	require(P >= 1 && m >= 1, "randomized_lb_ops: need P, m >= 1");
	std::vector<Size> ops(m, 0);
	for (std::size_t pos = 1; pos < m; ++pos)
		ops[pos - 1] = static_cast<Size>(pos) <= P ? 1 : 0;
	ops[m - 1] = std::max<Size>(P - static_cast<Size>(m) + 1, 0);
	return ops;
}

Instance gen_randomized_lb(std::size_t m, std::uint64_t seed)
{
	require(m >= 2, "gen_randomized_lb: need m >= 2");
	const std::size_t n = randomized_lb_jobs(m);
	std::mt19937_64 rng(seed);
	Instance inst;
	inst.jobs.resize(n);
	for (auto& job : inst.jobs)
		job.ops = randomized_lb_ops(geometric_half(rng()), m);
	return inst;
}

OpsSrptLb gen_opsrpt_logn_lb(unsigned k_star, Time max_horizon)
{
	require(k_star >= 1, "gen_opsrpt_logn_lb: need k* >= 1");
	require(k_star <= 20, "gen_opsrpt_logn_lb: k* too large for the size budget");
	OpsSrptLb out;
	out.scale = Size{1} << (k_star + 3);
	out.epsilon = 2;
	out.M = (Size{1} << k_star) * out.scale;
	const Size M = out.M;
	const Size half_eps = out.epsilon / 2;
	auto& jobs = out.instance.jobs;

	// Base pair: both become critical at M/4.
	jobs.push_back({0, {M / 4 - half_eps, M / 4 - half_eps}});
	jobs.push_back({0, {M / 4, 0}});

	Time t = M / 4;
	for (unsigned k = 2; k <= k_star; ++k) {
		const Size a1 = (M >> k) - half_eps;
		const Size a2 = (M >> (k + 1)) - half_eps;
		const Size b1 = M >> (k + 1);
		jobs.push_back({t, {a1, a2}});
		jobs.push_back({t + (M >> k) + (M >> (k + 1)) - out.epsilon, {b1, 0}});
		t += 2 * (M >> k) - out.epsilon;
	}
	out.t_hat = t;

	// Unit-job tail, one per scaled time unit.
	out.tail_jobs = (std::size_t{1} << k_star) + 1;
	for (std::size_t u = 0; u < out.tail_jobs; ++u)
		jobs.push_back({out.t_hat + out.scale - out.epsilon + static_cast<Time>(u) * out.scale, {out.scale, 0}});
	sort_by_release(out.instance);

	const Time horizon = out.instance.max_release() + out.instance.total_volume();
	if (horizon > max_horizon)
		throw InputError("gen_opsrpt_logn_lb: k*=" + std::to_string(k_star) + " needs " + std::to_string(horizon) +
		                 " slots, over the budget of " + std::to_string(max_horizon));
	return out;
}

DetLbAdversary::DetLbAdversary(std::size_t N, std::size_t m) : N_(N), m_(m)
{
	require(N >= 1, "det-lb: need N >= 1");
	require(m >= 2, "det-lb: need m >= 2");
}

std::vector<Time> DetLbAdversary::releases() const { return std::vector<Time>(N_ * (m_ + 1), 0); }

std::optional<Size> DetLbAdversary::reveal(JobId, std::size_t op, const RunHistory&)
{
	if (op >= m_)
		return std::nullopt;
	if (op == 0)
		return 1;
	if (op == m_ - 1) {
		// This job just finished its (m-1)-th operation.
		++reached_;
		return reached_ <= N_ ? 1 : 0;
	}
	return reached_ >= N_ ? 0 : 1;
}

std::map<std::string, std::int64_t> parse_params(const std::string& text)
{
	std::map<std::string, std::int64_t> out;
	std::stringstream ss(text);
	std::string item;
	while (std::getline(ss, item, ',')) {
		std::erase_if(item, [](unsigned char ch) { return std::isspace(ch); });
		if (item.empty())
			continue;
		const auto eq = item.find('=');
		if (eq == std::string::npos || eq == 0)
			throw InputError("bad parameter '" + item + "' (expected key=value)");
		const std::string key = item.substr(0, eq);
		const std::string val = item.substr(eq + 1);
		std::size_t used = 0;
		std::int64_t v = 0;
		try {
			v = std::stoll(val, &used);
		} catch (const std::exception&) {
			used = 0;
		}
		if (used == 0 || used != val.size())
			throw InputError("parameter " + key + " needs an integer value, got '" + val + "'");
		out[key] = v;
	}
	return out;
}

namespace {

class ParamReader {
public:
	explicit ParamReader(const GenSpec& spec) : spec_(spec) {}

	std::int64_t get(const std::string& key, std::int64_t fallback, std::int64_t lo = 0)
	{
		used_.push_back(key);
		auto it = spec_.params.find(key);
		const std::int64_t v = it == spec_.params.end() ? fallback : it->second;
		if (v < lo)
			throw InputError("parameter " + key + " must be >= " + std::to_string(lo));
		resolved_[key] = v;
		return v;
	}

	void finish() const
	{
		for (const auto& [k, v] : spec_.params)
			if (std::find(used_.begin(), used_.end(), k) == used_.end())
				throw InputError("family " + spec_.family + " has no parameter '" + k + "'");
	}

	Json resolved() const { return Json(resolved_); }

private:
	const GenSpec& spec_;
	std::vector<std::string> used_;
	std::map<std::string, std::int64_t> resolved_;
};

}  // namespace

Generated generate(const GenSpec& spec)
{
	ParamReader p(spec);
	Generated g;
	Json extra = Json::object();
	const auto& f = spec.family;
	if (f == "monotone") {
		const auto n = p.get("n", 20, 1), m = p.get("m", 3, 1), max = p.get("max", 16, 1);
		p.finish();
		g.instance = gen_monotone(static_cast<std::size_t>(n), static_cast<std::size_t>(m), max, spec.seed);
	} else if (f == "uniform-tests") {
		const auto n = p.get("n", 20, 1), ps = p.get("p", 4, 1), max = p.get("max", 16, 0);
		p.finish();
		g.instance = gen_uniform_tests(static_cast<std::size_t>(n), ps, max, spec.seed);
	} else if (f == "general") {
		const auto n = p.get("n", 20, 1), m_min = p.get("m_min", 1, 1), m_max = p.get("m_max", 4, 1);
		const auto s_min = p.get("size_min", 1, 1), s_max = p.get("size_max", 64, 1);
		const auto zero_pct = p.get("zero_pct", 10, 0);
		p.finish();
		g.instance = gen_general(static_cast<std::size_t>(n), static_cast<std::size_t>(m_min),
		                         static_cast<std::size_t>(m_max), s_min, s_max, spec.seed,
		                         static_cast<unsigned>(zero_pct));
	} else if (f == "randomized-lb") {
		const auto m = p.get("m", 20, 2);
		p.finish();
		g.instance = gen_randomized_lb(static_cast<std::size_t>(m), spec.seed);
		extra["n"] = g.instance.size();
		extra["eval_time"] = randomized_lb_eval_time(g.instance.size());
	} else if (f == "opsrpt-lb") {
		const auto k = p.get("k", 4, 1);
		p.finish();
		OpsSrptLb lb = gen_opsrpt_logn_lb(static_cast<unsigned>(k));
		g.instance = std::move(lb.instance);
		extra["scale"] = lb.scale;
		extra["epsilon"] = lb.epsilon;
		extra["M"] = lb.M;
		extra["t_hat"] = lb.t_hat;
		extra["tail_jobs"] = lb.tail_jobs;
	} else if (f == "det-lb") {
		throw InputError("det-lb is an adaptive adversary; use the lowerbound subcommand");
	} else {
		throw InputError("unknown generator family '" + f +
		                 "' (expected monotone, uniform-tests, general, randomized-lb, opsrpt-lb)");
	}
	validate(g.instance);
	const InstanceParams ip = instance_params(g.instance);
	g.metadata = Json{{"family", f},           {"params", p.resolved()}, {"seed", spec.seed},
	                  {"m", ip.m},             {"m1", ip.m1},            {"m2", ip.m2}};
	for (auto& [k, v] : extra.items())
		g.metadata[k] = v;
	return g;
}

Json to_json(const Generated& g)
{
	Json j = to_json(g.instance);
	j["metadata"] = g.metadata;
	return j;
}

}  // namespace opflow
