#include "opflow/cli.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "opflow/certificate.hpp"
#include "opflow/generators.hpp"
#include "opflow/policies.hpp"

namespace opflow {

namespace fs = std::filesystem;

namespace {

// Runs f(0..n-1) on up to `jobs` threads; rethrows the first failure in index
// order so errors do not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f)
{
	if (jobs == 0)
		jobs = std::max(1u, std::thread::hardware_concurrency());
	std::vector<std::exception_ptr> errors(n);
	std::atomic<std::size_t> next{0};
	auto worker = [&] {
		for (std::size_t i; (i = next++) < n;) {
			try {
				f(i);
			} catch (...) {
				errors[i] = std::current_exception();
			}
		}
	};
	{
		std::vector<std::jthread> pool;
		for (unsigned w = 1; w < std::min<std::size_t>(jobs, n); ++w)
			pool.emplace_back(worker);
		worker();
	}
	for (auto& e : errors)
		if (e)
			std::rethrow_exception(e);
}

struct Input {
	std::string name;
	Instance instance;
	Json metadata;  // null unless generated
};

std::vector<Input> load_inputs(const RunConfig& c)
{
	if (!c.instances.empty() && !c.family.empty())
		throw InputError("give either --instance or --gen, not both");
	std::vector<Input> out;
	if (!c.family.empty()) {
		auto g = generate(GenSpec{c.family, parse_params(c.params), c.seed});
		out.push_back({c.family, std::move(g.instance), std::move(g.metadata)});
		return out;
	}
	if (c.instances.empty())
		throw InputError("no input: pass --instance <path> or --gen <family>");
	for (const auto& path : c.instances)
		out.push_back({fs::path(path).stem().string(), read_instance(path), nullptr});
	if (out.size() > 1)
		for (std::size_t i = 0; i < out.size(); ++i)
			out[i].name = std::to_string(i) + "-" + out[i].name;
	return out;
}

void write_text(const fs::path& path, const std::string& text)
{
	std::ofstream f(path, std::ios::binary);
	if (!f)
		throw InputError("cannot write " + path.string());
	f << text;
	if (!f)
		throw InputError("write failed: " + path.string());
}

fs::path prepare_out(const RunConfig& c)
{
	const fs::path dir(c.out);
	std::error_code ec;
	fs::create_directories(dir, ec);
	if (ec)
		throw InputError("cannot create output directory " + c.out + ": " + ec.message());
	write_json(dir / "config.json", to_json(c));
	return dir;
}

void save_generated(const fs::path& dir, const std::vector<Input>& inputs)
{
	for (const auto& in : inputs)
		if (!in.metadata.is_null()) {
			Json j = to_json(in.instance);
			j["metadata"] = in.metadata;
			write_json(dir / (in.name + ".instance.json"), j);
		}
}

std::vector<std::string> policies_or(const RunConfig& c, std::vector<std::string> fallback)
{
	return c.policies.empty() ? fallback : c.policies;
}

SimResult run_policy(const std::string& name, const Instance& inst)
{
	auto p = make_policy_for(name, inst);
	return simulate(inst, *p);
}

// One (instance, policy) run against the SRPT baseline on the same instance.
struct PolicyRun {
	SimResult alg;
	MaxLocalRatio local;
};

struct Batch {
	std::vector<Input> inputs;
	std::vector<std::string> policies;
	std::vector<SimResult> srpt;      // per input
	std::vector<PolicyRun> runs;      // input-major
};

Batch run_batch(const RunConfig& c, std::vector<std::string> policies)
{
	Batch b;
	b.inputs = load_inputs(c);
	b.policies = std::move(policies);
	for (const auto& p : b.policies)
		make_policy_for(p, Instance{});  // reject unknown names before any work
	b.srpt.resize(b.inputs.size());
	parallel_for(b.inputs.size(), c.jobs, [&](std::size_t i) { b.srpt[i] = run_policy("srpt", b.inputs[i].instance); });
	b.runs.resize(b.inputs.size() * b.policies.size());
	parallel_for(b.runs.size(), c.jobs, [&](std::size_t k) {
		const std::size_t i = k / b.policies.size();
		PolicyRun r;
		r.alg = run_policy(b.policies[k % b.policies.size()], b.inputs[i].instance);
		r.local = max_local_ratio(local_counts(r.alg, b.srpt[i]));
		b.runs[k] = std::move(r);
	});
	return b;
}

double ratio_of(Time a, Time b) { return b == 0 ? 1.0 : static_cast<double>(a) / static_cast<double>(b); }

Json run_row(const PolicyRun& r, const SimResult& srpt)
{
	return Json{{"policy", r.alg.policy},
	            {"total_flow", r.alg.trace.total_flow()},
	            {"srpt_total_flow", srpt.trace.total_flow()},
	            {"ratio_vs_srpt", ratio_of(r.alg.trace.total_flow(), srpt.trace.total_flow())},
	            {"max_local_ratio", r.local.ratio},
	            {"tau_star", r.local.at}};
}

void cmd_run(const RunConfig& c, std::ostream& out)
{
	const Batch b = run_batch(c, policies_or(c, {}));
	if (b.policies.empty())
		throw InputError("run: --policy is required");
	Json report = Json::array();
	std::optional<fs::path> dir;
	if (!c.out.empty()) {
		dir = prepare_out(c);
		save_generated(*dir, b.inputs);
	}
	for (std::size_t i = 0; i < b.inputs.size(); ++i)
		for (std::size_t p = 0; p < b.policies.size(); ++p) {
			const auto& r = b.runs[i * b.policies.size() + p];
			Json row{{"instance", b.inputs[i].name}};
			row.update(run_row(r, b.srpt[i]));
			report.push_back(row);
			if (!dir)
				continue;
			const std::string stem = b.inputs[i].name + "." + b.policies[p];
			std::ostringstream csv;
			write_trace_csv(csv, r.alg.trace, b.srpt[i].trace);
			write_text(*dir / (stem + ".trace.csv"), csv.str());
			Json summary = summary_json(r.alg);
			summary["srpt_total_flow"] = b.srpt[i].trace.total_flow();
			summary["max_local_ratio"] = r.local.ratio;
			summary["tau_star"] = r.local.at;
			write_json(*dir / (stem + ".summary.json"), summary);
		}
	out << dump(report.size() == 1 ? report[0] : report);
}

void cmd_gen(const RunConfig& c, std::ostream& out)
{
	if (c.family.empty())
		throw InputError("gen: --gen <family> is required");
	const auto inputs = load_inputs(c);
	if (!c.out.empty())
		save_generated(prepare_out(c), inputs);
	Json j = to_json(inputs[0].instance);
	j["metadata"] = inputs[0].metadata;
	out << dump(j);
}

void cmd_compare(const RunConfig& c, std::ostream& out)
{
	const auto policies = policies_or(c, {"srpt", "ops-srpt", "chunk"});
	if (policies.size() < 2)
		throw InputError("compare: needs at least two policies");
	const Batch b = run_batch(c, policies);
	Json report = Json::array();
	for (std::size_t i = 0; i < b.inputs.size(); ++i) {
		const auto params = instance_params(b.inputs[i].instance);
		Json rows = Json::array();
		const Time first = b.runs[i * policies.size()].alg.trace.total_flow();
		for (std::size_t p = 0; p < policies.size(); ++p) {
			const auto& r = b.runs[i * policies.size() + p];
			Json row = run_row(r, b.srpt[i]);
			row["ratio_vs_first"] = ratio_of(r.alg.trace.total_flow(), first);
			rows.push_back(row);
		}
		report.push_back(Json{{"instance", b.inputs[i].name},
		                      {"jobs", b.inputs[i].instance.size()},
		                      {"m", params.m},
		                      {"m1", params.m1},
		                      {"m2", params.m2},
		                      {"policies", rows}});
	}
	if (!c.out.empty()) {
		const auto dir = prepare_out(c);
		save_generated(dir, b.inputs);
		write_json(dir / "compare.json", report);
	}
	out << dump(report);
}

std::int64_t param(const std::map<std::string, std::int64_t>& p, const std::string& key, std::int64_t fallback,
                   std::int64_t min)
{
	const auto it = p.find(key);
	const std::int64_t v = it == p.end() ? fallback : it->second;
	if (v < min)
		throw InputError("parameter " + key + " must be >= " + std::to_string(min));
	return v;
}

void reject_unknown(const std::map<std::string, std::int64_t>& p, std::initializer_list<const char*> known)
{
	for (const auto& [k, v] : p)
		if (std::none_of(known.begin(), known.end(), [&](const char* s) { return k == s; }))
			throw InputError("unknown parameter '" + k + "'");
}

Json lb_det(const RunConfig& c, const std::vector<std::string>& policies)
{
	const auto p = parse_params(c.params);
	reject_unknown(p, {"N", "m"});
	const auto N = static_cast<std::size_t>(param(p, "N", 10, 1));
	const auto m = static_cast<std::size_t>(param(p, "m", 4, 2));
	std::vector<Json> rows(policies.size());
	parallel_for(policies.size(), c.jobs, [&](std::size_t i) {
		DetLbAdversary adv(N, m);
		auto pol = make_policy(policies[i]);
		const auto alg = simulate(adv, *pol);
		const auto opt = run_policy("srpt", alg.realized);
		const auto best = max_local_ratio(local_counts(alg, opt));
		rows[i] = Json{{"policy", policies[i]},
		               {"max_local_ratio", best.ratio},
		               {"tau_star", best.at},
		               {"alg_active", alg.trace.active_at(best.at)},
		               {"srpt_active", opt.trace.active_at(best.at)},
		               {"total_flow", alg.trace.total_flow()},
		               {"srpt_total_flow", opt.trace.total_flow()}};
	});
	return Json{{"family", "det-lb"}, {"N", N}, {"m", m}, {"jobs", N * (m + 1)}, {"policies", rows}};
}

Json lb_randomized(const RunConfig& c, const std::vector<std::string>& policies)
{
	const auto p = parse_params(c.params);
	reject_unknown(p, {"m", "runs"});
	const auto m = static_cast<std::size_t>(param(p, "m", 20, 1));
	const auto runs = static_cast<std::size_t>(param(p, "runs", 1, 1));
	const std::size_t n = randomized_lb_jobs(m);
	const Time t = randomized_lb_eval_time(n);
	// row 0 is SRPT, then one row per policy
	std::vector<std::vector<std::uint32_t>> active(policies.size() + 1, std::vector<std::uint32_t>(runs));
	parallel_for(runs, c.jobs, [&](std::size_t r) {
		const Instance inst = gen_randomized_lb(m, c.seed + r);
		active[0][r] = run_policy("srpt", inst).trace.active_at(t);
		for (std::size_t i = 0; i < policies.size(); ++i)
			active[i + 1][r] = run_policy(policies[i], inst).trace.active_at(t);
	});
	auto mean = [](const std::vector<std::uint32_t>& v) {
		double s = 0;
		for (auto x : v)
			s += x;
		return s / static_cast<double>(v.size());
	};
	Json rows = Json::array();
	for (std::size_t i = 0; i < policies.size(); ++i)
		rows.push_back(Json{{"policy", policies[i]}, {"mean_active", mean(active[i + 1])}, {"active", active[i + 1]}});
	return Json{{"family", "randomized-lb"},
	            {"m", m},
	            {"n", n},
	            {"eval_time", t},
	            {"seed", c.seed},
	            {"runs", runs},
	            {"srpt_mean_active", mean(active[0])},
	            {"srpt_active", active[0]},
	            {"policies", rows}};
}

Json lb_opsrpt(const RunConfig& c, const std::vector<std::string>& policies)
{
	const auto p = parse_params(c.params);
	reject_unknown(p, {"k"});
	const auto k = static_cast<unsigned>(param(p, "k", 4, 1));
	const auto lb = gen_opsrpt_logn_lb(k);
	const auto opt = run_policy("srpt", lb.instance);
	std::vector<Json> rows(policies.size());
	parallel_for(policies.size(), c.jobs, [&](std::size_t i) {
		const auto alg = run_policy(policies[i], lb.instance);
		rows[i] = Json{{"policy", policies[i]},
		               {"active_at_t_hat", alg.trace.active_at(lb.t_hat)},
		               {"total_flow", alg.trace.total_flow()},
		               {"ratio_vs_srpt", ratio_of(alg.trace.total_flow(), opt.trace.total_flow())}};
	});
	return Json{{"family", "opsrpt-lb"},
	            {"k", k},
	            {"jobs", lb.instance.size()},
	            {"scale", lb.scale},
	            {"epsilon", lb.epsilon},
	            {"M", lb.M},
	            {"t_hat", lb.t_hat},
	            {"srpt_active_at_t_hat", opt.trace.active_at(lb.t_hat)},
	            {"srpt_total_flow", opt.trace.total_flow()},
	            {"policies", rows}};
}

void cmd_lowerbound(const RunConfig& c, std::ostream& out)
{
	if (!c.instances.empty())
		throw InputError("lowerbound: takes --gen <det-lb|randomized-lb|opsrpt-lb>, not an instance file");
	const auto policies = policies_or(c, {"ops-srpt", "chunk"});
	for (const auto& p : policies)
		if (make_policy(p)->clairvoyant())
			throw InputError("lowerbound: policy '" + p + "' is clairvoyant; the constructions target online policies");
	Json report;
	if (c.family == "det-lb")
		report = lb_det(c, policies);
	else if (c.family == "randomized-lb")
		report = lb_randomized(c, policies);
	else if (c.family == "opsrpt-lb")
		report = lb_opsrpt(c, policies);
	else
		throw InputError("lowerbound: unknown family '" + c.family + "' (det-lb, randomized-lb, opsrpt-lb)");
	if (!c.out.empty())
		write_json(prepare_out(c) / "lowerbound.json", report);
	out << dump(report);
}

void cmd_certify(const RunConfig& c, std::ostream& out)
{
	for (const auto& p : c.policies)
		if (p != "chunk")
			throw InputError("certify: only the chunk policy has a certificate");
	const auto inputs = load_inputs(c);
	if (inputs.size() != 1)
		throw InputError("certify: takes exactly one instance");
	const Instance& inst = inputs[0].instance;
	const ChunkDecomposition dec(inst);
	const auto alg = run_policy("chunk", inst);
	const auto opt = run_policy("srpt", inst);
	const Time tau = c.tau ? *c.tau : default_tau(alg.trace);
	if (tau < 0)
		throw InputError("tau must be nonnegative");

	const ChunkTimeline tl(alg.trace, dec);
	const auto assumption = check_reduced_assumption(alg.trace, tl, dec, tau);
	const auto acc = account_chunks(alg.trace, tl, dec, tau);
	const auto cert = build_dual_certificate(acc, alg.trace.active_at(tau));
	std::optional<ExcessLemmaReport> lemmas;
	if (assumption.holds)
		lemmas = verify_excess_lemmas(acc, assumption);
	std::vector<std::vector<std::size_t>> sets;
	for (const auto& [k, v] : acc.F) {
		sets.push_back(acc.below(k));
		sets.push_back(acc.at_most(k));
	}
	const auto primal = verify_primal_feasibility_sampled(opt.trace, dec, tau, c.seed, c.samples, sets);
	const auto e2e = end_to_end_bound_check(alg.trace, opt.trace, dec);

	const bool gated = assumption.holds && !cert.degenerate();
	Json report{{"instance", inputs[0].name},
	            {"tau", tau},
	            {"tau_source", c.tau ? "given" : "auto"},
	            {"active_jobs", alg.trace.active_at(tau)},
	            {"srpt_active_jobs", opt.trace.active_at(tau)},
	            {"gated", gated},
	            {"assumption", to_json(assumption)},
	            {"certificate", to_json(cert)},
	            {"excess_lemmas", lemmas ? to_json(*lemmas) : Json(nullptr)},
	            {"primal", to_json(primal)},
	            {"end_to_end", to_json(e2e)}};
	if (!c.out.empty()) {
		const auto dir = prepare_out(c);
		save_generated(dir, inputs);
		write_json(dir / "certificate.json", report);
	}
	out << dump(report);

	if (!primal.ok())
		throw InvariantViolation("certificate.primal_feasibility", "a covering constraint fails at tau=" + std::to_string(tau));
	if (!e2e.ok())
		throw InvariantViolation("analysis.end_to_end_bound", "active-job bound fails");
	if (lemmas && !lemmas->ok())
		throw InvariantViolation("certificate.excess_lemmas", "an excess lower bound fails at tau=" + std::to_string(tau));
	if (gated && !cert.feasible())
		throw InvariantViolation("certificate.dual_feasibility", "slack " + cert.max_slack.str() + " > 14");
	if (gated && !cert.objective_ok())
		throw InvariantViolation("certificate.dual_objective",
		                         "objective " + cert.objective.str() + " < " + cert.objective_bound.str());
}

std::uint64_t env_seed()
{
	const char* s = std::getenv("OPFLOW_SEED");
	if (s == nullptr || *s == '\0')
		return 0;
	try {
		std::size_t used = 0;
		const std::string text(s);
		const auto v = std::stoull(text, &used);
		if (used == text.size() && text.front() != '-')
			return v;
	} catch (const std::exception&) {
	}
	throw InputError(std::string("OPFLOW_SEED is not an unsigned integer: '") + s + "'");
}

std::optional<Time> parse_tau(const std::string& text)
{
	if (text.empty() || text == "auto")
		return std::nullopt;
	try {
		std::size_t used = 0;
		const auto v = std::stoll(text, &used);
		if (used == text.size() && v >= 0)
			return v;
	} catch (const std::exception&) {
	}
	throw InputError("--tau expects a nonnegative integer or 'auto', got '" + text + "'");
}

}  // namespace

Json to_json(const RunConfig& c)
{
	return Json{{"subcommand", c.subcommand},
	            {"instances", c.instances},
	            {"family", c.family},
	            {"params", c.params},
	            {"seed", c.seed},
	            {"policies", c.policies},
	            {"tau", c.tau ? Json(*c.tau) : Json("auto")},
	            {"out", c.out},
	            {"jobs", c.jobs},
	            {"samples", c.samples}};
}

RunConfig run_config_from_json(const Json& j)
{
	try {
		RunConfig c;
		c.subcommand = j.at("subcommand").get<std::string>();
		c.instances = j.at("instances").get<std::vector<std::string>>();
		c.family = j.at("family").get<std::string>();
		c.params = j.at("params").get<std::string>();
		c.seed = j.at("seed").get<std::uint64_t>();
		c.policies = j.at("policies").get<std::vector<std::string>>();
		const Json& tau = j.at("tau");
		c.tau = tau.is_string() ? parse_tau(tau.get<std::string>()) : std::optional<Time>(tau.get<Time>());
		c.out = j.at("out").get<std::string>();
		c.jobs = j.at("jobs").get<unsigned>();
		c.samples = j.at("samples").get<std::size_t>();
		return c;
	} catch (const Json::exception& e) {
		throw InputError(std::string("bad run config: ") + e.what());
	}
}

void execute(const RunConfig& c, std::ostream& out)
{
	if (c.subcommand == "run")
		cmd_run(c, out);
	else if (c.subcommand == "gen")
		cmd_gen(c, out);
	else if (c.subcommand == "compare")
		cmd_compare(c, out);
	else if (c.subcommand == "lowerbound")
		cmd_lowerbound(c, out);
	else if (c.subcommand == "certify")
		cmd_certify(c, out);
	else
		throw InputError("unknown subcommand '" + c.subcommand + "'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
	CLI::App app{"Online flow-time scheduling with operations: simulate, compare, certify."};
	app.name("opflow");
	app.require_subcommand(1);

	RunConfig c;
	std::string tau = "auto";
	std::optional<std::uint64_t> seed;
	std::string replay_path;
	std::string replay_out;

	auto common = [&](CLI::App* sub, bool with_policy) {
		sub->add_option("--instance", c.instances, "instance JSON file(s)")->delimiter(',');
		sub->add_option("--gen", c.family, "generator family");
		sub->add_option("--params", c.params, "generator parameters k=v,...");
		sub->add_option("--seed", seed, "RNG seed (default: $OPFLOW_SEED, else 0)");
		sub->add_option("--out", c.out, "output directory");
		sub->add_option("--jobs", c.jobs, "worker threads (0 = all cores)");
		if (with_policy)
			sub->add_option("--policy", c.policies, "policy name(s): srpt, ops-srpt, chunk, bruteforce")->delimiter(',');
	};
	auto* run = app.add_subcommand("run", "simulate policies, write traces and summaries");
	common(run, true);
	auto* gen = app.add_subcommand("gen", "generate an instance");
	common(gen, false);
	auto* compare = app.add_subcommand("compare", "compare policies against SRPT");
	common(compare, true);
	auto* lower = app.add_subcommand("lowerbound", "run a lower-bound construction");
	common(lower, true);
	auto* certify = app.add_subcommand("certify", "check the chunk policy's dual certificate at one time");
	common(certify, true);
	certify->add_option("--tau", tau, "certification time, or 'auto' for the earliest peak of |J(t)|");
	certify->add_option("--samples", c.samples, "random subsets for the primal check");
	auto* replay = app.add_subcommand("replay", "rerun a saved config.json");
	replay->add_option("config", replay_path, "config.json written by an earlier run")->required();
	replay->add_option("--out", replay_out, "override the output directory");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		const int code = app.exit(e, out, err);
		return code == 0 ? 0 : 1;
	}

	try {
		if (replay->parsed()) {
			std::ifstream f(replay_path);
			if (!f)
				throw InputError("cannot read " + replay_path);
			Json j;
			try {
				j = Json::parse(f);
			} catch (const Json::exception& e) {
				throw InputError(replay_path + ": " + e.what());
			}
			c = run_config_from_json(j);
			if (!replay_out.empty())
				c.out = replay_out;
		} else {
			c.subcommand = app.get_subcommands().front()->get_name();
			c.seed = seed ? *seed : env_seed();
			c.tau = parse_tau(tau);
		}
		execute(c, out);
		return 0;
	} catch (const InvariantViolation& e) {
		err << "invariant violated: " << e.invariant() << "\n" << e.what() << "\n";
		return 2;
	} catch (const InputError& e) {
		err << "error: " << e.what() << "\n";
		return 1;
	} catch (const std::exception& e) {
		err << "error: " << e.what() << "\n";
		return 1;
	}
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
	std::vector<const char*> argv{"opflow"};
	for (const auto& a : args)
		argv.push_back(a.c_str());
	return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace opflow
