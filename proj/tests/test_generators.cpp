#include <doctest.h>

#include <algorithm>

#include "opflow/analysis.hpp"
#include "opflow/generators.hpp"
#include "opflow/policies.hpp"

using namespace opflow;

namespace {

bool releases_sorted(const Instance& inst)
{
	return std::is_sorted(inst.jobs.begin(), inst.jobs.end(),
	                      [](const Job& a, const Job& b) { return a.release < b.release; });
}

}  // namespace

TEST_CASE("monotone generator")
{
	for (std::uint64_t seed = 0; seed < 50; ++seed) {
		const Instance inst = gen_monotone(30, 1 + seed % 6, 20, seed);
		CHECK_NOTHROW(validate(inst));
		CHECK(inst.size() == 30);
		CHECK(releases_sorted(inst));
		for (const auto& j : inst.jobs) {
			CHECK(j.ops.size() == 1 + seed % 6);
			CHECK(std::is_sorted(j.ops.begin(), j.ops.end()));
			CHECK(j.ops.front() >= 1);
			CHECK(j.ops.back() <= 20);
		}
	}
	CHECK(gen_monotone(10, 3, 8, 5) == gen_monotone(10, 3, 8, 5));
	CHECK_FALSE(gen_monotone(10, 3, 8, 5) == gen_monotone(10, 3, 8, 6));
}

TEST_CASE("monotone with one operation: ops-srpt is SRPT")
{
	for (std::uint64_t seed = 0; seed < 30; ++seed) {
		const Instance inst = gen_monotone(25, 1, 30, seed);
		auto ops = make_policy("ops-srpt");
		auto srpt = make_policy("srpt");
		const auto a = simulate(inst, *ops);
		const auto b = simulate(inst, *srpt);
		CHECK(a.trace.active == b.trace.active);
	}
}

TEST_CASE("uniform-tests generator")
{
	for (std::uint64_t seed = 0; seed < 50; ++seed) {
		const Size p = 1 + static_cast<Size>(seed % 5);
		const Instance inst = gen_uniform_tests(20, p, 12, seed);
		CHECK(releases_sorted(inst));
		CHECK(uniform_test_size(inst) == p);
		for (const auto& j : inst.jobs) {
			REQUIRE(j.ops.size() == 2);
			CHECK(j.ops[1] >= 0);
			CHECK(j.ops[1] <= 12);
		}
		const auto params = instance_params(inst);
		CHECK(params.m1 <= 2);
		CHECK(params.m2 <= 2);
	}
}

TEST_CASE("general generator")
{
	bool multi_chunk = false, zero_ops = false;
	for (std::uint64_t seed = 0; seed < 50; ++seed) {
		const Instance inst = gen_general(20, 2, 6, 1, 256, seed);
		CHECK_NOTHROW(validate(inst));
		CHECK(releases_sorted(inst));
		for (const auto& j : inst.jobs) {
			CHECK(j.ops.size() >= 2);
			CHECK(j.ops.size() <= 6);
			for (Size s : j.ops) {
				CHECK(s <= 256);
				zero_ops |= s == 0;
			}
		}
		multi_chunk |= instance_params(inst).m1 > 1;
	}
	CHECK(multi_chunk);
	CHECK(zero_ops);
	const Instance no_zeros = gen_general(50, 3, 3, 4, 4, 1, 0);
	for (const auto& j : no_zeros.jobs)
		CHECK(j.ops == std::vector<Size>{4, 4, 4});
}

TEST_CASE("deterministic adversary realizations")
{
	SUBCASE("N = 1, m = 2")
	{
		DetLbAdversary adv(1, 2);
		CHECK(adv.releases().size() == 3);
		auto p = make_policy("ops-srpt");
		const auto r = simulate(adv, *p);
		std::size_t full = 0;
		for (const auto& j : r.realized.jobs) {
			CHECK(j.ops.size() == 2);
			full += j.total() == 2;
		}
		CHECK(full == 1);
	}
	SUBCASE("sizes and count of long jobs")
	{
		for (const char* name : {"ops-srpt", "chunk"}) {
			for (std::size_t m : {2, 3, 5}) {
				DetLbAdversary adv(4, m);
				auto p = make_policy(name);
				const auto r = simulate(adv, *p);
				CHECK(r.realized.size() == 4 * (m + 1));
				std::size_t longest = 0;
				for (const auto& j : r.realized.jobs) {
					CHECK(j.total() >= 1);
					CHECK(j.total() <= static_cast<Size>(m));
					for (Size s : j.ops)
						CHECK((s == 0 || s == 1));
					longest += j.total() == static_cast<Size>(m);
				}
				CHECK(longest == 4);
				CHECK(adv.reached() >= 4);
				// Rerunning after reset reproduces the realization.
				const auto again = simulate(adv, *p);
				CHECK(again.realized == r.realized);
			}
		}
	}
}

TEST_CASE("randomized lower-bound pieces")
{
	CHECK(randomized_lb_ops(3, 6) == std::vector<Size>{1, 1, 1, 0, 0, 0});
	CHECK(randomized_lb_ops(8, 6) == std::vector<Size>{1, 1, 1, 1, 1, 3});
	CHECK(randomized_lb_ops(6, 6) == std::vector<Size>{1, 1, 1, 1, 1, 1});
	CHECK(randomized_lb_ops(1, 1) == std::vector<Size>{1});
	CHECK(randomized_lb_jobs(20) == 1024);
	CHECK(randomized_lb_jobs(3) == 2);
	CHECK(randomized_lb_eval_time(1024) == 1685);
	CHECK(geometric_half(~std::uint64_t{0}) == 1);
	CHECK(geometric_half(std::uint64_t{1} << 62) == 2);
	CHECK(geometric_half(1) == 64);

	const Instance inst = gen_randomized_lb(10, 3);
	CHECK(inst.size() == 32);
	double mean = 0;
	for (const auto& j : inst.jobs) {
		CHECK(j.release == 0);
		CHECK(j.ops.size() == 10);
		mean += static_cast<double>(j.total());
	}
	mean /= 32;
	CHECK(mean > 1.0);
	CHECK(mean < 4.0);
	CHECK(gen_randomized_lb(10, 3) == inst);
}

TEST_CASE("Operations-SRPT lower-bound construction")
{
	for (unsigned k : {1u, 2u, 3u, 4u, 5u}) {
		const auto lb = gen_opsrpt_logn_lb(k);
		CHECK_NOTHROW(validate(lb.instance));
		CHECK(releases_sorted(lb.instance));
		CHECK(lb.tail_jobs == (std::size_t{1} << k) + 1);
		CHECK(lb.epsilon >= 1);
		auto ops = make_policy("ops-srpt");
		auto srpt = make_policy("srpt");
		const auto a = simulate(lb.instance, *ops);
		const auto o = simulate(lb.instance, *srpt);
		CHECK(a.trace.active_at(lb.t_hat) == k + 1);
		CHECK(o.trace.active_at(lb.t_hat) == 1);
	}
	CHECK_THROWS_AS(gen_opsrpt_logn_lb(8, 1000), InputError);
	CHECK_THROWS_AS(gen_opsrpt_logn_lb(0), InputError);
}

TEST_CASE("parameter parsing and dispatch")
{
	const auto p = parse_params("n=5, m=2,max=9");
	CHECK(p.at("n") == 5);
	CHECK(p.at("m") == 2);
	CHECK(p.at("max") == 9);
	CHECK(parse_params("").empty());
	CHECK_THROWS_AS(parse_params("n"), InputError);
	CHECK_THROWS_AS(parse_params("n=x"), InputError);

	const auto g = generate(GenSpec{"monotone", {{"n", 7}, {"m", 2}}, 11});
	CHECK(g.instance.size() == 7);
	CHECK(g.metadata["family"] == "monotone");
	CHECK(g.metadata["seed"] == 11);
	CHECK(g.metadata["m"] == 2);
	const Json j = to_json(g);
	CHECK(j.contains("metadata"));
	CHECK(instance_from_json(j) == g.instance);

	const auto r = generate(GenSpec{"randomized-lb", {{"m", 6}}, 1});
	CHECK(r.metadata["n"] == 8);

	CHECK_THROWS_AS(generate(GenSpec{"det-lb", {}, 0}), InputError);
	CHECK_THROWS_AS(generate(GenSpec{"nope", {}, 0}), InputError);
	CHECK_THROWS_AS(generate(GenSpec{"monotone", {{"q", 1}}, 0}), InputError);
}
