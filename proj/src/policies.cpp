#include "opflow/policies.hpp"

#include <algorithm>
#include <climits>
#include <map>

namespace opflow {

std::optional<JobId> SrptPolicy::choose(const SchedulerView& view, const RemainingOracle* oracle)
{
	if (view.active.empty())
		return std::nullopt;
	if (!oracle)
		throw InputError("srpt: no remaining-size oracle");
	JobId best = view.active.front().id;
	for (const auto& s : view.active)
		if (oracle->remaining(s.id) < oracle->remaining(best))
			best = s.id;
	return best;
}

std::optional<JobId> OpsSrptPolicy::choose(const SchedulerView& view, const RemainingOracle*)
{
	if (view.active.empty())
		return std::nullopt;
	const VisibleJobState* best = &view.active.front();
	for (const auto& s : view.active) {
		if (std::tie(s.active_remaining, s.active_op, s.id) < std::tie(best->active_remaining, best->active_op, best->id))
			best = &s;
	}
	return best->id;
}

int ChunkAlgState::top_class() const
{
	return part.empty() ? INT_MAX : cls[part.back()];
}

void ChunkPolicy::reset()
{
	state_ = {};
	insertions_.clear();
	known_.clear();
	seen_op_.clear();
	last_ = kIdle;
	checks_ = 0;
}

void ChunkPolicy::insert_full(JobId j, int k, Size active_size, Time t)
{
	state_.cls[j] = k;
	state_.full.emplace(k, active_size, j);
	insertions_.push_back({t, j, k});
}

void ChunkPolicy::check_invariants(const SchedulerView& view, const char* where)
{
	++checks_;
	const auto& part = state_.part;
	for (std::size_t i = 0; i + 1 < part.size(); ++i)
		if (!(state_.cls[part[i]] > state_.cls[part[i + 1]]))
			throw InvariantViolation("chunk.stack_monotone",
			                         std::string(where) + " t=" + std::to_string(view.now) + ": stack classes " +
			                             std::to_string(state_.cls[part[i + 1]]) + " above " +
			                             std::to_string(state_.cls[part[i]]));
	const std::size_t n = view.active.size();
	if (4 * state_.full.size() + 4 < n)
		throw InvariantViolation("chunk.full_fraction", std::string(where) + " t=" + std::to_string(view.now) +
		                                                    ": |J_full|=" + std::to_string(state_.full.size()) +
		                                                    " < |J|/4 - 1 with |J|=" + std::to_string(n));
	if (state_.full.size() + part.size() != n)
		throw InvariantViolation("chunk.bookkeeping", std::string(where) + " t=" + std::to_string(view.now) +
		                                                  ": queue and stack do not cover the active jobs");
}

std::optional<JobId> ChunkPolicy::choose(const SchedulerView& view, const RemainingOracle*)
{
	auto find = [&](JobId j) -> const VisibleJobState* {
		auto it = std::lower_bound(view.active.begin(), view.active.end(), j,
		                           [](const VisibleJobState& s, JobId id) { return s.id < id; });
		return (it != view.active.end() && it->id == j) ? &*it : nullptr;
	};

	// Step 3 for the job processed in the previous slot.
	if (last_ != kIdle) {
		if (state_.part.empty() || state_.part.back() != last_)
			throw InvariantViolation("chunk.bookkeeping", "processed job is not on top of the stack");
		const VisibleJobState* s = find(last_);
		if (!s) {
			state_.part.pop_back();
		} else if (s->active_op != seen_op_[last_]) {
			seen_op_[last_] = s->active_op;
			const int k = class_of(s->active_size);
			if (k >= state_.cls[last_] + 1) {
				state_.part.pop_back();
				insert_full(last_, k, s->active_size, view.now);
			}
		}
	}

	// Arrivals.
	for (const auto& s : view.active) {
		if (s.id >= known_.size()) {
			known_.resize(s.id + 1, 0);
			seen_op_.resize(s.id + 1, 0);
			state_.cls.resize(s.id + 1, 0);
		}
		if (!known_[s.id]) {
			known_[s.id] = 1;
			seen_op_[s.id] = s.active_op;
			insert_full(s.id, class_of(s.active_size), s.active_size, view.now);
		}
	}
	check_invariants(view, "before step 1");

	// Step 1.
	const std::size_t n = view.active.size();
	while (!state_.full.empty() && 4 * state_.full.size() >= n &&
	       std::get<0>(state_.front()) < state_.top_class()) {
		const JobId j = std::get<2>(state_.front());
		state_.full.erase(state_.full.begin());
		state_.part.push_back(j);
	}
	check_invariants(view, "after step 1");

	// Step 2.
	last_ = state_.has_top() ? state_.top() : kIdle;
	if (last_ == kIdle)
		return std::nullopt;
	return last_;
}

std::optional<JobId> ReplayPolicy::choose(const SchedulerView& view, const RemainingOracle*)
{
	const auto t = static_cast<std::size_t>(view.now);
	if (t >= schedule_.size() || schedule_[t] == kIdle)
		return std::nullopt;
	return schedule_[t];
}

namespace {

class BruteForce {
public:
	explicit BruteForce(const Instance& inst) : inst_(inst)
	{
		for (const auto& j : inst.jobs)
			last_release_ = std::max(last_release_, j.release);
	}

	Time solve(Time t, std::vector<Size>& rem)
	{
		// Past the last release the subproblem no longer depends on t.
		const Time key_t = std::min(t, last_release_);
		Key key{key_t, rem};
		if (auto it = memo_.find(key); it != memo_.end())
			return it->second;

		std::size_t active = 0;
		bool pending = false;
		for (JobId j = 0; j < rem.size(); ++j) {
			if (rem[j] == 0)
				continue;
			if (inst_.jobs[j].release <= t)
				++active;
			else
				pending = true;
		}
		Time best;
		if (active == 0) {
			best = pending ? solve(t + 1, rem) : 0;
		} else {
			best = std::numeric_limits<Time>::max();
			for (JobId j = 0; j < rem.size(); ++j) {
				if (rem[j] == 0 || inst_.jobs[j].release > t)
					continue;
				--rem[j];
				best = std::min(best, solve(t + 1, rem));
				++rem[j];
			}
			best += static_cast<Time>(active);
		}
		memo_.emplace(std::move(key), best);
		return best;
	}

	std::vector<JobId> witness(std::vector<Size> rem)
	{
		std::vector<JobId> out;
		for (Time t = 0;; ++t) {
			bool any = false;
			for (Size r : rem)
				any = any || r > 0;
			if (!any)
				break;
			const Time here = solve(t, rem);
			std::size_t active = 0;
			for (JobId j = 0; j < rem.size(); ++j)
				if (rem[j] > 0 && inst_.jobs[j].release <= t)
					++active;
			JobId pick = kIdle;
			for (JobId j = 0; j < rem.size() && active > 0; ++j) {
				if (rem[j] == 0 || inst_.jobs[j].release > t)
					continue;
				--rem[j];
				const bool ok = static_cast<Time>(active) + solve(t + 1, rem) == here;
				++rem[j];
				if (ok) {
					pick = j;
					break;
				}
			}
			if (pick != kIdle)
				--rem[pick];
			out.push_back(pick);
		}
		return out;
	}

private:
	using Key = std::pair<Time, std::vector<Size>>;
	const Instance& inst_;
	Time last_release_ = 0;
	std::map<Key, Time> memo_;
};

}  // namespace

BruteForceResult brute_force_optimal(const Instance& instance, Size cap)
{
	validate(instance);
	if (instance.total_volume() > cap)
		throw InputError("brute_force_optimal: total volume " + std::to_string(instance.total_volume()) +
		                 " exceeds cap " + std::to_string(cap));
	std::vector<Size> rem;
	for (const auto& j : instance.jobs)
		rem.push_back(j.total());
	BruteForce bf(instance);
	BruteForceResult res;
	res.total_flow = bf.solve(0, rem);
	res.schedule = bf.witness(rem);
	return res;
}

std::unique_ptr<Policy> make_policy(const std::string& name)
{
	if (name == "srpt")
		return std::make_unique<SrptPolicy>();
	if (name == "ops-srpt")
		return std::make_unique<OpsSrptPolicy>();
	if (name == "chunk")
		return std::make_unique<ChunkPolicy>();
	if (name == "bruteforce")
		throw InputError("policy bruteforce needs a fixed instance");
	throw InputError("unknown policy '" + name + "' (expected srpt, ops-srpt, chunk, bruteforce)");
}

std::unique_ptr<Policy> make_policy_for(const std::string& name, const Instance& instance)
{
	if (name == "bruteforce")
		return std::make_unique<ReplayPolicy>("bruteforce", brute_force_optimal(instance).schedule);
	return make_policy(name);
}

}  // namespace opflow
