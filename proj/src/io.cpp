#include "opflow/io.hpp"

#include <fstream>
#include <sstream>

namespace opflow {

Json to_json(const Instance& instance)
{
	Json jobs = Json::array();
	for (const auto& job : instance.jobs)
		jobs.push_back(Json{{"release", job.release}, {"ops", job.ops}});
	return Json{{"jobs", std::move(jobs)}};
}

namespace {

Size require_integer(const Json& v, const std::string& what)
{
	if (!v.is_number_integer())
		throw InputError(what + " must be an integer");
	return v.get<Size>();
}

}  // namespace

Instance instance_from_json(const Json& j)
{
	if (!j.is_object() || !j.contains("jobs") || !j.at("jobs").is_array())
		throw InputError("instance: expected an object with a \"jobs\" array");
	Instance inst;
	const auto& jobs = j.at("jobs");
	inst.jobs.reserve(jobs.size());
	for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
		const auto& jj = jobs[idx];
		const std::string where = "jobs[" + std::to_string(idx) + "]";
		if (!jj.is_object() || !jj.contains("release") || !jj.contains("ops") || !jj.at("ops").is_array())
			throw InputError(where + ": expected {\"release\":int, \"ops\":[int,...]}");
		Job job;
		job.release = require_integer(jj.at("release"), where + ".release");
		for (const auto& p : jj.at("ops"))
			job.ops.push_back(require_integer(p, where + ".ops[]"));
		inst.jobs.push_back(std::move(job));
	}
	validate(inst);
	return inst;
}

Instance read_instance(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw InputError("cannot open " + path.string());
	Json j;
	try {
		in >> j;
	} catch (const nlohmann::json::parse_error& e) {
		throw InputError(path.string() + ": " + e.what());
	}
	return instance_from_json(j);
}

std::string dump(const Json& j)
{
	return j.dump(2) + "\n";
}

void write_json(const std::filesystem::path& path, const Json& j)
{
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw InputError("cannot write " + path.string());
	out << dump(j);
}

}  // namespace opflow
