#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "grazing/continuation.hpp"
#include "grazing/fitting.hpp"
#include "grazing/ode_model.hpp"
#include "grazing/param_search.hpp"
#include "grazing/theorem.hpp"

namespace grazing {

using Json = nlohmann::ordered_json;

std::string format_double(double v);  // shortest round-trip decimal

Json to_json(const NormalFormParams& p);
NormalFormParams params_from_json(const Json& j);

Json to_json(const OdeParams& p);
OdeParams ode_from_json(const Json& j);

Json to_json(const TheoremReport& r, const Tolerances& tol);
Json to_json(const NewtonReport& r);
Json to_json(const SolveCandidate& c);
Json to_json(const FitReport& r);
Json to_json(const GrazingData& g);
Json to_json(const LeadingOrderNF& nf);

Json load_json(const std::string& path);            // IoError on failure
void save_json(const std::string& path, Json j);    // adds generator field

void write_cycle_csv(const std::string& path,
                     const std::vector<EnumerationRow>& rows);
void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectorySample>& samples);
// One diagram row per branch point; shared by per-branch and merged files.
void write_branch_csv(const std::string& path, const GrazingData& g,
                      const std::vector<Branch>& branches);

}  // namespace grazing
