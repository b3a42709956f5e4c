#pragma once

#include "smectic/bps_profile.hpp"
#include "smectic/entropy_measure.hpp"
#include "smectic/grid_field.hpp"
#include "smectic/minimizer.hpp"
#include "smectic/smectic_energy.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace smectic {

using Json = nlohmann::ordered_json;

/// Shortest-exact decimal form used in every CSV cell.
std::string format_number(double v);

/// Raw little-endian f64 values in storage order.
std::string field_bytes(const ScalarField& f);
Json field_sidecar(const ScalarField& f, const std::string& name);
/// Rebuilds a field from a sidecar JSON and the raw dump beside it.
ScalarField read_field_dump(const std::filesystem::path& sidecar);

/// CSV with header x,y,z,value.
std::string field_csv(const ScalarField& f);
/// CSV with header t,g,g_prime.
std::string profile_csv(const ProfileSolution& sol);
/// CSV with header iter,energy,grad_norm,step.
std::string trajectory_csv(const std::vector<TrajectoryPoint>& traj);

/// Generic table: header line followed by rows of numbers.
std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

Json to_json(const Box& b);
Json to_json(const Window& w);
Json to_json(const EnergyBreakdown& e);
Json to_json(const BpsDecomposition& d);
Json to_json(const JumpStates& j);
Json to_json(const CompactnessReport& c);
Json to_json(const MinimizeReport& r);

}  // namespace smectic
