#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "threewave/core.hpp"
#include "threewave/resolution.hpp"
#include "threewave/scattering.hpp"
#include "threewave/soliton.hpp"

namespace threewave {

using json = nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

std::string field_csv(const FieldState& f);
void write_field_csv(const std::string& path, const FieldState& f);
FieldState read_field_csv(const std::string& path, double t = 0.0);

std::string reflection_csv(const ScatteringData& data);
std::string series_csv(const ConeErrorSeries& s);

json poles_json(const std::vector<DiscretePole>& poles);
json scattering_json(const WaveSystem& sys, const ScatteringData& data, const ScatteringChecks& checks);
SolitonEnsemble ensemble_from_scattering_json(const json& j);

void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

}  // namespace threewave
