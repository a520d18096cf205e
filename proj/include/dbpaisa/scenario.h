/*
 *
 * Copyright 2026 dbpaisa-sim authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#ifndef DBPAISA_SCENARIO_H_
#define DBPAISA_SCENARIO_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbpaisa/simnet.h"

namespace dbpaisa {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Schema violations in a scenario document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DeviceGroup {
  size_t count = 1;
  DeviceParams params;
  SimTime t_res = from_seconds(0.233);
  SimTime t_att_exec = from_seconds(0.001);
  DeviceMode mode = DeviceMode::kPull;
  SimTime push_interval = from_seconds(1);
  BlendPolicy blend;
  RandomDeletionPolicy deletion;
  size_t announcement_pad = 0;
  std::optional<SimTime> tamper_at;
  int domain = 0;
};

struct UserGroup {
  size_t count = 1;
  sim::Arrival arrival;
  SimTime scan_window = kDefaultScanWindow;
  bool accept_announcements = true;
  int domain = 0;
};

struct AdversaryGroup {
  sim::AdversaryConfig config;
  int domain = 0;
};

struct ImSection {
  ImFleetOptions fleet;
  sim::OwnerSchedule schedule;
  RetrievalMode retrieval = RetrievalMode::kNaive;
  int domain = 0;
};

struct ScenarioConfig {
  uint64_t seed = 0;
  SimTime horizon = from_seconds(3600);
  std::string mode = "db";  // db | im | blend
  sim::LinkConfig link;
  std::vector<DeviceGroup> devices;
  std::vector<UserGroup> users;
  std::vector<AdversaryGroup> adversaries;
  std::optional<ImSection> im;
  std::optional<std::string> output_json;
  std::optional<std::string> output_csv;
  nlohmann::ordered_json source;  // the document as read
};

// Rejects unknown keys, missing seeds and out-of-range values.
ScenarioConfig parse_scenario(const nlohmann::ordered_json& doc);
ScenarioConfig load_scenario(const std::filesystem::path& file);

struct ScenarioRun {
  std::unique_ptr<sim::World> world;
  std::shared_ptr<sim::Shared> shared;
  std::vector<sim::NodeId> devices;
  std::vector<sim::NodeId> users;
  std::vector<sim::NodeId> adversaries;
  std::optional<sim::NodeId> owner;
};

ScenarioRun build_scenario(const ScenarioConfig& config);

// Metrics plus config echo and invariant checks.
nlohmann::ordered_json run_report(const ScenarioConfig& config, const ScenarioRun& run);

// Builds, runs to the horizon and returns the report.
nlohmann::ordered_json run_scenario(const ScenarioConfig& config);

}  // namespace dbpaisa

#endif  // DBPAISA_SCENARIO_H_
