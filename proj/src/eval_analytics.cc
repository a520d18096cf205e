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

#include "dbpaisa/eval_analytics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dbpaisa/registration.h"
#include "dbpaisa/wire.h"

namespace dbpaisa {

namespace {

double Fraction(double t, double period, UbusyForm form) {
  if (std::isinf(period)) return 0;
  return form == UbusyForm::kExclusive ? t / period : t / (period + t);
}

void RequirePositive(double v, const char* what) {
  if (!(v > 0)) throw ParameterError(std::string(what) + " must be positive");
}

constexpr double kDay = 86400;

}  // namespace

double ubusy_push(const CostModel& model, double t_ann_interval, UbusyForm form) {
  RequirePositive(t_ann_interval, "T_ann");
  return Fraction(model.t_ann, t_ann_interval, form);
}

double ubusy_pull(const CostModel& model, double t_req, UbusyForm form, double t_gen) {
  RequirePositive(t_req, "T_req");
  return Fraction(model.t_res, std::max(t_req, t_gen), form);
}

double ubusy_pull_worst(const CostModel& model, double t_gen, UbusyForm form) {
  RequirePositive(t_gen, "T_gen");
  return Fraction(model.t_res, t_gen, form);
}

double ubusy_pull_day(const CostModel& model, const ScenarioModel& scenario,
                      UbusyForm form) {
  if (scenario.crowded_hours < 0 || scenario.crowded_hours > 24) {
    throw ParameterError("crowded hours must lie in [0, 24]");
  }
  double crowded = scenario.crowded_hours / 24;
  double busy = crowded * ubusy_pull(model, scenario.crowded_t_req, form, scenario.t_gen);
  if (scenario.offpeak_per_hour > 0) {
    busy += (1 - crowded) *
            ubusy_pull(model, 3600 / scenario.offpeak_per_hour, form, scenario.t_gen);
  }
  return busy;
}

double bandwidth_push(const MessageSizes& sizes, double t_ann_interval) {
  RequirePositive(t_ann_interval, "T_ann");
  return 8.0 * static_cast<double>(sizes.announcement) / t_ann_interval;
}

double bandwidth_pull(const ScenarioModel& scenario, const MessageSizes& sizes) {
  if (scenario.crowded_hours < 0 || scenario.crowded_hours > 24) {
    throw ParameterError("crowded hours must lie in [0, 24]");
  }
  double bytes = 0;
  auto add_phase = [&](double seconds, double t_req) {
    if (seconds <= 0 || !(t_req > 0) || std::isinf(t_req)) return;
    double requests = seconds / t_req;
    double slot = std::max(t_req, scenario.t_gen);
    double responses = seconds / slot;
    double per_response = std::min<double>(kMaxPooledNonces, std::max(1.0, std::ceil(slot / t_req - 1e-9)));
    double resp_size = static_cast<double>(sizes.response_single) +
                       static_cast<double>(sizes.per_nonce) * (per_response - 1);
    bytes += requests * static_cast<double>(sizes.request) + responses * resp_size;
  };
  add_phase(scenario.crowded_hours * 3600, scenario.crowded_t_req);
  if (scenario.offpeak_per_hour > 0) {
    add_phase((24 - scenario.crowded_hours) * 3600, 3600 / scenario.offpeak_per_hour);
  }
  return 8 * bytes / kDay;
}

double bandwidth(const ScenarioModel& scenario, BandwidthMode mode,
                 const MessageSizes& sizes) {
  return mode == BandwidthMode::kPush ? bandwidth_push(sizes, scenario.t_ann)
                                      : bandwidth_pull(scenario, sizes);
}

std::vector<Table1Row> table1(const Table1Params& params) {
  std::vector<Table1Row> rows;
  for (double t : params.periods) {
    Table1Row row{t, ubusy_push(params.model, t, params.form), {}};
    for (double t_req : params.t_req_columns) {
      ScenarioModel s = params.scenario;
      s.crowded_t_req = t_req;
      s.t_gen = t;
      row.pull.push_back(ubusy_pull_day(params.model, s, params.form));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string table1_csv(const Table1Params& params) {
  std::ostringstream out;
  out << "t,push";
  for (double t_req : params.t_req_columns) out << ",pull_treq_" << t_req;
  out << "\n";
  out.setf(std::ios::fixed);
  out.precision(2);
  for (const auto& row : table1(params)) {
    out << row.t << "," << 100 * row.push;
    for (double v : row.pull) out << "," << 100 * v;
    out << "\n";
  }
  return out.str();
}

}  // namespace dbpaisa
