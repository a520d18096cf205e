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

#ifndef DBPAISA_EVAL_ANALYTICS_H_
#define DBPAISA_EVAL_ANALYTICS_H_

#include <cstddef>
#include <string>
#include <vector>

namespace dbpaisa {

// Closed-form CPU and bandwidth models. All times are in seconds and all
// fractions are in [0, 1].

struct CostModel {
  double t_ann = 0.235;
  double t_res = 0.233;
  double t_att_exec = 0.001;
};

struct ScenarioModel {
  double crowded_hours = 16;        // per day
  double crowded_t_req = 10;        // gap between requests while crowded
  double offpeak_per_hour = 10;     // request rate outside crowded hours
  double t_gen = 1;
  double t_ann = 1;
};

// Exclusive: t / T. Inclusive: t / (T + t).
enum class UbusyForm { kExclusive, kInclusive };

double ubusy_push(const CostModel& model, double t_ann_interval, UbusyForm form);
// Periodic pull with requests every `t_req`; a response cannot be issued more
// often than once per `t_gen`.
double ubusy_pull(const CostModel& model, double t_req, UbusyForm form, double t_gen = 0);
// Continuous requests: T_req = T_gen.
double ubusy_pull_worst(const CostModel& model, double t_gen, UbusyForm form);
// Day-averaged pull fraction under the scenario's crowded/off-peak split.
double ubusy_pull_day(const CostModel& model, const ScenarioModel& scenario,
                      UbusyForm form);

struct MessageSizes {
  size_t announcement = 128;
  size_t request = 18;
  size_t response_single = 114;  // one pooled nonce
  size_t per_nonce = 12;
};

double bandwidth_push(const MessageSizes& sizes, double t_ann_interval);  // bits/s
// Day-averaged bits per second for a pull device. Retransmissions excluded.
double bandwidth_pull(const ScenarioModel& scenario, const MessageSizes& sizes);

enum class BandwidthMode { kPush, kPull };
double bandwidth(const ScenarioModel& scenario, BandwidthMode mode,
                 const MessageSizes& sizes = {});

struct Table1Row {
  double t;                   // T_ann for push, T_gen for pull
  double push;
  std::vector<double> pull;   // one per requested T_req
};

struct Table1Params {
  CostModel model;
  UbusyForm form = UbusyForm::kInclusive;
  std::vector<double> periods{1, 2, 3, 4, 5};
  std::vector<double> t_req_columns{1, 5, 10, 30};
  ScenarioModel scenario;  // crowded_t_req and t_gen are overridden per cell
};

std::vector<Table1Row> table1(const Table1Params& params);
// Percentages with two decimals.
std::string table1_csv(const Table1Params& params);

}  // namespace dbpaisa

#endif  // DBPAISA_EVAL_ANALYTICS_H_
