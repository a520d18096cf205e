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

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dbpaisa/eval_analytics.h"
#include "dbpaisa/hex.h"
#include "dbpaisa/im_protocol.h"
#include "dbpaisa/key_retrieval.h"
#include "dbpaisa/registration.h"
#include "dbpaisa/scenario.h"
#include "dbpaisa/wire.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace dbpaisa {
namespace {

constexpr const char* kConfigDirEnv = "DBPAISA_CONFIG_DIR";

// Relative config paths that do not exist locally are looked up in the
// directory named by DBPAISA_CONFIG_DIR.
fs::path ResolveConfig(const std::string& name) {
  fs::path p(name);
  if (fs::exists(p) || p.is_absolute()) return p;
  if (const char* dir = std::getenv(kConfigDirEnv)) {
    fs::path alt = fs::path(dir) / p;
    if (fs::exists(alt)) return alt;
  }
  return p;
}

void Emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  if (out.find('/') != std::string::npos) fs::create_directories(fs::path(out).parent_path());
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

std::string Dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json ManifestJson(const Manifest& m) {
  return {{"device_type", m.device_type},
          {"sensors_actuators", m.sensors_actuators},
          {"software_version", m.software_version},
          {"coarse_location", m.coarse_location},
          {"full_url", m.full_url},
          {"manufacturer", m.mfr_certificate.subject}};
}

// ---- provision ----

struct ProvisionArgs {
  uint64_t seed = 1;
  size_t devices = 4;
  size_t im_devices = 0;
  std::string manufacturer = "Acme Devices";
  std::string out = "provisioned";
};

int Provision(const ProvisionArgs& a) {
  Rng rng(a.seed);
  Manufacturer mfr = make_manufacturer(a.manufacturer, rng);
  ManifestStore store;
  TrustStore trust;
  trust.Add(mfr.name, mfr.keys.public_key);
  ordered_json devices = ordered_json::array();
  for (size_t i = 0; i < a.devices; ++i) {
    DeviceDescriptor d;
    d.subject = "device-" + std::to_string(i);
    d.device_type = "camera";
    d.sensors_actuators = {"image sensor", "microphone"};
    d.software_version = "1.0";
    d.coarse_location = "room " + std::to_string(100 + i);
    d.full_url = "https://manifests.example/" + d.subject;
    d.software_image = random_bytes(1024, rng);
    DeviceProvisioningRecord rec = provision_db_device(mfr, d, {}, store, rng);
    devices.push_back({{"subject", d.subject},
                       {"url", rec.url.str()},
                       {"public_key", to_hex(rec.keys.public_key.bytes)},
                       {"software_hash", to_hex(rec.software_hash.bytes)}});
  }
  fs::path out(a.out);
  fs::create_directories(out / "manifests");
  store.Save(out / "manifests");
  trust.Save(out / "trust.json");
  Emit(Dump(devices), (out / "devices.json").string());
  if (a.im_devices > 0) {
    SigningKeyPair owner = generate_keypair(rng);
    OwnerKeyTable table;
    for (size_t i = 0; i < a.im_devices; ++i) {
      DeviceId id{};
      rng.Fill(id);
      provision_im_device(owner.public_key, id, random_bytes(1024, rng), table, rng);
    }
    table.Save(out / "owner_keys.bin");
  }
  std::cout << "provisioned " << a.devices << " devices"
            << (a.im_devices ? " and " + std::to_string(a.im_devices) + " IM devices" : "")
            << " into " << out.string() << "\n";
  return 0;
}

// ---- scan ----

struct ScanArgs {
  uint64_t seed = 1;
  size_t devices = 5;
  double window = 10;
  std::string out;
};

int Scan(const ScanArgs& a) {
  ScenarioConfig cfg;
  cfg.seed = a.seed;
  DeviceGroup dev;
  dev.count = a.devices;
  cfg.devices.push_back(dev);
  UserGroup user;
  user.arrival.model = sim::Arrival::Model::kBurst;
  user.arrival.burst_count = 1;
  user.arrival.start = from_seconds(1);
  user.scan_window = from_seconds(a.window);
  cfg.users.push_back(user);
  cfg.horizon = from_seconds(1 + a.window);
  ScenarioRun run = build_scenario(cfg);
  run.world->RunUntil(cfg.horizon);
  const UserAgent& agent = run.world->node<sim::UserNode>(run.users[0]).agent();
  std::string lines;
  for (const DeviceReport& r : agent.reports()) {
    ordered_json j = {{"url", r.url.str()},
                      {"verified", r.verified},
                      {"source", to_string(r.source)},
                      {"att_result", r.att_result == AttResult::kSuccess ? "success" : "fail"},
                      {"att_age_s", r.att_age},
                      {"received_at_s", to_seconds(r.received_at)},
                      {"manifest", ManifestJson(r.manifest)}};
    lines += j.dump() + "\n";
  }
  Emit(lines, a.out);
  return 0;
}

// ---- scenario run ----

struct RunArgs {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::string format = "json";
  size_t sweep = 0;
};

std::string RenderRun(const ScenarioConfig& cfg, const std::string& format) {
  ScenarioRun run = build_scenario(cfg);
  run.world->RunUntil(cfg.horizon);
  ordered_json report = run_report(cfg, run);
  if (cfg.output_json) Emit(Dump(report), *cfg.output_json);
  if (cfg.output_csv) Emit(run.world->MetricsCsv(), *cfg.output_csv);
  return format == "csv" ? run.world->MetricsCsv() : Dump(report);
}

int ScenarioRunCmd(const RunArgs& a) {
  ScenarioConfig base = load_scenario(ResolveConfig(a.config));
  if (a.seed) base.seed = *a.seed;
  if (a.sweep == 0) {
    Emit(RenderRun(base, a.format), a.out);
    return 0;
  }
  // Independent runs over consecutive seeds; each builds its own world.
  // File outputs named in the config are suppressed so runs do not collide.
  const std::string ext = a.format == "csv" ? ".csv" : ".json";
  std::vector<std::string> results(a.sweep);
  std::vector<std::string> errors(a.sweep);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(a.sweep); ++i) {
    ScenarioConfig cfg = base;
    cfg.seed = base.seed + static_cast<uint64_t>(i);
    cfg.output_json.reset();
    cfg.output_csv.reset();
    try {
      results[i] = RenderRun(cfg, a.format);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (size_t i = 0; i < a.sweep; ++i) {
    if (!errors[i].empty()) throw std::runtime_error(errors[i]);
    uint64_t seed = base.seed + i;
    if (a.out.empty()) {
      std::cout << results[i];
    } else {
      fs::create_directories(a.out);
      Emit(results[i], (fs::path(a.out) / ("seed-" + std::to_string(seed) + ext)).string());
    }
  }
  return 0;
}

// ---- analytic ----

UbusyForm ParseForm(const std::string& s) {
  return s == "exclusive" ? UbusyForm::kExclusive : UbusyForm::kInclusive;
}

struct AnalyticArgs {
  std::string form = "inclusive";
  std::string mode = "push";
  double t = 1;
  double t_gen = 0;
  std::vector<double> periods{1, 2, 3, 4, 5};
  std::vector<double> columns{1, 5, 10, 30};
  double t_ann = 0.235;
  double t_res = 0.233;
  double t_att = 0.001;
  std::string out;
  std::string format = "csv";
};

CostModel Costs(const AnalyticArgs& a) { return CostModel{a.t_ann, a.t_res, a.t_att}; }

int Ubusy(const AnalyticArgs& a) {
  CostModel m = Costs(a);
  UbusyForm f = ParseForm(a.form);
  double v = 0;
  if (a.mode == "push") v = ubusy_push(m, a.t, f);
  else if (a.mode == "pull") v = ubusy_pull(m, a.t, f, a.t_gen);
  else if (a.mode == "pull-worst") v = ubusy_pull_worst(m, a.t_gen, f);
  else if (a.mode == "pull-day") v = ubusy_pull_day(m, ScenarioModel{}, f);
  else throw CLI::ValidationError("--mode", "unknown mode " + a.mode);
  if (a.format == "json") {
    Emit(Dump({{"mode", a.mode}, {"form", a.form}, {"t", a.t}, {"ubusy", v}}), a.out);
  } else {
    std::ostringstream s;
    s << "mode,form,t,ubusy\n" << a.mode << "," << a.form << "," << a.t << "," << v << "\n";
    Emit(s.str(), a.out);
  }
  return 0;
}

int Bandwidth(const AnalyticArgs& a) {
  MessageSizes sizes;
  ScenarioModel scenario;
  double push = bandwidth_push(sizes, a.t);
  double pull = bandwidth_pull(scenario, sizes);
  if (a.format == "json") {
    Emit(Dump({{"t_ann", a.t}, {"push_bps", push}, {"pull_bps", pull}}), a.out);
  } else {
    std::ostringstream s;
    s << "t_ann,push_bps,pull_bps\n" << a.t << "," << push << "," << pull << "\n";
    Emit(s.str(), a.out);
  }
  return 0;
}

int Table1Cmd(const AnalyticArgs& a) {
  Table1Params p;
  p.model = Costs(a);
  p.periods = a.periods;
  p.t_req_columns = a.columns;
  std::string text;
  for (UbusyForm f : {UbusyForm::kInclusive, UbusyForm::kExclusive}) {
    if (a.form != "both" && ParseForm(a.form) != f) continue;
    p.form = f;
    if (a.form == "both") text += f == UbusyForm::kInclusive ? "# inclusive\n" : "# exclusive\n";
    text += table1_csv(p);
  }
  Emit(text, a.out);
  return 0;
}

// ---- lkh demo ----

struct LkhArgs {
  size_t n = 16;
  size_t p = 2;
  uint64_t seed = 1;
  std::string out;
};

int LkhDemo(const LkhArgs& a) {
  Rng rng(a.seed);
  KeyTree tree(a.n, a.p, rng);
  size_t target = rng.Below(a.n);
  Nonce nonce;
  rng.Fill(nonce.bytes);
  auto keys = device_key_vector(tree, target);
  auto header = build_header(keys, nonce);
  LkhResult r = retrieve_lkh(tree, header, nonce);
  StorageCounts c = storage_counts(tree);
  ordered_json j = {
      {"n", a.n},
      {"p", a.p},
      {"seed", a.seed},
      {"tree", {{"depth", tree.depth()},
                {"leaf_count", tree.leaf_count()},
                {"node_count", tree.node_count()},
                {"dummy_leaves", tree.leaf_count() - a.n}}},
      {"trace", {{"device", target},
                 {"owner_nonce", to_hex(nonce.bytes)},
                 {"header_levels", header.size()},
                 {"path", r.path},
                 {"found", r.device ? ordered_json(*r.device) : ordered_json(nullptr)},
                 {"prf_evals", r.prf_evals}}},
      {"storage", {{"device_keys", c.device_keys},
                   {"owner_keys", c.owner_keys},
                   {"header_bytes", c.header_bytes}}}};
  Emit(Dump(j), a.out);
  return r.device == target ? 0 : 1;
}

// ---- im solicit ----

struct SolicitArgs {
  uint64_t seed = 1;
  size_t devices = 8;
  bool lkh = false;
  size_t arity = 2;
  std::string retrieval = "naive";
  std::string keys_out;
  std::string out;
};

int Solicit(const SolicitArgs& a) {
  Rng rng(a.seed);
  ImFleetOptions opt;
  opt.devices = a.devices;
  opt.lkh = a.lkh;
  opt.arity = a.arity;
  ImFleet fleet = make_im_fleet(opt, rng);
  if (a.retrieval == "parallel") fleet.owner->set_mode(RetrievalMode::kNaiveParallel);
  if (!a.keys_out.empty()) fleet.owner->table().Save(a.keys_out);
  Bytes req = fleet.owner->MakeRequest();
  std::string lines;
  SimTime now = from_seconds(1);
  for (ImDevice& d : fleet.devices) {
    auto em = d.OnFrame(req, now);
    if (!em) continue;
    OwnerResult res = fleet.owner->Receive(em->frame);
    ordered_json j;
    if (auto* rc = std::get_if<OwnerReceipt>(&res)) {
      j = {{"device_id", to_hex(rc->device_id)},
           {"att_result", rc->att_result == AttResult::kSuccess ? "success" : "fail"},
           {"type_code", rc->info.type_code},
           {"software_version", rc->info.software_version},
           {"key_trials", rc->key_trials},
           {"frame_bytes", em->frame.size()},
           {"ready_at_s", to_seconds(em->ready_at)}};
    } else {
      j = {{"rejected", to_string(std::get<OwnerReject>(res))}};
    }
    lines += j.dump() + "\n";
  }
  Emit(lines, a.out);
  return 0;
}

// ---- wire decode ----

struct WireArgs {
  std::string hex;
  std::string file;
};

int WireDecode(const WireArgs& a) {
  Bytes bytes;
  if (!a.file.empty()) {
    std::ifstream f(a.file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + a.file);
    bytes.assign(std::istreambuf_iterator<char>(f), {});
  } else {
    auto parsed = from_hex(a.hex);
    if (!parsed) {
      std::cerr << "error: input is not valid hex\n";
      return 2;
    }
    bytes = *parsed;
  }
  try {
    WireMessage m = decode(bytes);
    std::cout << describe(m);
    if (auto* r = std::get_if<ResponseMsg>(&m)) {
      std::cout << "signed region: " << to_hex(signed_region(*r)) << "\n";
    } else if (auto* n = std::get_if<AnnouncementMsg>(&m)) {
      std::cout << "signed region: " << to_hex(signed_region(*n)) << "\n";
    } else if (auto* q = std::get_if<ImRequestMsg>(&m)) {
      std::cout << "signed region: " << to_hex(signed_region(*q)) << "\n";
    }
    return 0;
  } catch (const WireError& e) {
    std::cerr << "error: " << to_string(e.kind()) << " at byte offset " << e.offset() << ": "
              << e.what() << "\n";
    return 1;
  }
}

}  // namespace
}  // namespace dbpaisa

int main(int argc, char** argv) {
  using namespace dbpaisa;
  CLI::App app{"DB-PAISA / IM-PAISA protocol engine and broadcast simulator"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  ProvisionArgs pa;
  auto* prov = app.add_subcommand("provision", "Provision DB devices; write manifest store and trust file");
  prov->add_option("--seed", pa.seed)->required();
  prov->add_option("--devices", pa.devices);
  prov->add_option("--im-devices", pa.im_devices, "Also write an owner key table");
  prov->add_option("--manufacturer", pa.manufacturer);
  prov->add_option("--out", pa.out, "Output directory");

  ScanArgs sa;
  auto* scan = app.add_subcommand("scan", "One user scan against simulated devices, JSON lines");
  scan->add_option("--seed", sa.seed)->required();
  scan->add_option("--devices", sa.devices);
  scan->add_option("--window", sa.window, "Scan window in seconds");
  scan->add_option("--out", sa.out);

  RunArgs ra;
  auto* scen = app.add_subcommand("scenario", "Scenario execution");
  scen->require_subcommand(1);
  auto* run = scen->add_subcommand("run", "Run a scenario config");
  run->add_option("--config", ra.config, "Config file; relative names also searched in $DBPAISA_CONFIG_DIR")
      ->required();
  run->add_option("--seed", ra.seed, "Override the config seed");
  run->add_option("--out", ra.out, "Output file, or directory with --sweep");
  run->add_option("--format", ra.format)->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--sweep", ra.sweep, "Run this many consecutive seeds in parallel");

  AnalyticArgs aa;
  auto* an = app.add_subcommand("analytic", "Closed-form busy-time and bandwidth models");
  an->require_subcommand(1);
  auto add_costs = [&](CLI::App* c) {
    c->add_option("--t-ann-cost", aa.t_ann, "Announcement cost, seconds");
    c->add_option("--t-res-cost", aa.t_res, "Response cost, seconds");
    c->add_option("--t-att-cost", aa.t_att, "Attestation cost, seconds");
    c->add_option("--out", aa.out);
  };
  auto* ub = an->add_subcommand("ubusy", "Busy fraction for one setting");
  ub->add_option("--mode", aa.mode)->check(CLI::IsMember({"push", "pull", "pull-worst", "pull-day"}));
  ub->add_option("--t", aa.t, "Announcement interval or request interval, seconds");
  ub->add_option("--t-gen", aa.t_gen);
  ub->add_option("--form", aa.form)->check(CLI::IsMember({"inclusive", "exclusive"}));
  ub->add_option("--format", aa.format)->check(CLI::IsMember({"json", "csv"}));
  add_costs(ub);
  auto* bw = an->add_subcommand("bandwidth", "Push and pull bandwidth in bits per second");
  bw->add_option("--t", aa.t, "Announcement interval, seconds");
  bw->add_option("--format", aa.format)->check(CLI::IsMember({"json", "csv"}));
  bw->add_option("--out", aa.out);
  auto* t1 = an->add_subcommand("table1", "Busy-fraction grid as CSV");
  t1->add_option("--form", aa.form)->check(CLI::IsMember({"inclusive", "exclusive", "both"}));
  t1->add_option("--periods", aa.periods)->delimiter(',');
  t1->add_option("--columns", aa.columns, "Pull request intervals")->delimiter(',');
  add_costs(t1);

  LkhArgs la;
  auto* lkh = app.add_subcommand("lkh", "Key hierarchy tools");
  lkh->require_subcommand(1);
  auto* demo = lkh->add_subcommand("demo", "Tree stats, a sample walk and storage counts");
  demo->add_option("--n", la.n)->required();
  demo->add_option("--p", la.p)->required();
  demo->add_option("--seed", la.seed)->required();
  demo->add_option("--out", la.out);

  SolicitArgs ia;
  auto* im = app.add_subcommand("im", "Owner-side IM tools");
  im->require_subcommand(1);
  auto* sol = im->add_subcommand("solicit", "One request/response round against a simulated fleet");
  sol->add_option("--seed", ia.seed)->required();
  sol->add_option("--devices", ia.devices);
  sol->add_flag("--lkh", ia.lkh);
  sol->add_option("--arity", ia.arity);
  sol->add_option("--retrieval", ia.retrieval)->check(CLI::IsMember({"naive", "parallel"}));
  sol->add_option("--keys-out", ia.keys_out, "Write the owner key table here");
  sol->add_option("--out", ia.out);

  WireArgs wa;
  auto* wire = app.add_subcommand("wire", "Wire-format debugging");
  wire->require_subcommand(1);
  auto* dec = wire->add_subcommand("decode", "Parse a frame and print its fields");
  auto* hex_opt = dec->add_option("--hex", wa.hex);
  auto* file_opt = dec->add_option("--file", wa.file);
  hex_opt->excludes(file_opt);
  dec->require_option(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prov) return Provision(pa);
    if (*scan) return Scan(sa);
    if (*run) return ScenarioRunCmd(ra);
    if (*ub) return Ubusy(aa);
    if (*bw) return Bandwidth(aa);
    if (*t1) return Table1Cmd(aa);
    if (*demo) return LkhDemo(la);
    if (*sol) return Solicit(ia);
    if (*dec) return WireDecode(wa);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
