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

#include "dbpaisa/scenario.h"

#include <fstream>
#include <set>

namespace dbpaisa {

using nlohmann::ordered_json;

namespace {

// Strict view over one JSON object: every key must be consumed or known.
class Reader {
 public:
  Reader(const ordered_json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  void Allow(std::initializer_list<const char*> keys) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!allowed.count(it.key())) {
        throw ConfigError(where_ + ": unknown key \"" + it.key() + "\"");
      }
    }
  }

  bool Has(const char* key) const { return j_.contains(key); }
  const ordered_json& Raw(const char* key) const { return j_.at(key); }
  std::string Path(const char* key) const { return where_ + "." + key; }

  double Number(const char* key, double fallback) const {
    if (!Has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(Path(key) + ": expected a number");
    return v.get<double>();
  }
  double NonNegative(const char* key, double fallback) const {
    double v = Number(key, fallback);
    if (v < 0) throw ConfigError(Path(key) + ": must be >= 0");
    return v;
  }
  double Positive(const char* key, double fallback) const {
    double v = Number(key, fallback);
    if (!(v > 0)) throw ConfigError(Path(key) + ": must be > 0");
    return v;
  }
  uint64_t Count(const char* key, uint64_t fallback) const {
    if (!Has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
      throw ConfigError(Path(key) + ": expected a non-negative integer");
    }
    return v.get<uint64_t>();
  }
  bool Bool(const char* key, bool fallback) const {
    if (!Has(key)) return fallback;
    if (!j_.at(key).is_boolean()) throw ConfigError(Path(key) + ": expected a boolean");
    return j_.at(key).get<bool>();
  }
  std::string String(const char* key, const std::string& fallback) const {
    if (!Has(key)) return fallback;
    if (!j_.at(key).is_string()) throw ConfigError(Path(key) + ": expected a string");
    return j_.at(key).get<std::string>();
  }
  SimTime Seconds(const char* key, SimTime fallback) const {
    return Has(key) ? from_seconds(NonNegative(key, 0)) : fallback;
  }

 private:
  const ordered_json& j_;
  std::string where_;
};

DeviceMode ParseMode(const std::string& s, const std::string& where) {
  if (s == "pull") return DeviceMode::kPull;
  if (s == "push") return DeviceMode::kPush;
  if (s == "blend") return DeviceMode::kBlend;
  throw ConfigError(where + ": mode must be pull, push or blend");
}

sim::LinkConfig ParseLink(const ordered_json& j) {
  Reader r(j, "link");
  r.Allow({"p_loss", "latency_min_ms", "latency_max_ms", "randomize_addresses",
           "retransmit_count", "retransmit_gap_ms", "manifest_fetch_delay"});
  sim::LinkConfig link;
  link.p_loss = r.NonNegative("p_loss", link.p_loss);
  link.latency_min = from_seconds(r.NonNegative("latency_min_ms", 1) / 1000);
  link.latency_max = from_seconds(r.NonNegative("latency_max_ms", 10) / 1000);
  link.randomize_addresses = r.Bool("randomize_addresses", link.randomize_addresses);
  link.retransmit_count = static_cast<int>(r.Count("retransmit_count", 10));
  link.retransmit_gap = from_seconds(r.NonNegative("retransmit_gap_ms", 30) / 1000);
  link.manifest_fetch_delay = r.Seconds("manifest_fetch_delay", link.manifest_fetch_delay);
  try {
    sim::validate(link);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("link: ") + e.what());
  }
  return link;
}

DeviceGroup ParseDevice(const ordered_json& j, const std::string& where,
                        DeviceMode default_mode) {
  Reader r(j, where);
  r.Allow({"count", "t_att", "t_gen", "pool_max", "t_res", "t_att_exec", "mode",
           "push_interval", "blend", "random_deletion", "announcement_pad", "tamper_at",
           "domain"});
  DeviceGroup g;
  g.count = r.Count("count", 1);
  g.params.t_att = from_seconds(r.Positive("t_att", 300));
  g.params.t_gen = r.Seconds("t_gen", g.params.t_gen);
  g.params.pool_max = r.Count("pool_max", g.params.pool_max);
  g.t_res = r.Seconds("t_res", g.t_res);
  g.t_att_exec = r.Seconds("t_att_exec", g.t_att_exec);
  g.mode = r.Has("mode") ? ParseMode(r.String("mode", ""), r.Path("mode")) : default_mode;
  g.push_interval = from_seconds(r.Positive("push_interval", 1));
  g.announcement_pad = r.Count("announcement_pad", 0);
  if (g.announcement_pad > kMaxFrameBytes) {
    throw ConfigError(r.Path("announcement_pad") + ": exceeds the frame budget");
  }
  if (r.Has("tamper_at")) g.tamper_at = r.Seconds("tamper_at", SimTime{0});
  g.domain = static_cast<int>(r.Count("domain", 0));
  if (r.Has("blend")) {
    Reader b(r.Raw("blend"), r.Path("blend"));
    b.Allow({"switch_threshold", "window", "push_period", "announce_interval"});
    g.blend.switch_threshold = b.Count("switch_threshold", g.blend.switch_threshold);
    g.blend.window = from_seconds(b.Positive("window", 5));
    g.blend.push_period = from_seconds(b.Positive("push_period", 30));
    g.blend.announce_interval = from_seconds(b.Positive("announce_interval", 5));
  }
  if (r.Has("random_deletion")) {
    Reader d(r.Raw("random_deletion"), r.Path("random_deletion"));
    d.Allow({"enabled", "cap"});
    g.deletion.enabled = d.Bool("enabled", true);
    g.deletion.cap = d.Count("cap", 0);
  }
  try {
    validate(g.params);
    if (g.mode == DeviceMode::kBlend) validate(g.blend);
  } catch (const ParameterError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return g;
}

sim::Arrival ParseArrival(const ordered_json& j, const std::string& where) {
  Reader r(j, where);
  std::string model = r.String("model", "none");
  sim::Arrival a;
  if (model == "none") {
    r.Allow({"model"});
    return a;
  }
  if (model == "periodic") {
    r.Allow({"model", "period", "start", "stop"});
    a.model = sim::Arrival::Model::kPeriodic;
    a.period = from_seconds(r.Positive("period", 10));
  } else if (model == "poisson") {
    r.Allow({"model", "rate_per_hour", "start", "stop"});
    a.model = sim::Arrival::Model::kPoisson;
    a.rate_per_hour = r.Positive("rate_per_hour", 10);
  } else if (model == "burst") {
    r.Allow({"model", "count", "spacing", "start", "stop"});
    a.model = sim::Arrival::Model::kBurst;
    a.burst_count = r.Count("count", 1);
    a.burst_spacing = r.Seconds("spacing", a.burst_spacing);
  } else {
    throw ConfigError(where + ".model: expected none, periodic, poisson or burst");
  }
  a.start = r.Seconds("start", a.start);
  if (r.Has("stop")) a.stop = r.Seconds("stop", SimTime{0});
  return a;
}

UserGroup ParseUser(const ordered_json& j, const std::string& where) {
  Reader r(j, where);
  r.Allow({"count", "arrival", "scan_window", "accept_announcements", "domain"});
  UserGroup g;
  g.count = r.Count("count", 1);
  if (r.Has("arrival")) g.arrival = ParseArrival(r.Raw("arrival"), r.Path("arrival"));
  g.scan_window = r.Seconds("scan_window", g.scan_window);
  g.accept_announcements = r.Bool("accept_announcements", true);
  g.domain = static_cast<int>(r.Count("domain", 0));
  return g;
}

AdversaryGroup ParseAdversary(const ordered_json& j, const std::string& where) {
  Reader r(j, where);
  r.Allow({"behavior", "rate", "start", "stop", "replay_at", "record_until", "domain"});
  AdversaryGroup g;
  std::string b = r.String("behavior", "");
  if (b == "flood") g.config.behavior = sim::Behavior::kFlood;
  else if (b == "replay") g.config.behavior = sim::Behavior::kReplay;
  else if (b == "forge-response") g.config.behavior = sim::Behavior::kForgeResponse;
  else if (b == "forge-request") g.config.behavior = sim::Behavior::kForgeRequest;
  else if (b == "eavesdrop") g.config.behavior = sim::Behavior::kEavesdrop;
  else throw ConfigError(where + ".behavior: unknown behavior \"" + b + "\"");
  g.config.rate = r.Positive("rate", 1);
  g.config.start = r.Seconds("start", SimTime{0});
  if (r.Has("stop")) g.config.stop = r.Seconds("stop", SimTime{0});
  if (r.Has("record_until")) g.config.record_until = r.Seconds("record_until", SimTime{0});
  if (r.Has("replay_at")) {
    const auto& arr = r.Raw("replay_at");
    if (!arr.is_array()) throw ConfigError(r.Path("replay_at") + ": expected an array");
    for (const auto& v : arr) {
      if (!v.is_number() || v.get<double>() < 0) {
        throw ConfigError(r.Path("replay_at") + ": expected non-negative seconds");
      }
      g.config.replay_at.push_back(from_seconds(v.get<double>()));
    }
  }
  g.domain = static_cast<int>(r.Count("domain", 0));
  return g;
}

ImSection ParseIm(const ordered_json& j) {
  Reader r(j, "im");
  r.Allow({"devices", "lkh", "arity", "rounds", "start", "interval", "t_res", "t_verify",
           "retrieval", "domain"});
  ImSection s;
  s.fleet.devices = r.Count("devices", 10);
  s.fleet.lkh = r.Bool("lkh", false);
  s.fleet.arity = r.Count("arity", 2);
  s.fleet.t_res = r.Seconds("t_res", s.fleet.t_res);
  s.fleet.t_verify = r.Seconds("t_verify", s.fleet.t_verify);
  s.schedule.rounds = r.Count("rounds", 1);
  s.schedule.start = r.Seconds("start", s.schedule.start);
  s.schedule.interval = from_seconds(r.Positive("interval", 1));
  std::string mode = r.String("retrieval", s.fleet.lkh ? "lkh" : "naive");
  if (mode == "naive") s.retrieval = RetrievalMode::kNaive;
  else if (mode == "naive-parallel") s.retrieval = RetrievalMode::kNaiveParallel;
  else if (mode == "lkh") s.retrieval = RetrievalMode::kLkh;
  else throw ConfigError("im.retrieval: expected naive, naive-parallel or lkh");
  if (s.retrieval == RetrievalMode::kLkh && !s.fleet.lkh) {
    throw ConfigError("im.retrieval: lkh retrieval needs \"lkh\": true");
  }
  if (s.fleet.lkh && (s.fleet.devices < 2 || s.fleet.arity < 2)) {
    throw ConfigError("im: lkh needs at least two devices and arity >= 2");
  }
  s.domain = static_cast<int>(r.Count("domain", 0));
  return s;
}

template <typename T, typename F>
std::vector<T> ParseList(const Reader& r, const char* key, F parse) {
  std::vector<T> out;
  if (!r.Has(key)) return out;
  const auto& arr = r.Raw(key);
  if (!arr.is_array()) throw ConfigError(std::string(key) + ": expected an array");
  for (size_t i = 0; i < arr.size(); ++i) {
    out.push_back(parse(arr[i], std::string(key) + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

ScenarioConfig parse_scenario(const ordered_json& doc) {
  Reader r(doc, "scenario");
  r.Allow({"seed", "horizon", "mode", "link", "devices", "users", "adversaries", "im",
           "output"});
  if (!r.Has("seed")) throw ConfigError("scenario: \"seed\" is required");
  ScenarioConfig c;
  c.source = doc;
  c.seed = r.Count("seed", 0);
  c.horizon = from_seconds(r.Positive("horizon", 3600));
  c.mode = r.String("mode", "db");
  if (c.mode != "db" && c.mode != "im" && c.mode != "blend") {
    throw ConfigError("scenario.mode: expected db, im or blend");
  }
  if (r.Has("link")) c.link = ParseLink(r.Raw("link"));
  DeviceMode default_mode = c.mode == "blend" ? DeviceMode::kBlend : DeviceMode::kPull;
  c.devices = ParseList<DeviceGroup>(r, "devices", [&](const auto& j, const std::string& w) {
    return ParseDevice(j, w, default_mode);
  });
  c.users = ParseList<UserGroup>(r, "users", ParseUser);
  c.adversaries = ParseList<AdversaryGroup>(r, "adversaries", ParseAdversary);
  if (r.Has("im")) c.im = ParseIm(r.Raw("im"));
  if (c.mode == "im" && !c.im) throw ConfigError("scenario: mode im needs an \"im\" section");
  if (c.mode != "im" && c.im) throw ConfigError("scenario: \"im\" section needs mode im");
  if (r.Has("output")) {
    Reader o(r.Raw("output"), "output");
    o.Allow({"json", "csv"});
    if (o.Has("json")) c.output_json = o.String("json", "");
    if (o.Has("csv")) c.output_csv = o.String("csv", "");
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file.string());
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

ScenarioRun build_scenario(const ScenarioConfig& config) {
  ScenarioRun run;
  run.world = std::make_unique<sim::World>(config.seed, config.link);
  run.shared = std::make_shared<sim::Shared>();
  sim::World& w = *run.world;
  Rng prov = Rng::Derive(config.seed, 0x70726f76);

  if (!config.devices.empty()) {
    Manufacturer mfr = make_manufacturer("scenario-mfr", prov);
    run.shared->trust.Add(mfr.name, mfr.keys.public_key);
    size_t index = 0;
    for (const auto& g : config.devices) {
      for (size_t k = 0; k < g.count; ++k, ++index) {
        DeviceDescriptor d;
        d.subject = "device-" + std::to_string(index);
        d.device_type = "sensor";
        d.sensors_actuators = {"temperature"};
        d.software_version = "1.0";
        d.coarse_location = "zone-" + std::to_string(g.domain);
        d.full_url = "https://manifests.example/" + d.subject;
        d.software_image = random_bytes(1024, prov);
        DeviceConfig dc;
        dc.provisioning = provision_db_device(mfr, d, g.params, run.shared->store, prov);
        dc.memory_image = d.software_image;
        dc.t_res = g.t_res;
        dc.t_att_exec = g.t_att_exec;
        dc.mode = g.mode;
        dc.push_interval = g.push_interval;
        dc.blend = g.blend;
        dc.deletion = g.deletion;
        sim::DbDeviceOptions opt{g.announcement_pad, g.tamper_at};
        run.devices.push_back(w.AddNode(std::make_unique<sim::DbDeviceNode>(dc, opt),
                                        d.subject, g.domain));
      }
    }
  }

  size_t user_index = 0;
  for (const auto& g : config.users) {
    for (size_t k = 0; k < g.count; ++k) {
      auto node = std::make_unique<sim::UserNode>(
          run.shared, g.arrival, RequestOptions{g.scan_window},
          ReceiveOptions{g.accept_announcements});
      run.users.push_back(
          w.AddNode(std::move(node), "user-" + std::to_string(user_index++), g.domain));
    }
  }

  if (config.im) {
    ImFleet fleet = make_im_fleet(config.im->fleet, prov);
    for (size_t i = 0; i < fleet.devices.size(); ++i) {
      run.devices.push_back(w.AddNode(std::make_unique<sim::ImDeviceNode>(std::move(fleet.devices[i])),
                                      "im-device-" + std::to_string(i), config.im->domain));
    }
    fleet.owner->set_mode(config.im->retrieval);
    run.owner = w.AddNode(
        std::make_unique<sim::OwnerNode>(std::move(fleet.owner), config.im->schedule), "owner",
        config.im->domain);
  }

  size_t adv_index = 0;
  for (const auto& g : config.adversaries) {
    run.adversaries.push_back(w.AddNode(std::make_unique<sim::AdversaryNode>(g.config),
                                        "adversary-" + std::to_string(adv_index++), g.domain));
  }
  return run;
}

ordered_json run_report(const ScenarioConfig& config, const ScenarioRun& run) {
  ordered_json report;
  report["tool_version"] = std::string(kToolVersion);
  report["config"] = config.source;
  ordered_json metrics = run.world->Metrics();

  bool busy_ok = true;
  uint64_t tx = 0, rx = 0;
  for (const auto& n : metrics["nodes"]) {
    if (n.contains("busy_s") && n["busy_s"].get<double>() > metrics["horizon_s"].get<double>()) {
      busy_ok = false;
    }
    tx += n["frames_tx"].get<uint64_t>();
    rx += n["frames_rx"].get<uint64_t>();
  }
  size_t nodes = run.world->node_count();
  ordered_json checks;
  checks["busy_within_horizon"] = busy_ok;
  checks["frames_rx_bounded_by_tx"] = rx <= tx * (nodes > 0 ? nodes - 1 : 0);
  report["checks"] = std::move(checks);
  report["metrics"] = std::move(metrics);
  return report;
}

ordered_json run_scenario(const ScenarioConfig& config) {
  ScenarioRun run = build_scenario(config);
  run.world->RunUntil(config.horizon);
  return run_report(config, run);
}

}  // namespace dbpaisa
