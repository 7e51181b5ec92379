#include "ops/simcore/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ops/onboard/autonomy.hpp"
#include "ops/onboard/planner.hpp"
#include "ops/simcore/environment.hpp"
#include "ops/simcore/ephemeris.hpp"
#include "ops/simcore/evr_codes.hpp"
#include "ops/simcore/instruments.hpp"
#include "ops/simcore/outcomes.hpp"

namespace ops::simcore {
namespace {

using onboard::Trigger;
using tasknet::ActivityKind;
using tasknet::EventKind;
using tasknet::Task;

constexpr double kEps = 1e-9;

std::string product_kind(ActivityKind k) {
  switch (k) {
    case ActivityKind::MapSwath: return "image.map";
    case ActivityKind::TargetedImage: return "image.targeted";
    case ActivityKind::SpectrometerObs: return "spectrum";
    case ActivityKind::MagSurvey: return "mag.survey";
    default: return "engineering";
  }
}

std::string fmt(double v) { return Json(v).dump(); }

struct Running {
  const Task* task = nullptr;
  std::string goal_id;
  double start = 0.0;
  double planned_end = 0.0;
  double actual_end = 0.0;
  double power_w = 0.0;
  double debited = 0.0;
  int attempt = 0;
  bool overrun_reported = false;
  bool storage_warned = false;
  onboard::ExposureParams exposure;
};

class Simulation {
 public:
  Simulation(const tasknet::TaskNetwork& net, const SimConfig& cfg, const ScenarioSample& sample)
      : net_(net),
        cfg_(cfg),
        params_(resolve(cfg, sample)),
        model_(planner_model(cfg, params_)),
        env_streams_(sample.seed),
        fault_rng_(sample.seed, "fault.camera_reset") {
    for (const auto& [k, v] : params_.all()) {
      if (k.rfind("task.", 0) != 0) continue;
      const auto id = k.substr(5, k.rfind('.') - 5);
      if (!net.tasks.count(id)) throw ConfigError("parameter \"" + k + "\" names unknown task \"" + id + "\"");
    }
    for (const auto& i : cfg.instruments) instruments_[i.id] = i;
    for (const auto& d : cfg.detectors) {
      detectors_.push_back(d);
      const std::string kind(onboard::to_string(d.detector.kind));
      detectors_.back().detector.p_fp = params_.get("detector." + kind + ".p_fp");
      detectors_.back().detector.p_fn = params_.get("detector." + kind + ".p_fn");
      detector_rngs_.emplace_back(sample.seed, "detector." + kind);
      detector_last_.push_back(0);
    }
    trace_.net_id = net.id;
    trace_.net_revision = net.revision;
    trace_.seed = sample.seed;
    trace_.horizon_s = cfg.horizon_s;

    state_.battery_wh = std::min(cfg.battery_capacity_wh, params_.get("battery.initial_wh"));
    state_.storage_mbit = cfg.storage_initial_mbit;
    state_.temperature_c = cfg.temperature_initial_c;
    for (const auto& i : cfg.instruments) state_.instrument_modes[i.id] = InstrumentMode::On;
    env_ = initial_environment(cfg, params_);
    reset_t_ = params_.get("fault.camera_reset.t_s");
    reset_rate_ = params_.get("fault.camera_reset.rate_per_s");
    noise_scale_ = params_.get("camera.noise_scale");

    if (cfg.flyby) {
      const auto& f = *cfg.flyby;
      ephemeris_ = hyperbolic_flyby(f.closest_approach_km, f.v_inf_km_s, f.t_closest_s, 0.0,
                                    cfg.horizon_s + f.step_s, f.step_s);
    } else if (cfg.ephemeris_csv) {
      ephemeris_ = Ephemeris::load_csv(*cfg.ephemeris_csv);
    }
  }

  SimTrace run() {
    const double dt = cfg_.dt_s;
    const long channel_every = std::max(1L, std::lround(cfg_.channel_period_s / dt));
    const long mag_every = std::max(1L, std::lround(cfg_.mag_window_s / dt));
    const long n_steps = std::lround(std::floor(cfg_.horizon_s / dt + kEps));

    auto initial = onboard::schedule(net_, state_, events_, cfg_.horizon_s, model_);
    plan_ = initial.timeline;
    log_decision(initial.record);

    record_mag_mode(0.0);
    for (long k = 0; k <= n_steps; ++k) {
      const double t = k * dt;
      state_.t = t;
      finish_due(t);
      check_overruns(t);
      check_camera(t, dt);
      check_power(t);
      run_detectors(k, t);
      apply_triggers(t);
      start_due(t);
      if (k > 0 && k % mag_every == 0) update_mag_mode(t);
      if (k % channel_every == 0) record_channels(t);
      if (k == n_steps) break;
      integrate(dt);
    }
    finalize();
    trace_.trace_hash = compute_trace_hash(trace_);
    return std::move(trace_);
  }

 private:
  void emit(double t, std::string_view code, std::map<std::string, std::string> args = {}) {
    trace_.evrs.push_back({t, evr::level_of(code), std::string(code), std::move(args)});
  }

  void log_decision(const onboard::DecisionRecord& r) {
    std::map<std::string, std::string> args{{"cycle", std::to_string(r.cycle)},
                                            {"trigger", std::string(onboard::to_string(r.trigger.kind))}};
    if (r.trigger.event) args["event"] = tasknet::to_string(*r.trigger.event);
    if (r.trigger.fault) args["fault"] = onboard::to_string(*r.trigger.fault);
    if (r.trigger.task_id) args["task"] = *r.trigger.task_id;
    emit(r.t, evr::kPlanUpdated, std::move(args));
    trace_.decisions.push_back(r);
  }

  double current_load() const {
    double load = params_.get("power.bus_load_w");
    for (const auto& [id, r] : running_) load += r.power_w;
    return load;
  }

  void record(const char* name, double t, double v) { trace_.channels[name].push_back({t, v}); }

  void record_channels(double t) {
    record(channel::kBattery, t, state_.battery_wh);
    record(channel::kStorage, t, state_.storage_mbit);
    record(channel::kTemperature, t, state_.temperature_c);
    record(channel::kMagField, t, env_.mag_field_nT);
    record(channel::kPowerLoad, t, current_load());
    if (ephemeris_) {
      const auto row = ephemeris_->at(t);
      const double dx = row.spacecraft[0] - row.triton[0], dy = row.spacecraft[1] - row.triton[1],
                   dz = row.spacecraft[2] - row.triton[2];
      record("triton_range_km", t, std::sqrt(dx * dx + dy * dy + dz * dz));
    }
  }

  void record_mag_mode(double t) { record(channel::kMagMode, t, mag_mode_ == onboard::MagMode::LosslessHighRate); }

  void update_mag_mode(double t) {
    double sum2 = 0.0;
    for (double x : mag_window_) sum2 += (x - env_.mag.mean_nT) * (x - env_.mag.mean_nT);
    const double var = mag_window_.empty() ? 0.0 : sum2 / static_cast<double>(mag_window_.size());
    mag_window_.clear();
    const auto mode = onboard::adapt_mag_mode(var, cfg_.mag_threshold_nT2);
    if (mode != mag_mode_) {
      emit(t, evr::kMagModeChanged, {{"mode", std::string(onboard::to_string(mode))}, {"variance_nT2", fmt(var)}});
      mag_mode_ = mode;
    }
    record_mag_mode(t);
  }

  void make_product(const Running& r, double t, double size, const std::string& suffix) {
    if (size <= 0.0) return;
    DataProduct p;
    p.id = r.task->id + "#" + std::to_string(r.attempt) + suffix;
    p.kind = product_kind(r.task->activity) + suffix;
    p.size_mbit = size;
    p.t_created = t;
    p.source_task = r.task->id;
    p.priority = net_.goals.count(r.goal_id) ? net_.goals.at(r.goal_id).priority : 0;
    trace_.products.push_back(p);
  }

  void finish(const std::string& id, double t) {
    Running r = running_.at(id);
    running_.erase(id);
    double size = r.debited;
    if (r.task->instrument && tasknet::is_imaging(r.task->activity) && instruments_.count(*r.task->instrument)) {
      const auto& inst = instruments_.at(*r.task->instrument);
      // The fault flag belongs to the resetting camera only.
      const bool masked = inst.id != cfg_.reset_instrument && state_.faults.erase(FaultFlag::CameraFault) > 0;
      try {
        auto obs = camera_observe(inst, state_, r.exposure, cfg_.storage_capacity_mbit, noise_scale_);
        if (masked) state_.faults.insert(FaultFlag::CameraFault);
        size += obs.product.size_mbit;
      } catch (const StorageFull&) {
        if (masked) state_.faults.insert(FaultFlag::CameraFault);
        emit(t, evr::kStorageFull, {{"task", id}});
      } catch (const InstrumentFaulted&) {
        if (masked) state_.faults.insert(FaultFlag::CameraFault);
        emit(t, evr::kTaskInterrupted, {{"task", id}, {"reason", "instrument_fault"}});
        make_product(r, t, size, ".partial");
        interrupted_.insert(id);
        return;
      }
    }
    make_product(r, t, size, "");
    emit(t, evr::kTaskEnd, {{"task", id}, {"goal", r.goal_id}});
    executed_.insert(id);
  }

  void interrupt(const std::string& id, double t, const std::string& reason) {
    Running r = running_.at(id);
    running_.erase(id);
    emit(t, evr::kTaskInterrupted, {{"task", id}, {"reason", reason}});
    make_product(r, t, r.debited, ".partial");
    interrupted_.insert(id);
  }

  void finish_due(double t) {
    std::vector<std::string> due;
    for (const auto& [id, r] : running_)
      if (r.actual_end <= t + kEps) due.push_back(id);
    for (const auto& id : due) finish(id, t);
  }

  void check_overruns(double t) {
    for (auto& [id, r] : running_) {
      if (r.overrun_reported || r.planned_end > t + kEps || r.actual_end <= t + kEps) continue;
      r.overrun_reported = true;
      emit(t, evr::kTaskOverrun, {{"task", id}, {"expected_end", fmt(r.actual_end)}});
      triggers_.push_back(Trigger::overrun(id, r.actual_end));
    }
  }

  void check_camera(double t, double dt) {
    const InstrumentId cam = cfg_.reset_instrument;
    if (camera_resetting_ && t + kEps >= state_.unavailable_until[cam]) {
      camera_resetting_ = false;
      state_.faults.erase(FaultFlag::CameraFault);
      state_.instrument_modes[cam] = InstrumentMode::On;
      emit(t, evr::kCameraRecovered, {{"instrument", std::string(tasknet::to_string(cam))}});
    }
    bool fire = false;
    if (!reset_fired_ && reset_t_ >= 0.0 && t + kEps >= reset_t_) {
      reset_fired_ = true;
      fire = true;
    }
    if (reset_rate_ > 0.0 && fault_rng_.bernoulli(-std::expm1(-reset_rate_ * dt))) fire = true;
    if (!fire || camera_resetting_) return;

    camera_resetting_ = true;
    state_.faults.insert(FaultFlag::CameraFault);
    state_.instrument_modes[cam] = InstrumentMode::Resetting;
    state_.unavailable_until[cam] = t + cfg_.reset_recovery_s;
    emit(t, evr::kCameraReset, {{"instrument", std::string(tasknet::to_string(cam))}});
    events_.insert(EventKind::CameraReset);

    Trigger trig = Trigger::instrument_fault(onboard::FaultKind::CameraReset, cam);
    for (const auto& [id, r] : running_) {
      if (r.task->instrument == cam) {
        trig.task_id = id;
        break;
      }
    }
    if (trig.task_id) interrupt(*trig.task_id, t, "camera_reset");
    triggers_.push_back(trig);
  }

  void check_power(double t) {
    if (state_.battery_wh >= cfg_.battery_floor_wh - kEps) return;
    const Running* victim = nullptr;
    for (const auto& [id, r] : running_) {
      if (r.task->activity == ActivityKind::EngineBurn || r.power_w <= 0.0) continue;
      if (!victim || r.power_w > victim->power_w) victim = &r;
    }
    if (!victim) return;
    const std::string id = victim->task->id;
    emit(t, evr::kPowerFdir, {{"task", id}, {"battery_wh", fmt(state_.battery_wh)}});
    interrupt(id, t, "power");
    triggers_.push_back(Trigger::task_fault(onboard::FaultKind::PowerOverdraw, id));
  }

  bool imaging_running() const {
    for (const auto& [id, r] : running_)
      if (tasknet::is_imaging(r.task->activity)) return true;
    return false;
  }

  bool activity_running(ActivityKind k) const {
    for (const auto& [id, r] : running_)
      if (r.task->activity == k) return true;
    return false;
  }

  void run_detectors(long k, double t) {
    for (std::size_t i = 0; i < detectors_.size(); ++i) {
      const auto& d = detectors_[i];
      const long every = std::max(1L, std::lround(d.period_s / cfg_.dt_s));
      if (k % every != 0) continue;
      bool truth = false;
      EventKind event{};
      std::string_view code;
      switch (d.detector.kind) {
        case onboard::DetectorKind::Plume:
          if (!imaging_running()) continue;
          truth = any_plume(env_);
          event = EventKind::PlumeDetected;
          code = evr::kPlumeDetected;
          break;
        case onboard::DetectorKind::Storm:
          if (!imaging_running()) continue;
          truth = env_.storm.active;
          event = EventKind::StormDetected;
          code = evr::kStormDetected;
          break;
        case onboard::DetectorKind::Reconnection:
          if (!activity_running(ActivityKind::MagSurvey)) {
            seen_reconnections_ = env_.reconnection_count;
            continue;
          }
          truth = env_.reconnection_count > seen_reconnections_;
          seen_reconnections_ = env_.reconnection_count;
          event = EventKind::ReconnectionDetected;
          code = evr::kReconnectionDetected;
          break;
      }
      const bool out = onboard::detect(d.detector, truth, detector_rngs_[i]);
      record(("detector." + std::string(onboard::to_string(d.detector.kind))).c_str(), t, out ? 1.0 : 0.0);
      // Every rising edge is logged; only the first one replans.
      if (out && !detector_last_[i]) emit(t, code, {{"detector", std::string(onboard::to_string(d.detector.kind))}});
      detector_last_[i] = out;
      if (out && !events_.count(event)) {
        events_.insert(event);
        triggers_.push_back(Trigger::detected(event));
      }
    }
  }

  void apply_triggers(double t) {
    for (const auto& trig : triggers_) {
      auto r = onboard::replan(plan_, t, trig, net_, state_, events_, cfg_.horizon_s, model_, ++cycle_);
      plan_ = std::move(r.timeline);
      log_decision(r.record);
    }
    triggers_.clear();
  }

  bool resource_busy(const Task& task) const {
    const auto res = tasknet::exclusive_resource(task);
    if (!res) return false;
    for (const auto& [id, r] : running_)
      if (tasknet::exclusive_resource(*r.task) == res) return true;
    return false;
  }

  void start_due(double t) {
    for (const auto& e : plan_.entries) {
      if (e.status != onboard::EntryStatus::Planned) continue;
      if (e.t_start > t + kEps || e.t_end <= t + kEps) continue;
      if (running_.count(e.task_id) || executed_.count(e.task_id)) continue;
      if (started_.count({e.task_id, e.t_start})) continue;
      const Task& task = net_.tasks.at(e.task_id);
      if (task.instrument) {
        auto u = state_.unavailable_until.find(*task.instrument);
        if (u != state_.unavailable_until.end() && u->second > t + kEps) continue;
        auto m = state_.instrument_modes.find(*task.instrument);
        if (m != state_.instrument_modes.end() && m->second != InstrumentMode::On) continue;
      }
      if (resource_busy(task)) continue;

      started_.insert({e.task_id, e.t_start});
      Running r;
      r.task = &task;
      r.goal_id = task.goal_id;
      r.start = t;
      r.planned_end = e.t_end;
      r.actual_end = t + task.duration_s * params_.get("task." + task.id + ".duration_scale", 1.0);
      r.power_w = task.power_w * params_.get("task." + task.id + ".power_scale", 1.0);
      r.attempt = ++attempts_[task.id];
      r.exposure = {task.parameter("exposure_time", 1.0), task.parameter("n_stack", 1.0)};
      emit(t, evr::kTaskStart, {{"task", task.id}, {"goal", task.goal_id}, {"attempt", std::to_string(r.attempt)}});
      if (task.instrument && task.parameter("autotune", 0.0) > 0.0 && instruments_.count(*task.instrument))
        tune(r, t);
      running_.emplace(task.id, r);
    }
  }

  void tune(Running& r, double t) {
    const auto& inst = instruments_.at(*r.task->instrument);
    const double noise = observation_noise(inst, r.exposure, noise_scale_);
    const double target = r.task->parameter("target_noise", noise);
    const double budget = r.task->parameter("downlink_budget_mbit", 1e12);
    const auto decision = onboard::tune_exposure(noise, target, budget, r.exposure, inst.data_per_obs_mbit);
    if (!(decision.params == r.exposure))
      emit(t, evr::kExposureTuned,
           {{"task", r.task->id}, {"n_stack", fmt(decision.params.n_stack)}, {"noise", fmt(noise)}});
    if (decision.budget_limited)
      emit(t, evr::kBudgetLimited, {{"task", r.task->id}, {"n_stack", fmt(decision.params.n_stack)}});
    r.exposure = decision.params;
  }

  void integrate(double dt) {
    const double load = current_load();
    const double supply = params_.get("power.supply_w");
    state_.battery_wh = std::clamp(state_.battery_wh + (supply - load) * dt / 3600.0, 0.0, cfg_.battery_capacity_wh);

    for (auto& [id, r] : running_) {
      const Task& task = *r.task;
      double rate = task.data_rate_mbit_s;
      if (task.activity == ActivityKind::MagSurvey)
        rate = mag_mode_ == onboard::MagMode::LosslessHighRate ? cfg_.mag_high_rate_mbit_s : cfg_.mag_low_rate_mbit_s;
      const double amount = rate * dt;
      if (amount <= 0.0) continue;
      if (task.activity == ActivityKind::Downlink) {
        state_.storage_mbit = std::max(0.0, state_.storage_mbit - amount);
        continue;
      }
      if (state_.storage_mbit + amount > cfg_.storage_capacity_mbit + kEps) {
        if (!r.storage_warned) emit(state_.t, evr::kStorageFull, {{"task", id}});
        r.storage_warned = true;
        continue;
      }
      state_.storage_mbit += amount;
      r.debited += amount;
    }

    const double a = std::exp(-dt / cfg_.thermal_tau_s);
    state_.temperature_c = cfg_.thermal_env_c + (state_.temperature_c - cfg_.thermal_env_c) * a +
                           cfg_.thermal_gain_c_per_wh * load * dt / 3600.0;

    mag_window_.push_back(env_.mag_field_nT);
    env_ = step_environment(env_, dt, env_streams_);
  }

  void finalize() {
    const double t = cfg_.horizon_s;
    std::set<std::string> planned;
    for (const auto& e : plan_.entries)
      if (e.status == onboard::EntryStatus::Planned) planned.insert(e.task_id);
    for (const auto& [id, task] : net_.tasks) {
      TaskOutcome o = TaskOutcome::Skipped;
      if (executed_.count(id)) o = TaskOutcome::Executed;
      else if (interrupted_.count(id)) o = TaskOutcome::Interrupted;
      else if (running_.count(id) || planned.count(id)) o = TaskOutcome::Scheduled;
      trace_.task_outcomes[id] = o;
    }
    trace_.goal_outcomes = goal_outcomes(net_, trace_.task_outcomes, events_);

    // Engineering product summarizing task outcomes, always high priority.
    if (net_.tasks.empty()) return;
    const double size = 0.001 * static_cast<double>(std::max<std::size_t>(1, net_.tasks.size()));
    if (state_.storage_mbit + size <= cfg_.storage_capacity_mbit + kEps) {
      state_.storage_mbit += size;
      trace_.products.push_back({"task_outcomes", "engineering.task_outcomes", size, t, "",
                                 std::numeric_limits<std::int32_t>::max()});
    }
  }

  const tasknet::TaskNetwork& net_;
  const SimConfig& cfg_;
  Params params_;
  onboard::PlannerModel model_;
  EnvironmentStreams env_streams_;
  Rng fault_rng_;
  std::vector<DetectorConfig> detectors_;
  std::vector<Rng> detector_rngs_;
  std::vector<char> detector_last_;
  std::map<InstrumentId, Instrument> instruments_;
  std::optional<Ephemeris> ephemeris_;

  SpacecraftState state_;
  EnvironmentState env_;
  onboard::Timeline plan_;
  std::set<EventKind> events_;
  std::vector<Trigger> triggers_;
  int cycle_ = 0;

  std::map<std::string, Running> running_;
  std::set<std::pair<std::string, double>> started_;
  std::map<std::string, int> attempts_;
  std::set<std::string> executed_;
  std::set<std::string> interrupted_;

  onboard::MagMode mag_mode_ = onboard::MagMode::BinnedLowRate;
  std::vector<double> mag_window_;
  std::uint64_t seen_reconnections_ = 0;

  double reset_t_ = -1.0;
  double reset_rate_ = 0.0;
  bool reset_fired_ = false;
  bool camera_resetting_ = false;
  double noise_scale_ = 1.0;

  SimTrace trace_;
};

}  // namespace

SimTrace run(const tasknet::TaskNetwork& net, const SimConfig& config, const ScenarioSample& sample) {
  if (!(config.horizon_s > 0)) throw HorizonError("horizon must be positive");
  return Simulation(net, config, sample).run();
}

}  // namespace ops::simcore
