#include "ops/opsd/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>

#include "ops/downlink/incon.hpp"
#include "ops/downlink/match.hpp"
#include "ops/opsd/server.hpp"
#include "ops/opsd/workflow.hpp"
#include "ops/predict/batch.hpp"
#include "ops/predict/impact.hpp"
#include "ops/simcore/simulator.hpp"
#include "ops/tasknet/tasknet.hpp"

#ifndef OPS_DEFAULT_UI_DIR
#define OPS_DEFAULT_UI_DIR "ui"
#endif

namespace ops::opsd {
namespace {

namespace fs = std::filesystem;

/// Domain failure already reported on stdout; exit 1 without an error line.
struct Violated {};

struct Output {
  std::ostream& out;
  std::string format = "text";
  bool json() const { return format == "json"; }
  void emit(const Json& j) const { out << j.dump(2) << "\n"; }
};

void add_format(CLI::App* app, Output& o) {
  app->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
}

std::string pct(double p) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(1) << 100.0 * p << "%";
  return ss.str();
}

std::string signature_text(const predict::Signature& s) {
  std::string out;
  for (const auto& [goal, outcome] : s) out += (out.empty() ? "" : ", ") + goal + "=" + std::string(simcore::to_string(outcome));
  return out;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Output& o, const fs::path& file, const std::optional<fs::path>& sem_file) {
  const Json doc = read_json_file(file);
  const std::string schema = doc.value("schema", std::string());
  Json result{{"file", file.string()}, {"schema", schema}, {"violations", Json::array()}};
  if (schema == "tasknet/1") {
    const auto net = tasknet::network_from_json(doc);
    for (const auto& v : tasknet::validate(net)) result["violations"].push_back(tasknet::to_json(v));
    result["content_hash"] = tasknet::content_hash(net);
  } else if (schema == "sem/1") {
    infer::sem_from_json(doc);
  } else if (schema == "gem/1") {
    const auto gem = infer::gem_from_json(doc);
    if (sem_file) infer::check_against(gem, infer::sem_from_json(read_json_file(*sem_file)));
  } else if (schema == "simconfig/1") {
    simcore::config_from_json(doc, file.parent_path());
  } else if (schema == "variability/1") {
    predict::validate(predict::spec_from_json(doc));
  } else {
    throw DocumentError(file.string() + ": unknown schema \"" + schema + "\"");
  }
  const bool ok = result["violations"].empty();
  result["ok"] = ok;
  if (o.json()) {
    o.emit(result);
  } else if (ok) {
    o.out << file.string() << ": ok (" << schema << ")\n";
  } else {
    for (const auto& v : result["violations"])
      o.out << file.string() << ": " << v.value("kind", std::string()) << ": " << v.value("message", std::string()) << "\n";
  }
  if (!ok) throw Violated{};
  return 0;
}

int cmd_merge(const Output& o, const fs::path& base, const fs::path& ours, const fs::path& theirs,
              const std::optional<fs::path>& out_file) {
  const auto r = tasknet::merge(tasknet::network_from_json(read_json_file(base)),
                                tasknet::network_from_json(read_json_file(ours)),
                                tasknet::network_from_json(read_json_file(theirs)));
  Json conflicts = Json::array();
  for (const auto& c : r.conflicts) conflicts.push_back(tasknet::to_json(c));
  if (r.ok() && out_file) write_json_file(*out_file, tasknet::to_json(*r.merged), true);
  if (o.json()) {
    Json j{{"ok", r.ok()}, {"conflicts", conflicts}};
    if (r.merged) j["merged"] = tasknet::to_json(*r.merged);
    o.emit(j);
  } else if (r.ok()) {
    o.out << "merged " << r.merged->id << " revision " << r.merged->revision;
    if (out_file) o.out << " -> " << out_file->string();
    o.out << "\n";
    if (!out_file) o.out << tasknet::serialize(*r.merged) << "\n";
  } else {
    for (const auto& c : r.conflicts) o.out << "conflict: " << c.entity << " " << c.id << "." << c.field << ": " << c.reason << "\n";
  }
  if (!r.ok()) throw Violated{};
  return 0;
}

simcore::ScenarioSample parse_sets(std::uint64_t seed, const std::vector<std::string>& sets) {
  simcore::ScenarioSample s;
  s.seed = seed;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw predict::ArgumentError("--set expects path=value, got \"" + kv + "\"");
    try {
      std::size_t used = 0;
      const std::string value = kv.substr(eq + 1);
      s.values[kv.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw predict::ArgumentError("--set value for \"" + kv.substr(0, eq) + "\" is not a number");
    }
  }
  return s;
}

int cmd_simulate(const Output& o, const fs::path& net_file, const fs::path& config_file, std::uint64_t seed,
                 const std::vector<std::string>& sets, const std::optional<fs::path>& out_dir) {
  const auto net = tasknet::network_from_json(read_json_file(net_file));
  const auto cfg = simcore::load_config(config_file);
  const auto trace = simcore::run(net, cfg, parse_sets(seed, sets));
  if (out_dir) simcore::write_trace(trace, *out_dir);
  const auto sig = predict::signature_of(trace, net);
  if (o.json()) {
    Json j = simcore::manifest_json(trace);
    j["signature"] = predict::to_json(sig);
    o.emit(j);
    return 0;
  }
  o.out << "trace " << trace.trace_hash << "\n";
  o.out << "outcome: " << signature_text(sig) << "\n";
  o.out << trace.evrs.size() << " EVRs, " << trace.products.size() << " products, " << trace.decisions.size()
        << " planning cycles\n";
  for (const auto& d : trace.decisions) {
    o.out << "  t=" << d.t << " cycle " << d.cycle << " " << onboard::to_string(d.trigger.kind);
    if (d.trigger.event) o.out << ":" << tasknet::to_string(*d.trigger.event);
    o.out << "\n";
  }
  if (out_dir) o.out << "written to " << out_dir->string() << "\n";
  return 0;
}

void print_clusters(const Output& o, const predict::ClusterSet& set) {
  o.out << "batch " << set.batch_id << ": " << set.n_runs << " runs, " << set.n_failed << " failed, "
        << set.clusters.size() << " outcome clusters\n";
  for (std::size_t k = 0; k < set.clusters.size(); ++k) {
    const auto& c = set.clusters[k];
    o.out << "  [" << k << "] " << std::setw(6) << pct(c.likelihood) << "  " << signature_text(c.signature) << "\n";
  }
}

struct PredictArgs {
  fs::path net, config, spec;
  std::size_t n = 100;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  std::string sampler = "mc";
  double dt_bin = 10.0;
  std::optional<fs::path> out_dir;
};

int cmd_predict(const Output& o, const PredictArgs& a) {
  predict::BatchRequest req;
  req.net = tasknet::network_from_json(read_json_file(a.net));
  if (auto vs = tasknet::validate(req.net); !vs.empty()) throw DocumentError(a.net.string() + ": task network has violations; run ops validate");
  req.config = simcore::load_config(a.config);
  req.spec = predict::spec_from_json(read_json_file(a.spec));
  predict::validate(req.spec);
  req.n = a.n;
  req.sampler = predict::parse_sampler(a.sampler);
  req.master_seed = a.seed;
  req.dt_bin = a.dt_bin;
  if (req.n < 1) throw predict::ArgumentError("-n must be at least 1");
  const fs::path dir = a.out_dir ? *a.out_dir : fs::path("batches") / predict::batch_id_of(req);
  const auto result = predict::run_batch(req, std::max<std::size_t>(1, a.workers), predict::directory_sink(dir));
  predict::write_batch(dir, req, result);
  const auto set = result.clusters();
  if (o.json()) {
    o.emit(Json{{"batch_dir", dir.string()}, {"clusters", predict::to_json(set)}});
  } else {
    print_clusters(o, set);
    o.out << "written to " << dir.string() << "\n";
  }
  return 0;
}

int cmd_cluster(const Output& o, const fs::path& batch_dir, bool write) {
  const auto set = predict::recluster(batch_dir);
  if (write) write_json_file(batch_dir / "clusters.json", predict::to_json(set));
  if (o.json())
    o.emit(predict::to_json(set));
  else
    print_clusters(o, set);
  return 0;
}

struct DownlinkArgs {
  fs::path trace;
  std::optional<double> budget;
  double channel_period = 0.0;
  std::optional<fs::path> batch;
  std::optional<fs::path> out_file;
};

int cmd_downlink(const Output& o, const DownlinkArgs& a) {
  downlink::DecimationPolicy policy;
  policy.default_period_s = a.channel_period;
  if (a.channel_period < 0.0 || (a.budget && *a.budget < 0.0)) throw predict::ArgumentError("budget and channel period must be non-negative");
  const auto d = downlink::decimate(simcore::read_trace(a.trace), a.budget.value_or(downlink::kUnlimitedBudget), policy);
  if (a.out_file) write_json_file(*a.out_file, downlink::to_json(d));

  Json j{{"received_fraction", d.received_fraction}};
  std::optional<downlink::MatchReport> match;
  std::optional<downlink::EvrDiff> diff;
  if (a.batch) {
    const auto req = predict::batch_request_from_json(read_json_file(*a.batch / "request.json"));
    const auto set = predict::cluster_set_from_json(read_json_file(*a.batch / "clusters.json"));
    match = downlink::match_cluster(d, set, req.net);
    diff = downlink::evr_diff(d, set.clusters.at(match->best_cluster));
    j["match"] = downlink::to_json(*match);
    j["evrdiff"] = downlink::to_json(*diff);
  }
  if (o.json()) {
    o.emit(j);
    return 0;
  }
  for (const auto& [k, f] : d.received_fraction) o.out << "received " << k << ": " << pct(f) << "\n";
  if (match) {
    o.out << "best cluster [" << match->best_cluster << "] distance " << match->signature_distance << " residual "
          << match->channel_residual << " (signature from " << downlink::to_string(match->source) << ")\n";
    o.out << "actual: " << signature_text(match->signature) << "\n";
    for (const auto& e : diff->surplus)
      o.out << "surplus EVR " << e.code << ": " << e.actual << " seen, expected " << e.expected.min << ".." << e.expected.max << "\n";
    for (const auto& e : diff->missing)
      o.out << "missing EVR " << e.code << ": " << e.actual << " seen, expected " << e.expected.min << ".." << e.expected.max << "\n";
  }
  if (a.out_file) o.out << "written to " << a.out_file->string() << "\n";
  return 0;
}

struct InferArgs {
  fs::path model;
  std::optional<fs::path> gem;
  fs::path downlink;
  std::size_t beam = 32;
  std::optional<fs::path> out_file;
  std::optional<fs::path> incon_file;
};

int cmd_infer(const Output& o, const InferArgs& a) {
  const auto sem = infer::sem_from_json(read_json_file(a.model));
  std::optional<infer::GoalElaborationModel> gem;
  if (a.gem) gem = infer::gem_from_json(read_json_file(*a.gem));
  if (a.beam < 1) throw predict::ArgumentError("--beam must be at least 1");
  const auto d = downlink::downlink_from_json(read_json_file(a.downlink));
  const auto report = infer_downlink(sem, gem, d, a.beam);
  const Json rj = infer::to_json(report);
  if (a.out_file) write_json_file(*a.out_file, rj, true);
  if (a.incon_file) write_json_file(*a.incon_file, downlink::to_json(downlink::build_incon(d, report)), true);
  if (o.json()) {
    o.emit(rj);
    return 0;
  }
  o.out << report.hypotheses.size() << " hypotheses over " << report.n_bins << " bins of " << report.bin_s << " s\n";
  for (const auto& dj : report.explanations) {
    o.out << "decision t=" << dj["t"].get<double>() << " " << dj["trigger"].get<std::string>() << "\n";
    if (dj.contains("trigger_check")) {
      const auto& tc = dj["trigger_check"];
      o.out << "  trigger " << tc["event"].get<std::string>() << ": " << tc["variable"].get<std::string>() << " = "
            << tc["top_value"].get<int>() << " (P = " << tc["probability"].get<double>() << ")"
            << (tc["consistent"].get<bool>() ? "" : " INCONSISTENT") << "\n";
      for (const auto& e : tc.value("evidence", Json::array())) o.out << "    evidence: " << e.get<std::string>() << "\n";
    }
    for (const auto& v : dj["verdicts"]) o.out << "  " << v["text"].get<std::string>() << "\n";
  }
  for (const auto& an : report.anomalies)
    o.out << "ANOMALY t=" << an.t << " " << an.subject << ": " << an.message << "\n";
  if (a.out_file) o.out << "report written to " << a.out_file->string() << "\n";
  return 0;
}

int cmd_compare(const Output& o, const fs::path& before, const fs::path& after) {
  const auto a = predict::cluster_set_from_json(read_json_file(before / "clusters.json"));
  const auto b = predict::cluster_set_from_json(read_json_file(after / "clusters.json"));
  const auto r = predict::summarize_impact(a, b);
  if (o.json()) {
    o.emit(predict::to_json(r));
    return 0;
  }
  o.out << "impact " << r.before_batch << " -> " << r.after_batch << "\n";
  for (const auto& [goal, d] : r.goal_executed)
    o.out << "  P(" << goal << " executed): " << pct(d.before) << " -> " << pct(d.after) << "\n";
  for (const auto& [kpi, d] : r.kpi_mean) o.out << "  " << kpi << " mean: " << d.before << " -> " << d.after << "\n";
  return 0;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

int cmd_serve(const Output& o, const std::string& root, const std::string& bind, const std::string& ui) {
  Store store(root);
  Api api(store);
  auto opt = parse_bind(bind);
  opt.ui_dir = ui;
  serve(api, opt, [&](int port) {
    o.out << "opsd serving " << root << " on " << opt.host << ":" << port << std::endl;
  });
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mission operations workbench"};
  app.require_subcommand(1);
  Output o{out};
  std::function<int()> action;

  auto* validate = app.add_subcommand("validate", "Validate a document");
  fs::path v_file;
  std::optional<fs::path> v_sem;
  validate->add_option("file", v_file, "Document to validate")->required()->check(CLI::ExistingFile);
  validate->add_option("--sem", v_sem, "State-effect model to check a goal-elaboration model against")->check(CLI::ExistingFile);
  add_format(validate, o);
  validate->callback([&] { action = [&] { return cmd_validate(o, v_file, v_sem); }; });

  auto* merge = app.add_subcommand("merge", "Three-way merge of task networks");
  fs::path m_base, m_ours, m_theirs;
  std::optional<fs::path> m_out;
  merge->add_option("--base", m_base)->required()->check(CLI::ExistingFile);
  merge->add_option("--ours", m_ours)->required()->check(CLI::ExistingFile);
  merge->add_option("--theirs", m_theirs)->required()->check(CLI::ExistingFile);
  merge->add_option("-o,--output", m_out, "Write the merged network here");
  add_format(merge, o);
  merge->callback([&] { action = [&] { return cmd_merge(o, m_base, m_ours, m_theirs, m_out); }; });

  auto* simulate = app.add_subcommand("simulate", "Run one scenario");
  fs::path s_net, s_config;
  std::uint64_t s_seed = 0;
  std::vector<std::string> s_sets;
  std::optional<fs::path> s_out;
  simulate->add_option("--net", s_net)->required()->check(CLI::ExistingFile);
  simulate->add_option("--config", s_config)->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", s_seed);
  simulate->add_option("--set", s_sets, "Parameter override path=value");
  simulate->add_option("-o,--output", s_out, "Trace directory");
  add_format(simulate, o);
  simulate->callback([&] { action = [&] { return cmd_simulate(o, s_net, s_config, s_seed, s_sets, s_out); }; });

  auto* predict = app.add_subcommand("predict", "Run a prediction batch and cluster outcomes");
  PredictArgs p;
  predict->add_option("--net", p.net)->required()->check(CLI::ExistingFile);
  predict->add_option("--config", p.config)->required()->check(CLI::ExistingFile);
  predict->add_option("--spec", p.spec)->required()->check(CLI::ExistingFile);
  predict->add_option("-n", p.n, "Number of runs");
  predict->add_option("--workers", p.workers);
  predict->add_option("--seed", p.seed, "Master seed");
  predict->add_option("--sampler", p.sampler)->check(CLI::IsMember({"mc", "lhs"}));
  predict->add_option("--dt-bin", p.dt_bin, "Envelope bin width in seconds");
  predict->add_option("-o,--output", p.out_dir, "Batch directory");
  add_format(predict, o);
  predict->callback([&] { action = [&] { return cmd_predict(o, p); }; });

  auto* cluster = app.add_subcommand("cluster", "Re-cluster a stored batch");
  fs::path c_dir;
  bool c_write = false;
  cluster->add_option("batch", c_dir)->required()->check(CLI::ExistingDirectory);
  cluster->add_flag("--write", c_write, "Rewrite clusters.json");
  add_format(cluster, o);
  cluster->callback([&] { action = [&] { return cmd_cluster(o, c_dir, c_write); }; });

  auto* down = app.add_subcommand("downlink", "Decimate a trace and match it against a batch");
  DownlinkArgs d;
  down->add_option("--trace", d.trace)->required()->check(CLI::ExistingDirectory);
  down->add_option("--budget", d.budget, "Product budget in Mbit");
  down->add_option("--channel-period", d.channel_period, "Minimum channel sample spacing in seconds");
  down->add_option("--batch", d.batch, "Batch directory to match against")->check(CLI::ExistingDirectory);
  down->add_option("-o,--output", d.out_file, "Write the downlinked trace here");
  add_format(down, o);
  down->callback([&] { action = [&] { return cmd_downlink(o, d); }; });

  auto* inf = app.add_subcommand("infer", "Estimate state and explain decisions from a downlink");
  InferArgs ia;
  inf->add_option("--model", ia.model, "State-effect model")->required()->check(CLI::ExistingFile);
  inf->add_option("--gem", ia.gem, "Goal-elaboration model")->check(CLI::ExistingFile);
  inf->add_option("--downlink", ia.downlink)->required()->check(CLI::ExistingFile);
  inf->add_option("--beam", ia.beam);
  inf->add_option("-o,--output", ia.out_file, "Write the inference report here");
  inf->add_option("--incon", ia.incon_file, "Write initial conditions here");
  add_format(inf, o);
  inf->callback([&] { action = [&] { return cmd_infer(o, ia); }; });

  auto* compare = app.add_subcommand("compare", "Impact of a change between two batches");
  fs::path cmp_a, cmp_b;
  compare->add_option("before", cmp_a)->required()->check(CLI::ExistingDirectory);
  compare->add_option("after", cmp_b)->required()->check(CLI::ExistingDirectory);
  add_format(compare, o);
  compare->callback([&] { action = [&] { return cmd_compare(o, cmp_a, cmp_b); }; });

  auto* srv = app.add_subcommand("serve", "Run the HTTP service");
  std::string root = env_or("OPSD_ROOT", "opsd-data");
  std::string bind = env_or("OPSD_BIND", "127.0.0.1:8080");
  std::string ui = env_or("OPSD_UI", OPS_DEFAULT_UI_DIR);
  srv->add_option("--root", root, "Store directory (OPSD_ROOT)");
  srv->add_option("--bind", bind, "host:port (OPSD_BIND)");
  srv->add_option("--ui", ui, "Static console assets");
  add_format(srv, o);
  srv->callback([&] { action = [&] { return cmd_serve(o, root, bind, ui); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const Violated&) {
    return 1;
  } catch (const Error& e) {
    if (o.json())
      out << error_response(e).body.dump(2) << "\n";
    err << "error: " << e.code() << ": " << e.what() << "\n";
    return 1;
  } catch (const Json::exception& e) {
    err << "error: BAD_DOCUMENT: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: INTERNAL: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ops::opsd
