#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "erasure/runner.hpp"
#include "erasure/synthetic.hpp"
#include "erasure/workload.hpp"

using namespace erasure;

namespace {

constexpr int kUsage = 1;
constexpr int kVerifyFailed = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

struct RunArgs {
  std::string schema, rules, workload, report, log;
  std::string algorithm = "hgr", batch_mode = "count", cost = "uniform", scheduler = "on";
  std::size_t batch_size = 1;
  Timestamp grace = 0;
  double retention = 0;
  bool verify = false;
  std::uint64_t seed = 1;
  Timestamp horizon = -1;
  std::vector<std::string> freq;
  std::size_t oracle_limit = 20000;
};

struct GenArgs {
  SyntheticSpec spec;
  std::string mode = "bursty";
  std::string rules;
  std::string out = "synthetic";
};

void add_gen_options(CLI::App* app, GenArgs& g) {
  app->add_option("--seed", g.spec.seed, "random seed");
  app->add_option("--users", g.spec.users, "number of users");
  app->add_option("--posts", g.spec.posts_per_user, "posts per user");
  app->add_option("--mode", g.mode, "bursty | continuous | simultaneous")
      ->check(CLI::IsMember({"bursty", "continuous", "simultaneous"}));
  app->add_option("--horizon", g.spec.horizon, "workload length in ticks");
  app->add_option("--erasures", g.spec.erasures, "erase requests");
  app->add_option("--updates", g.spec.updates_per_user, "updates per user");
  app->add_option("--erase-after", g.spec.erase_after, "earliest erase request time");
  app->add_option("--rules", g.rules, "comma separated rule ids (default all)");
}

SyntheticSpec finish_spec(GenArgs& g) {
  SyntheticSpec s = g.spec;
  s.mode = *parse_update_mode(g.mode);
  std::stringstream ss(g.rules);
  for (std::string id; std::getline(ss, id, ',');)
    if (!id.empty()) s.rules.push_back(id);
  return s;
}

RunConfig make_config(const RunArgs& a) {
  RunConfig cfg;
  auto alg = parse_algorithm(a.algorithm);
  if (!alg) throw CLI::ValidationError("--algorithm", "unknown algorithm " + a.algorithm);
  cfg.algorithm = *alg;
  cfg.batch_mode = a.batch_mode == "time" ? BatchMode::Time : BatchMode::Count;
  cfg.batch_size = a.batch_size;
  cfg.grace = a.grace;
  cfg.cost_model = a.cost == "weighted" ? CostModel::Weighted : CostModel::Uniform;
  cfg.scheduler = a.scheduler == "on";
  cfg.retention_fraction = a.retention;
  cfg.verify = a.verify;
  cfg.seed = a.seed;
  cfg.oracle_limit = a.oracle_limit;
  if (a.horizon >= 0) cfg.horizon = a.horizon;
  for (const auto& f : a.freq) {
    auto eq = f.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--freq", "expected attr=ticks, got " + f);
    cfg.freq[f.substr(0, eq)] = std::stoll(f.substr(eq + 1));
  }
  return cfg;
}

int cmd_run(const RunArgs& a) {
  RunConfig cfg = make_config(a);
  auto schema = Schema::load(a.schema);
  auto rules = load_rules(a.rules, *schema);
  auto events = load_workload(a.workload);
  RunResult res = run_workload(schema, rules, events, cfg);
  if (!a.report.empty()) write_file(a.report, res.report.to_jsonl());
  if (!a.log.empty()) save_workload(a.log, res.store.log());
  std::cout << res.report.summary_table();
  return res.report.count(Verdict::Fail) ? kVerifyFailed : 0;
}

int cmd_verify(const std::string& schema_path, const std::string& rules_path, const std::string& log_path,
               const std::string& report_path, std::size_t limit) {
  auto schema = Schema::load(schema_path);
  auto rules = load_rules(rules_path, *schema);
  Store store = replay(schema, load_workload(log_path));
  auto records = parse_report(read_file(report_path));
  auto verdicts = verify(store, rules, records, limit);
  std::size_t fail = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::cout << records[i].target.to_string() << '\t' << records[i].executed_at << '\t' << to_string(verdicts[i])
              << '\n';
    fail += verdicts[i] == Verdict::Fail;
  }
  return fail ? kVerifyFailed : 0;
}

// One CSV row per sweep value over a fresh synthetic workload.
int cmd_bench(const std::string& sweep, GenArgs& g, RunArgs a, const std::string& out_path) {
  SyntheticSpec spec = finish_spec(g);
  SyntheticData data = gen_synthetic(spec);
  auto schema = Schema::from_json(nlohmann::json::parse(data.schema_json));
  auto rules = parse_rules(data.rules_text, *schema);
  std::vector<double> values;
  if (sweep == "batch") values = {1, 10, 50, 100};
  else if (sweep == "grace") values = {0, 900, 1800, 3600, 7200, 14400};
  else values = {0, 0.25, 0.5, 0.75, 1.0};
  std::string csv =
      "sweep,value,erasures,batches,instantiated_cells,deleted_cells,wall_us,reconstructions_performed,"
      "reconstructions_baseline,reconstructions_saved,verified_pass,verified_fail\n";
  int status = 0;
  for (double v : values) {
    RunArgs run = a;
    if (sweep == "batch") {
      run.batch_mode = "count";
      run.batch_size = static_cast<std::size_t>(v);
    } else if (sweep == "grace") {
      run.grace = static_cast<Timestamp>(v);
      run.retention = 1.0;
    } else {
      run.retention = v;
    }
    RunResult res = run_workload(schema, rules, data.workload, make_config(run));
    const Report& r = res.report;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%g,%zu,%zu,%zu,%zu,%.0f,%zu,%zu,%zu,%zu,%zu\n", sweep.c_str(), v,
                  r.erasures.size(), r.batches, r.instantiated_cells, r.deleted_cells, r.wall_micros,
                  r.reconstructions_performed(), r.reconstructions_baseline(), r.reconstructions_saved(),
                  r.count(Verdict::Pass), r.count(Verdict::Fail));
    csv += buf;
    if (r.count(Verdict::Fail)) status = kVerifyFailed;
  }
  if (out_path.empty()) std::cout << csv;
  else write_file(out_path, csv);
  return status;
}

void add_run_options(CLI::App* app, RunArgs& a) {
  app->add_option("--algorithm", a.algorithm, "ilp | hgr | apx | baseline-inst | baseline-opr | baseline-minset");
  app->add_option("--batch-mode", a.batch_mode, "time | count")->check(CLI::IsMember({"time", "count"}));
  app->add_option("--batch-size", a.batch_size, "requests per batch in count mode")->check(CLI::PositiveNumber);
  app->add_option("--grace", a.grace, "grace period in ticks")->check(CLI::NonNegativeNumber);
  app->add_option("--scheduler", a.scheduler, "on | off")->check(CLI::IsMember({"on", "off"}));
  app->add_option("--retention-fraction", a.retention, "share of requests handled as retention")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--cost", a.cost, "uniform | weighted")->check(CLI::IsMember({"uniform", "weighted"}));
  app->add_flag("--verify", a.verify, "run the oracle after every erasure");
  app->add_option("--oracle-limit", a.oracle_limit, "skip verification above this many live cells");
  app->add_option("--run-seed", a.seed, "seed for the retention split");
  app->add_option("--sim-horizon", a.horizon, "simulation horizon (default: last event)");
  app->add_option("--freq", a.freq, "attr=ticks, overrides the schema");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"erasectl: erasure with dependency rules"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "replay a workload");
  run_cmd->add_option("--schema", run.schema, "schema JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--rules", run.rules, "rule file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--workload", run.workload, "workload TSV")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--report", run.report, "write the JSON lines report here");
  run_cmd->add_option("--log", run.log, "write the resulting event log here");
  add_run_options(run_cmd, run);

  std::string v_schema, v_rules, v_log, v_report;
  std::size_t v_limit = 20000;
  auto* verify_cmd = app.add_subcommand("verify", "check a report against an event log");
  verify_cmd->add_option("--schema", v_schema, "schema JSON")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--rules", v_rules, "rule file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--log", v_log, "event log written by run --log")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--report", v_report, "report written by run --report")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--oracle-limit", v_limit, "skip above this many live cells");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a synthetic schema, rule file and workload");
  add_gen_options(gen_cmd, gen);
  gen_cmd->add_option("--out", gen.out, "output directory");

  GenArgs bench_gen;
  RunArgs bench_run;
  std::string sweep = "batch", bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "sweep batch sizes, grace periods or retention fractions");
  bench_cmd->add_option("--sweep", sweep, "batch | grace | retention")
      ->check(CLI::IsMember({"batch", "grace", "retention"}));
  bench_cmd->add_option("--csv", bench_out, "write CSV here (default stdout)");
  add_gen_options(bench_cmd, bench_gen);
  add_run_options(bench_cmd, bench_run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*verify_cmd) return cmd_verify(v_schema, v_rules, v_log, v_report, v_limit);
    if (*gen_cmd) {
      write_synthetic(gen_synthetic(finish_spec(gen)), gen.out);
      return 0;
    }
    if (*bench_cmd) return cmd_bench(sweep, bench_gen, bench_run, bench_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "erasectl: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "erasectl: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
