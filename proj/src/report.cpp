#include "fairprobe/report.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "fairprobe/error.hpp"

namespace fairprobe {

using nlohmann::json;

AuditSummary summarize(const SearchConfig& cfg, const TestSuite& suite, std::uint64_t findings_cap) {
  AuditSummary s;
  s.config = cfg;
  s.inputs_generated = suite.inputs_generated;
  s.discriminatory_count = suite.findings.size();
  s.unique_discriminatory = suite.unique_inputs.size();
  s.percent_discriminatory = suite.percent_discriminatory();
  s.global = suite.global;
  s.local = suite.local;
  s.baseline = suite.baseline;
  s.seeds = suite.seeds;
  s.stop_reason = suite.stop_reason;
  if (suite.final_state) {
    s.final_sigma_pr = suite.final_state->sigma_pr_values();
    s.final_sigma_v = suite.final_state->sigma_v_values();
  }
  s.findings_cap = findings_cap;
  const auto n = std::min<std::size_t>(suite.findings.size(), findings_cap);
  s.findings_sample.assign(suite.findings.begin(), suite.findings.begin() + static_cast<std::ptrdiff_t>(n));
  s.discriminatory_inputs.assign(suite.unique_inputs.begin(), suite.unique_inputs.end());
  return s;
}

namespace {

// ---- strict field access --------------------------------------------------

void require_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> required,
                  std::initializer_list<std::string_view> optional = {}) {
  if (!j.is_object()) throw ParseError(std::string(where) + ": expected an object");
  for (const auto k : required)
    if (!j.contains(std::string(k)))
      throw ParseError(std::string(where) + ": missing field '" + std::string(k) + "'");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                       std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) throw ParseError(std::string(where) + ": unknown field '" + key + "'");
  }
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<T>(j, key);
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// ---- pieces ----------------------------------------------------------------

json tally_json(const PhaseTally& t) { return {{"inputs", t.inputs}, {"discriminatory", t.discriminatory}}; }

PhaseTally tally_from(const json& j, std::string_view where) {
  require_keys(j, where, {"inputs", "discriminatory"});
  return {get<std::uint64_t>(j, "inputs"), get<std::uint64_t>(j, "discriminatory")};
}

json finding_json(const Finding& f) {
  return {{"input", f.input.values},   {"witness", f.witness.values},
          {"label_input", f.label_input}, {"label_witness", f.label_witness},
          {"origin", to_string(f.origin)}, {"step", f.step}};
}

Finding finding_from(const json& j) {
  require_keys(j, "finding", {"input", "witness", "label_input", "label_witness", "origin", "step"});
  Finding f;
  f.input.values = get<std::vector<Value>>(j, "input");
  f.witness.values = get<std::vector<Value>>(j, "witness");
  f.label_input = get<Label>(j, "label_input");
  f.label_witness = get<Label>(j, "label_witness");
  f.origin = parse_origin(get<std::string>(j, "origin"));
  f.step = get<std::uint64_t>(j, "step");
  return f;
}

json config_json(const SearchConfig& c) {
  return {{"strategy", to_string(c.strategy)},
          {"gamma", c.discrimination.gamma},
          {"delta_v", c.delta_v},
          {"delta_pr", c.delta_pr},
          {"global_trials", c.global_trials},
          {"local_trials", opt(c.local_trials)},
          {"seed", c.seed},
          {"max_findings", opt(c.max_findings)},
          {"time_budget", c.time_budget ? json(c.time_budget->count()) : json(nullptr)},
          {"input_budget", opt(c.input_budget)}};
}

SearchConfig config_from(const json& j) {
  require_keys(j, "audit.config",
               {"strategy", "gamma", "delta_v", "delta_pr", "global_trials", "local_trials", "seed",
                "max_findings", "time_budget", "input_budget"});
  SearchConfig c;
  c.strategy = parse_strategy(get<std::string>(j, "strategy"));
  c.discrimination.gamma = get<double>(j, "gamma");
  c.delta_v = get<double>(j, "delta_v");
  c.delta_pr = get<double>(j, "delta_pr");
  c.global_trials = get<std::uint64_t>(j, "global_trials");
  c.local_trials = get_opt<std::uint64_t>(j, "local_trials");
  c.seed = get<std::uint64_t>(j, "seed");
  c.max_findings = get_opt<std::uint64_t>(j, "max_findings");
  if (const auto t = get_opt<double>(j, "time_budget")) c.time_budget = std::chrono::duration<double>(*t);
  c.input_budget = get_opt<std::uint64_t>(j, "input_budget");
  return c;
}

json audit_json(const AuditSummary& a) {
  json findings = json::array();
  for (const auto& f : a.findings_sample) findings.push_back(finding_json(f));
  json inputs = json::array();
  for (const auto& in : a.discriminatory_inputs) inputs.push_back(in.values);
  return {{"config", config_json(a.config)},
          {"counters",
           {{"inputs_generated", a.inputs_generated},
            {"discriminatory_count", a.discriminatory_count},
            {"unique_discriminatory", a.unique_discriminatory},
            {"percent_discriminatory", a.percent_discriminatory},
            {"seeds", a.seeds}}},
          {"phases",
           {{"global", tally_json(a.global)},
            {"local", tally_json(a.local)},
            {"baseline", tally_json(a.baseline)}}},
          {"stop_reason", to_string(a.stop_reason)},
          {"final_sigma_pr", a.final_sigma_pr},
          {"final_sigma_v", a.final_sigma_v},
          {"findings_cap", a.findings_cap},
          {"findings_sample", std::move(findings)},
          {"discriminatory_inputs", std::move(inputs)}};
}

AuditSummary audit_from(const json& j) {
  require_keys(j, "audit",
               {"config", "counters", "phases", "stop_reason", "final_sigma_pr", "final_sigma_v",
                "findings_cap", "findings_sample", "discriminatory_inputs"});
  AuditSummary a;
  a.config = config_from(j.at("config"));
  const auto& c = j.at("counters");
  require_keys(c, "audit.counters",
               {"inputs_generated", "discriminatory_count", "unique_discriminatory",
                "percent_discriminatory", "seeds"});
  a.inputs_generated = get<std::uint64_t>(c, "inputs_generated");
  a.discriminatory_count = get<std::uint64_t>(c, "discriminatory_count");
  a.unique_discriminatory = get<std::uint64_t>(c, "unique_discriminatory");
  a.percent_discriminatory = get<double>(c, "percent_discriminatory");
  a.seeds = get<std::uint64_t>(c, "seeds");
  const auto& p = j.at("phases");
  require_keys(p, "audit.phases", {"global", "local", "baseline"});
  a.global = tally_from(p.at("global"), "audit.phases.global");
  a.local = tally_from(p.at("local"), "audit.phases.local");
  a.baseline = tally_from(p.at("baseline"), "audit.phases.baseline");
  a.stop_reason = parse_stop_reason(get<std::string>(j, "stop_reason"));
  a.final_sigma_pr = get<std::vector<double>>(j, "final_sigma_pr");
  a.final_sigma_v = get<std::vector<double>>(j, "final_sigma_v");
  a.findings_cap = get<std::uint64_t>(j, "findings_cap");
  for (const auto& f : j.at("findings_sample")) a.findings_sample.push_back(finding_from(f));
  for (const auto& in : j.at("discriminatory_inputs"))
    a.discriminatory_inputs.push_back(PointInput{in.get<std::vector<Value>>()});
  return a;
}

json estimate_json(const EstimateSummary& e) {
  const auto& r = e.result;
  return {{"gamma", e.gamma.gamma},
          {"seed", e.seed},
          {"point_estimate", r.point_estimate},
          {"ci_low", r.ci_low},
          {"ci_high", r.ci_high},
          {"trials", r.trials},
          {"samples_per_trial", r.samples_per_trial},
          {"per_trial", r.per_trial},
          {"running_mean", r.running_mean()}};
}

EstimateSummary estimate_from(const json& j) {
  require_keys(j, "estimation",
               {"gamma", "seed", "point_estimate", "ci_low", "ci_high", "trials", "samples_per_trial",
                "per_trial"},
               {"running_mean"});
  EstimateSummary e;
  e.gamma.gamma = get<double>(j, "gamma");
  e.seed = get<std::uint64_t>(j, "seed");
  e.result.point_estimate = get<double>(j, "point_estimate");
  e.result.ci_low = get<double>(j, "ci_low");
  e.result.ci_high = get<double>(j, "ci_high");
  e.result.trials = get<std::uint64_t>(j, "trials");
  e.result.samples_per_trial = get<std::uint64_t>(j, "samples_per_trial");
  e.result.per_trial = get<std::vector<double>>(j, "per_trial");
  return e;
}

json retrain_json(const RetrainSummary& r) {
  json its = json::array();
  for (const auto& it : r.iterations)
    its.push_back({{"i", it.i},
                   {"p_i", it.p_i},
                   {"rows_added", it.rows_added},
                   {"estimate_before", it.estimate_before},
                   {"estimate_after", it.estimate_after},
                   {"accepted", it.accepted}});
  return {{"model_kind", r.model_kind},
          {"hyperparams",
           {{"epochs", r.logistic.epochs},
            {"learning_rate", r.logistic.learning_rate},
            {"max_depth", r.tree.max_depth},
            {"min_leaf", r.tree.min_leaf}}},
          {"m", r.est_m},
          {"K", r.est_k},
          {"gamma", r.gamma},
          {"seed", r.seed},
          {"training_rows", r.training_rows},
          {"findings_digest", r.findings_digest},
          {"iterations", std::move(its)},
          {"initial_estimate", r.initial_estimate},
          {"final_estimate", r.final_estimate},
          {"total_added", r.total_added},
          {"percent_added", r.percent_added},
          {"improvement_percent", r.improvement_percent},
          {"exit", to_string(r.exit)},
          {"initial_model_digest", r.initial_model_digest},
          {"final_model_digest", r.final_model_digest},
          {"final_model_path", r.final_model_path}};
}

RetrainSummary retrain_from(const json& j) {
  require_keys(j, "retrain",
               {"model_kind", "hyperparams", "m", "K", "gamma", "seed", "training_rows",
                "findings_digest", "iterations", "initial_estimate", "final_estimate", "total_added",
                "percent_added", "improvement_percent", "exit", "initial_model_digest",
                "final_model_digest", "final_model_path"});
  RetrainSummary r;
  r.model_kind = get<std::string>(j, "model_kind");
  const auto& h = j.at("hyperparams");
  require_keys(h, "retrain.hyperparams", {"epochs", "learning_rate", "max_depth", "min_leaf"});
  r.logistic.epochs = get<int>(h, "epochs");
  r.logistic.learning_rate = get<double>(h, "learning_rate");
  r.tree.max_depth = get<int>(h, "max_depth");
  r.tree.min_leaf = get<int>(h, "min_leaf");
  r.est_m = get<std::uint64_t>(j, "m");
  r.est_k = get<std::uint64_t>(j, "K");
  r.gamma = get<double>(j, "gamma");
  r.seed = get<std::uint64_t>(j, "seed");
  r.logistic.seed = r.tree.seed = r.seed;
  r.training_rows = get<std::uint64_t>(j, "training_rows");
  r.findings_digest = get<std::string>(j, "findings_digest");
  for (const auto& it : j.at("iterations")) {
    require_keys(it, "retrain.iteration",
                 {"i", "p_i", "rows_added", "estimate_before", "estimate_after", "accepted"});
    r.iterations.push_back({get<int>(it, "i"), get<double>(it, "p_i"), get<std::uint64_t>(it, "rows_added"),
                            get<double>(it, "estimate_before"), get<double>(it, "estimate_after"),
                            get<bool>(it, "accepted")});
  }
  r.initial_estimate = get<double>(j, "initial_estimate");
  r.final_estimate = get<double>(j, "final_estimate");
  r.total_added = get<std::uint64_t>(j, "total_added");
  r.percent_added = get<double>(j, "percent_added");
  r.improvement_percent = get<double>(j, "improvement_percent");
  r.exit = parse_retrain_exit(get<std::string>(j, "exit"));
  r.initial_model_digest = get<std::string>(j, "initial_model_digest");
  r.final_model_digest = get<std::string>(j, "final_model_digest");
  r.final_model_path = get<std::string>(j, "final_model_path");
  return r;
}

json compare_json(const CompareSummary& c) {
  json rows = json::array();
  for (const auto& r : c.rows)
    rows.push_back({{"strategy", to_string(r.strategy)},
                    {"percent", r.percent},
                    {"inputs", r.inputs},
                    {"findings", r.findings},
                    {"wall_time", r.wall_time},
                    {"median_percent", r.median_percent},
                    {"median_wall_time", r.median_wall_time}});
  return {{"seeds", c.seeds},   {"budget", c.budget},     {"global_trials", c.global_trials},
          {"gamma", c.gamma},   {"delta_v", c.delta_v},   {"delta_pr", c.delta_pr},
          {"rows", std::move(rows)}};
}

CompareSummary compare_from(const json& j) {
  require_keys(j, "compare", {"seeds", "budget", "global_trials", "gamma", "delta_v", "delta_pr", "rows"});
  CompareSummary c;
  c.seeds = get<std::vector<std::uint64_t>>(j, "seeds");
  c.budget = get<std::uint64_t>(j, "budget");
  c.global_trials = get<std::uint64_t>(j, "global_trials");
  c.gamma = get<double>(j, "gamma");
  c.delta_v = get<double>(j, "delta_v");
  c.delta_pr = get<double>(j, "delta_pr");
  for (const auto& r : j.at("rows")) {
    require_keys(r, "compare.row",
                 {"strategy", "percent", "inputs", "findings", "wall_time", "median_percent",
                  "median_wall_time"});
    CompareRow row;
    row.strategy = parse_strategy(get<std::string>(r, "strategy"));
    row.percent = get<std::vector<double>>(r, "percent");
    row.inputs = get<std::vector<std::uint64_t>>(r, "inputs");
    row.findings = get<std::vector<std::uint64_t>>(r, "findings");
    row.wall_time = get<std::vector<double>>(r, "wall_time");
    row.median_percent = get<double>(r, "median_percent");
    row.median_wall_time = get<double>(r, "median_wall_time");
    c.rows.push_back(std::move(row));
  }
  return c;
}

}  // namespace

std::string serialize_report(const RunReport& r) {
  json j = {{"format_version", kReportFormatTag},
            {"command", r.command},
            {"model_ref", r.model_ref},
            {"domain_digest", r.domain_digest},
            {"model_digest", r.model_digest},
            {"wall_time", r.wall_time},
            {"error", opt(r.error)}};
  if (r.audit) j["audit"] = audit_json(*r.audit);
  if (r.estimation) j["estimation"] = estimate_json(*r.estimation);
  if (r.retrain) j["retrain"] = retrain_json(*r.retrain);
  if (r.compare) j["compare"] = compare_json(*r.compare);
  return j.dump(2) + "\n";
}

RunReport parse_report(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report is not valid JSON: ") + e.what());
  }
  require_keys(j, "report",
               {"format_version", "command", "model_ref", "domain_digest", "model_digest", "wall_time",
                "error"},
               {"audit", "estimation", "retrain", "compare"});
  if (get<std::string>(j, "format_version") != kReportFormatTag)
    throw ParseError("unsupported report format '" + get<std::string>(j, "format_version") + "'");
  RunReport r;
  r.command = get<std::string>(j, "command");
  r.model_ref = get<std::string>(j, "model_ref");
  r.domain_digest = get<std::string>(j, "domain_digest");
  r.model_digest = get<std::string>(j, "model_digest");
  r.wall_time = get<double>(j, "wall_time");
  r.error = get_opt<std::string>(j, "error");
  if (j.contains("audit")) r.audit = audit_from(j.at("audit"));
  if (j.contains("estimation")) r.estimation = estimate_from(j.at("estimation"));
  if (j.contains("retrain")) r.retrain = retrain_from(j.at("retrain"));
  if (j.contains("compare")) r.compare = compare_from(j.at("compare"));
  return r;
}

void write_report(const std::filesystem::path& path, const RunReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write report " + path.string());
  out << serialize_report(report);
}

RunReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open report " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_report(ss.str());
}

}  // namespace fairprobe
