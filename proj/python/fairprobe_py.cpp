#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fairprobe/commands.hpp"
#include "fairprobe/error.hpp"
#include "fairprobe/external_model.hpp"

namespace py = pybind11;
using namespace fairprobe;

namespace {

PointInput point(std::vector<Value> values) { return PointInput{std::move(values)}; }

LabeledDataset dataset(const std::vector<std::vector<Value>>& rows, const std::vector<Label>& labels) {
  if (rows.size() != labels.size()) throw UsageError("rows and labels differ in length");
  LabeledDataset d;
  d.source = "<python>";
  for (std::size_t i = 0; i < rows.size(); ++i) d.rows.push_back({point(rows[i]), labels[i]});
  return d;
}

py::object finding_dict(const std::optional<Finding>& f) {
  if (!f) return py::none();
  py::dict d;
  d["input"] = f->input.values;
  d["witness"] = f->witness.values;
  d["label_input"] = f->label_input;
  d["label_witness"] = f->label_witness;
  d["origin"] = std::string(to_string(f->origin));
  d["step"] = f->step;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fairprobe, m) {
  m.doc() = "Core of fairprobe: directed search for discriminatory inputs of a classifier";

  auto base = py::register_exception<Error>(m, "FairprobeError");
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<BoundError>(m, "BoundError", base.ptr());
  py::register_exception<SpecError>(m, "SpecError", base.ptr());
  py::register_exception<TrainingError>(m, "TrainingError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<InvariantError>(m, "InvariantError", base.ptr());
  py::register_exception<TransportError>(m, "TransportError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());

  py::class_<InputDomain>(m, "Domain")
      .def_static("parse", [](const std::string& text) { return parse_domain(text); })
      .def_static("load", [](const std::filesystem::path& p) { return load_domain(p); })
      .def("format", [](const InputDomain& d) { return format_domain(d); })
      .def("digest", &InputDomain::digest)
      .def("__len__", &InputDomain::size)
      .def_property_readonly("names",
                             [](const InputDomain& d) {
                               std::vector<std::string> names;
                               for (const auto& p : d.params()) names.push_back(p.name);
                               return names;
                             })
      .def_property_readonly("protected", &InputDomain::protected_indices)
      .def("variant_count", &InputDomain::variant_count)
      .def("contains", [](const InputDomain& d, std::vector<Value> x) { return d.contains(point(std::move(x))); })
      .def(
          "sample",
          [](const InputDomain& d, std::size_t n, std::uint64_t seed) {
            Rng rng(seed);
            std::vector<std::vector<Value>> out;
            for (std::size_t i = 0; i < n; ++i) out.push_back(sample_uniform(d, rng).values);
            return out;
          },
          py::arg("n"), py::arg("seed") = 0)
      .def("__eq__", [](const InputDomain& a, const InputDomain& b) { return a == b; })
      .def("__repr__", [](const InputDomain& d) { return "<Domain " + std::to_string(d.size()) + " params>"; });

  py::class_<Model, std::shared_ptr<Model>>(m, "Model")
      .def_property_readonly("kind", [](const Model& x) { return std::string(to_string(x.kind())); })
      .def_property_readonly("alphabet", &Model::alphabet)
      .def("digest", &Model::digest)
      .def("predict", [](const Model& x, std::vector<Value> in) { return x.predict(point(std::move(in))); })
      .def("predict_batch",
           [](const Model& x, const std::vector<std::vector<Value>>& rows) {
             std::vector<PointInput> in;
             for (const auto& r : rows) in.push_back(point(r));
             return x.predict_batch(in);
           })
      .def("serialize", [](const Model& x) { return serialize_model(x); })
      .def("save", [](const Model& x, const std::filesystem::path& p) { save_model(p, x); })
      .def("__repr__", [](const Model& x) { return "<Model " + std::string(to_string(x.kind())) + ">"; });

  // pybind11 holds models as shared_ptr<Model>; the core hands out shared_ptr<const Model>.
  auto hold = [](ModelHandle h) { return std::const_pointer_cast<Model>(std::move(h)); };

  m.def(
      "train",
      [hold](const InputDomain& d, const std::vector<std::vector<Value>>& rows, const std::vector<Label>& labels,
             const std::string& kind, int epochs, double learning_rate, int max_depth, int min_leaf,
             std::uint64_t seed) {
        const auto data = dataset(rows, labels);
        switch (parse_model_kind(kind)) {
          case ModelKind::logistic:
            return hold(train_logistic(d, data, {epochs, learning_rate, seed}));
          case ModelKind::tree:
            return hold(train_tree(d, data, {max_depth, min_leaf, seed}));
          default:
            throw UsageError("model kind '" + kind + "' is not trainable (use logistic or tree)");
        }
      },
      py::arg("domain"), py::arg("rows"), py::arg("labels"), py::arg("kind"), py::arg("epochs") = 500,
      py::arg("learning_rate") = 0.5, py::arg("max_depth") = 8, py::arg("min_leaf") = 1, py::arg("seed") = 0);
  m.def(
      "planted", [hold](const InputDomain& d, const std::string& spec) {
        return hold(make_planted(d, parse_planted_spec(spec, d)));
      },
      py::arg("domain"), py::arg("spec"), "Planted-bias model from its text spec");
  m.def("planted_fraction", [](const InputDomain& d, const std::string& spec) {
    return make_planted(d, parse_planted_spec(spec, d))->exact_fraction();
  });
  m.def("load_model", [hold](const std::filesystem::path& p, const InputDomain& d) { return hold(load_model(p, d)); });
  m.def("parse_model", [hold](const std::string& text, const InputDomain& d) { return hold(parse_model(text, d)); });
  m.def("connect_external",
        [hold](const std::string& cmd, const InputDomain& d) { return hold(connect_external(cmd, d)); });
  m.def("resolve_model",
        [hold](const std::string& ref, const InputDomain& d) { return hold(resolve_model(ref, d)); });

  m.def(
      "check_discriminatory",
      [](const Model& model, std::vector<Value> input, const InputDomain& d, double gamma) {
        return finding_dict(check_discriminatory(model, point(std::move(input)), d, {gamma}));
      },
      py::arg("model"), py::arg("input"), py::arg("domain"), py::arg("gamma") = 0.0);
  m.def(
      "perturb",
      [](std::vector<Value> input, std::size_t param, int delta, const InputDomain& d) {
        return perturb(point(std::move(input)), param, delta, d).values;
      },
      py::arg("input"), py::arg("param"), py::arg("delta"), py::arg("domain"));

  m.def(
      "audit",
      [](const Model& model, const InputDomain& d, const std::string& strategy, double gamma,
         std::uint64_t global_trials, std::optional<std::uint64_t> local_trials, std::uint64_t seed,
         std::optional<std::uint64_t> max_findings, std::optional<double> time_budget,
         std::optional<std::uint64_t> input_budget, double delta_v, double delta_pr, std::uint64_t findings_cap) {
        SearchConfig cfg;
        cfg.strategy = parse_strategy(strategy);
        cfg.discrimination.gamma = gamma;
        cfg.global_trials = global_trials;
        cfg.local_trials = local_trials;
        cfg.seed = seed;
        cfg.max_findings = max_findings;
        if (time_budget) cfg.time_budget = std::chrono::duration<double>(*time_budget);
        cfg.input_budget = input_budget;
        cfg.delta_v = delta_v;
        cfg.delta_pr = delta_pr;
        cfg.validate();
        AuditOutcome outcome;
        {
          py::gil_scoped_release release;
          Rng rng(seed);
          outcome = run_audit_partial(model, d, cfg, rng);
        }
        RunReport r;
        r.command = "audit";
        r.model_ref = "<python>";
        r.domain_digest = d.digest();
        r.model_digest = model.digest();
        r.audit = summarize(cfg, outcome.suite, findings_cap);
        r.wall_time = outcome.suite.wall_time.count();
        r.error = outcome.error;
        return serialize_report(r);
      },
      py::arg("model"), py::arg("domain"), py::arg("strategy") = "fully_directed", py::arg("gamma") = 0.0,
      py::arg("global_trials") = 1000, py::arg("local_trials") = std::optional<std::uint64_t>(1000),
      py::arg("seed") = 0, py::arg("max_findings") = py::none(), py::arg("time_budget") = py::none(),
      py::arg("input_budget") = py::none(), py::arg("delta_v") = 0.001, py::arg("delta_pr") = 0.001,
      py::arg("findings_cap") = 1000, "Runs an audit and returns the report as JSON text");

  m.def(
      "estimate",
      [](const Model& model, const InputDomain& d, std::uint64_t m_, std::uint64_t K, double gamma,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        Rng rng(seed);
        return estimate_fraction(model, d, {gamma}, m_, K, rng);
      },
      py::arg("model"), py::arg("domain"), py::arg("m") = 1000, py::arg("K") = 100, py::arg("gamma") = 0.0,
      py::arg("seed") = 0);

  py::class_<EstimationResult>(m, "Estimate")
      .def_readonly("point_estimate", &EstimationResult::point_estimate)
      .def_readonly("ci_low", &EstimationResult::ci_low)
      .def_readonly("ci_high", &EstimationResult::ci_high)
      .def_readonly("trials", &EstimationResult::trials)
      .def_readonly("samples_per_trial", &EstimationResult::samples_per_trial)
      .def_readonly("per_trial", &EstimationResult::per_trial)
      .def("running_mean", &EstimationResult::running_mean)
      .def("__repr__", [](const EstimationResult& r) {
        return "<Estimate " + format_double(r.point_estimate) + "% [" + format_double(r.ci_low) + ", " +
               format_double(r.ci_high) + "]>";
      });

  m.def("detection_probability", &detection_probability, py::arg("fraction"), py::arg("n"));

  py::class_<RetrainIteration>(m, "RetrainIteration")
      .def_readonly("i", &RetrainIteration::i)
      .def_readonly("p_i", &RetrainIteration::p_i)
      .def_readonly("rows_added", &RetrainIteration::rows_added)
      .def_readonly("estimate_before", &RetrainIteration::estimate_before)
      .def_readonly("estimate_after", &RetrainIteration::estimate_after)
      .def_readonly("accepted", &RetrainIteration::accepted);

  m.def(
      "retrain",
      [hold](const InputDomain& d, const std::string& kind, const std::vector<std::vector<Value>>& rows,
             const std::vector<Label>& labels, const std::vector<std::vector<Value>>& discriminatory,
             std::uint64_t m_, std::uint64_t K, double gamma, std::uint64_t seed, int epochs, double learning_rate,
             int max_depth, int min_leaf) {
        const auto data = dataset(rows, labels);
        Trainer trainer;
        switch (parse_model_kind(kind)) {
          case ModelKind::logistic:
            trainer = [&d, o = LogisticOptions{epochs, learning_rate, seed}](const LabeledDataset& x) -> ModelHandle {
              return train_logistic(d, x, o);
            };
            break;
          case ModelKind::tree:
            trainer = [&d, o = TreeOptions{max_depth, min_leaf, seed}](const LabeledDataset& x) -> ModelHandle {
              return train_tree(d, x, o);
            };
            break;
          default:
            throw UsageError("model kind '" + kind + "' is not trainable (use logistic or tree)");
        }
        std::vector<PointInput> found;
        for (const auto& x : discriminatory) found.push_back(point(x));
        RetrainReport r;
        {
          py::gil_scoped_release release;
          Rng rng(seed);
          r = retrain_loop(trainer, d, data, found, {m_, K, {gamma}}, rng);
        }
        py::dict out;
        out["model"] = hold(r.final_model);
        out["iterations"] = r.iterations;
        out["initial_estimate"] = r.initial_estimate;
        out["final_estimate"] = r.final_estimate;
        out["total_added"] = r.total_added;
        out["percent_added"] = r.percent_added;
        out["improvement_percent"] = r.improvement_percent;
        out["exit"] = std::string(to_string(r.exit));
        return out;
      },
      py::arg("domain"), py::arg("kind"), py::arg("rows"), py::arg("labels"), py::arg("discriminatory"),
      py::arg("m") = 1000, py::arg("K") = 100, py::arg("gamma") = 0.0, py::arg("seed") = 0, py::arg("epochs") = 500,
      py::arg("learning_rate") = 0.5, py::arg("max_depth") = 8, py::arg("min_leaf") = 1);

  // File-based commands, same behaviour as the CLI. Each returns the report text.
  m.def(
      "cmd_train",
      [](const std::filesystem::path& domain_file, const std::filesystem::path& csv_file, const std::string& kind,
         const std::filesystem::path& out_path, const std::string& label_column, std::uint64_t seed) {
        TrainArgs a;
        a.domain_file = domain_file;
        a.csv_file = csv_file;
        a.model_kind = kind;
        a.out_path = out_path;
        a.label_column = label_column;
        a.logistic.seed = a.tree.seed = seed;
        return serialize_model(*cmd_train(a));
      },
      py::arg("domain_file"), py::arg("csv_file"), py::arg("model_kind"), py::arg("out_path"),
      py::arg("label_column") = "label", py::arg("seed") = 0);
  m.def(
      "cmd_audit",
      [](const std::filesystem::path& domain_file, const std::string& model_ref, const std::string& strategy,
         std::uint64_t global_trials, std::uint64_t local_trials, std::uint64_t seed,
         const std::string& report_out) {
        AuditArgs a;
        a.domain_file = domain_file;
        a.model_ref = model_ref;
        a.config.strategy = parse_strategy(strategy);
        a.config.global_trials = global_trials;
        a.config.local_trials = local_trials;
        a.config.seed = seed;
        a.report_out = report_out;
        py::gil_scoped_release release;
        return serialize_report(cmd_audit(a));
      },
      py::arg("domain_file"), py::arg("model_ref"), py::arg("strategy") = "fully_directed",
      py::arg("global_trials") = 1000, py::arg("local_trials") = 1000, py::arg("seed") = 0,
      py::arg("report_out") = "");
  m.def(
      "cmd_estimate",
      [](const std::filesystem::path& domain_file, const std::string& model_ref, std::uint64_t m_, std::uint64_t K,
         double gamma, std::uint64_t seed, const std::string& report_out) {
        EstimateArgs a{domain_file, model_ref, gamma, m_, K, seed, report_out};
        py::gil_scoped_release release;
        return serialize_report(cmd_estimate(a));
      },
      py::arg("domain_file"), py::arg("model_ref"), py::arg("m") = 1000, py::arg("K") = 100, py::arg("gamma") = 0.0,
      py::arg("seed") = 0, py::arg("report_out") = "");
  m.def(
      "cmd_retrain",
      [](const std::filesystem::path& domain_file, const std::string& kind, const std::filesystem::path& csv_file,
         const std::filesystem::path& findings_file, std::uint64_t m_, std::uint64_t K, std::uint64_t seed,
         const std::string& report_out) {
        RetrainArgs a;
        a.domain_file = domain_file;
        a.model_kind = kind;
        a.csv_file = csv_file;
        a.findings_file = findings_file;
        a.m = m_;
        a.K = K;
        a.seed = seed;
        a.report_out = report_out;
        py::gil_scoped_release release;
        return serialize_report(cmd_retrain(a));
      },
      py::arg("domain_file"), py::arg("model_kind"), py::arg("csv_file"), py::arg("findings_file"),
      py::arg("m") = 1000, py::arg("K") = 100, py::arg("seed") = 0, py::arg("report_out") = "");
  m.def(
      "cmd_compare",
      [](const std::filesystem::path& domain_file, const std::string& model_ref, std::vector<std::uint64_t> seeds,
         std::uint64_t budget, unsigned threads, const std::string& report_out) {
        CompareArgs a;
        a.domain_file = domain_file;
        a.model_ref = model_ref;
        a.seeds = std::move(seeds);
        a.budget = budget;
        a.threads = threads;
        a.report_out = report_out;
        py::gil_scoped_release release;
        return serialize_report(cmd_compare(a));
      },
      py::arg("domain_file"), py::arg("model_ref"), py::arg("seeds"), py::arg("budget") = 20000,
      py::arg("threads") = 0, py::arg("report_out") = "");
}
