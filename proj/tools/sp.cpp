// sp: command-line front end for the spatial pooler library.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spforge/spforge.hpp"

using namespace spforge;

namespace {

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write " + path);
  return out;
}

SdrBatch read_batch(const std::string& path) {
  auto in = open_in(path);
  return read_sdr_csv(in);
}

SpState read_model(const std::string& path) {
  auto in = open_in(path, true);
  return load(in);
}

void write_rows(std::ostream& out, const std::vector<std::vector<double>>& rows) {
  out << std::setprecision(17);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
}

void print_kv(const std::vector<std::pair<std::string, double>>& kv) {
  std::size_t w = 0;
  for (const auto& [k, v] : kv) w = std::max(w, k.size());
  std::cout << std::setprecision(12);
  for (const auto& [k, v] : kv) std::cout << std::left << std::setw(static_cast<int>(w)) << k << " = " << v << '\n';
}

// ---------------------------------------------------------------------------

struct StatsArgs {
  std::string config, csv;
  double p_active = 0.5;
};

int run_stats(const StatsArgs& a) {
  auto in = open_in(a.config);
  auto params = validate(read_config(in));
  const auto& s = params.raw();
  auto eq1 = visibility_stats(s.p, s.q, s.m, ConnectModel::eq1);
  auto ex = visibility_stats(s.p, s.q, s.m, ConnectModel::exact);
  auto act = activity_stats(params, a.p_active);
  std::vector<std::pair<std::string, double>> kv = {
      {"p_connect", eq1.p_connect},
      {"p_connect_exact", ex.p_connect},
      {"expected_cols_per_input", eq1.expected_cols_per_input},
      {"p_never_connected", eq1.p_never},
      {"expected_unobserved", eq1.expected_unobserved},
      {"expected_unobserved_exact", ex.expected_unobserved},
      {"pi_x", act.pi_x},
      {"pi_ac", act.pi_ac},
      {"expected_active_per_column", act.expected_active_per_column},
      {"expected_active_connected", act.expected_active_connected},
      {"expected_cols_at_threshold", act.expected_cols_at_threshold},
      {"expected_cols_active_connected_at_threshold", act.expected_cols_active_connected_at_threshold},
  };
  print_kv(kv);
  if (!a.csv.empty()) {
    auto out = open_out(a.csv);
    out << "key,value\n" << std::setprecision(17);
    for (const auto& [k, v] : kv) out << k << ',' << v << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config, data, model, trace;
  std::size_t epochs = 1;
  bool no_boost = false, global = false, local = false;
};

int run_train(const TrainArgs& a) {
  SpParams p;
  if (!a.config.empty()) {
    auto in = open_in(a.config);
    p = read_config(in);
  }
  if (a.no_boost) p.boost_enabled = false;
  if (a.global) p.inhibition_mode = InhibitionMode::global;
  if (a.local) p.inhibition_mode = InhibitionMode::local;
  auto batch = read_batch(a.data);
  if (batch.width != p.p)
    throw ShapeError("data width " + std::to_string(batch.width) + " does not match p = " + std::to_string(p.p));
  p.n = batch.size();
  auto state = initialize(validate(p));

  std::ofstream trace;
  if (!a.trace.empty()) {
    trace = open_out(a.trace);
    trace << "iteration,boosted_overlap_count,boosted_permanence_count,inhibition_radius\n";
  }
  train(state, batch, a.epochs, [&](std::size_t, std::size_t, const ComputeTrace& t) {
    if (trace.is_open())
      trace << t.iteration << ',' << t.boosted_overlap_count << ',' << t.boosted_permanence_count << ','
            << t.inhibition_radius << '\n';
  });
  auto out = open_out(a.model, true);
  save(state, out);
  std::cout << "trained " << state.iteration << " steps, inhibition radius " << state.inhibition_radius << ", model "
            << a.model << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct TransformArgs {
  std::string model, data, out;
};

int run_transform(const TransformArgs& a) {
  auto state = read_model(a.model);
  auto out = open_out(a.out);
  write_sdr_csv(out, transform(state, read_batch(a.data)));
  return 0;
}

// ---------------------------------------------------------------------------

struct FeaturesArgs {
  std::string model, mode, data, out;
};

int run_features(const FeaturesArgs& a) {
  auto state = read_model(a.model);
  auto probs = attribute_probabilities(state);
  auto out = open_out(a.out);
  auto need_data = [&] {
    if (a.data.empty()) throw Error("--mode " + a.mode + " needs --data");
    return read_batch(a.data);
  };
  if (a.mode == "probabilistic") {
    if (a.data.empty())
      write_rows(out, {probs.phi_hat});
    else
      write_rows(out, probabilistic_features(need_data(), probs));
  } else if (a.mode == "mask") {
    write_sdr_row(out, attribute_mask(probs, state.params->rho_s));
  } else if (a.mode == "reduce") {
    write_sdr_csv(out, reduce(need_data(), attribute_mask(probs, state.params->rho_s)));
  } else if (a.mode == "reconstruct") {
    // Rows of width m are column activations; rows of width p are inputs, run through the pooler first.
    auto batch = need_data();
    if (batch.width == state.p() && batch.width != state.m()) batch = transform(state, batch);
    for (const auto& c : batch.rows) write_sdr_row(out, reconstruct(state, c));
  } else {
    throw Error("unknown features mode '" + a.mode + "'");
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct TheoryArgs {
  double x_bar = -1, kappa = 0.015;
  bool fit = false;
  std::string data, model;
};

void print_increments(double kappa, double x_bar, const DerivedIncrements* d) {
  std::cout << std::setprecision(12) << "kappa     = " << kappa << '\n' << "x_bar     = " << x_bar << '\n';
  if (!d) {
    std::cout << "feasible  = no (kappa must not exceed min(x_bar, 1 - x_bar) = "
              << std::min(x_bar, 1 - x_bar) << ")\n";
    return;
  }
  std::cout << "phi_plus  = " << d->phi_plus << '\n'
            << "phi_minus = " << d->phi_minus << '\n'
            << "feasible  = yes\n";
}

int run_theory(const TheoryArgs& a) {
  double x_bar = a.x_bar;
  std::optional<XBar> counted;
  if (a.fit) {
    if (a.data.empty() || a.model.empty()) throw Error("--fit needs --data and --model");
    auto state = read_model(a.model);
    counted = estimate_x_bar(state, read_batch(a.data));
    if (counted->t == 0) throw Error("no samples in " + a.data);
    x_bar = counted->value();
    std::cout << "samples   = " << counted->t << " gathered synapse inputs, " << counted->ones << " active\n";
  } else if (x_bar < 0) {
    throw Error("theory needs --x-bar or --fit");
  }
  if (!increments_feasible(a.kappa, x_bar)) {
    print_increments(a.kappa, x_bar, nullptr);
    return 2;
  }
  auto d = counted ? derived_increments(a.kappa, *counted) : derived_increments(a.kappa, x_bar);
  print_increments(a.kappa, x_bar, &d);
  return 0;
}

// ---------------------------------------------------------------------------
// Encoder spec: key=value lines.
//   bits = 50               bits per attribute
//   label = last | none     whether the final field is a class label
//   categories.<a> = x,y,z  fixed block order for attribute a (0-based); others use first appearance
// ---------------------------------------------------------------------------

struct EncodeArgs {
  std::string spec, in, out, labels;
};

int run_encode(const EncodeArgs& a) {
  std::uint32_t bits = 50;
  bool has_label = true;
  std::map<std::size_t, std::vector<std::string>> fixed;
  {
    auto in = open_in(a.spec);
    std::string line;
    while (std::getline(in, line)) {
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = detail::trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) throw FormatError("encoder spec: expected key=value, got '" + line + "'");
      auto key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
      if (key == "bits")
        bits = detail::parse_number<std::uint32_t>(key, value);
      else if (key == "label")
        has_label = value == "last" ? true : value == "none" ? false : throw FormatError("label must be last or none");
      else if (key.rfind("categories.", 0) == 0)
        fixed[detail::parse_number<std::size_t>(key, key.substr(11))] = detail::split_csv_line(value);
      else
        throw FormatError("encoder spec: unknown key '" + key + "'");
    }
  }
  auto in = open_in(a.in);
  auto d = load_categorical_csv(in, has_label);
  auto spec = encoder_for(d, bits);
  for (const auto& [attr, cats] : fixed) {
    if (attr >= spec.parts.size()) throw FormatError("categories." + std::to_string(attr) + ": no such attribute");
    spec.parts[attr].categories = cats;
  }
  auto out = open_out(a.out);
  for (std::size_t n = 0; n < d.size(); ++n) {
    std::vector<std::string> values;
    for (std::size_t j = 0; j < d.attributes(); ++j) values.push_back(d.vocab[j][d.records[n][j]]);
    write_sdr_row(out, encode_record(spec, values));
  }
  if (!a.labels.empty()) {
    auto lab = open_out(a.labels);
    for (auto l : d.labels) lab << d.classes[l] << '\n';
  }
  std::cout << "encoded " << d.size() << " records into " << spec.width() << " bits\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BoostArgs {
  std::string sparsity = "0.50,0.70,0.72,0.74,0.76,0.80,0.90", preset = "desk", out;
  std::size_t trials = 0, epochs = 0;
  std::uint64_t seed = 0;
  bool global = false, local = false, check = false;
};

int run_boost(const BoostArgs& a) {
  auto cfg = sweep_preset(a.preset);
  if (a.trials) cfg.trials = a.trials;
  if (a.epochs) cfg.epochs = a.epochs;
  cfg.sp.seed = a.seed;
  if (a.local) cfg.sp.inhibition_mode = InhibitionMode::local;
  if (a.global) cfg.sp.inhibition_mode = InhibitionMode::global;
  auto sparsities = parse_range(a.sparsity);
  auto res = run_boost_sweep(cfg, sparsities);

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.out.empty()) {
    file = open_out(a.out);
    out = &file;
  }
  *out << "sparsity,epoch,metric,q1,median,q3\n" << std::setprecision(10);
  for (const auto& r : res)
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
      const auto& ob = r.overlap_boost[e];
      const auto& pb = r.permanence_boost[e];
      *out << r.sparsity << ',' << e + 1 << ",overlap_boost," << ob.q1 << ',' << ob.median << ',' << ob.q3 << '\n';
      *out << r.sparsity << ',' << e + 1 << ",permanence_boost," << pb.q1 << ',' << pb.median << ',' << pb.q3 << '\n';
    }
  if (!a.check) return 0;

  // Shape check: 0.74 beats 0.50 and 0.90 in at least 4 of 5 trials and is front-loaded.
  auto find = [&](double s) -> const SweepResult* {
    for (const auto& r : res)
      if (std::abs(r.sparsity - s) < 1e-9) return &r;
    return nullptr;
  };
  const auto *lo = find(0.50), *mid = find(0.74), *hi = find(0.90);
  if (!lo || !mid || !hi) {
    std::cerr << "--assert needs sparsities 0.50, 0.74 and 0.90\n";
    return 1;
  }
  std::size_t wins = 0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const double m = epoch_average(mid->trials[t].permanence_boost);
    wins += m > epoch_average(lo->trials[t].permanence_boost) && m > epoch_average(hi->trials[t].permanence_boost);
  }
  const bool front = mid->permanence_boost.front().median >= mid->permanence_boost.back().median;
  const bool ok = wins * 5 >= cfg.trials * 4 && front;
  std::cerr << (ok ? "PASS" : "FAIL") << ": 0.74 wins " << wins << "/" << cfg.trials << ", front-loaded "
            << (front ? "yes" : "no") << '\n';
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct ClassifyArgs {
  std::string dataset = "car", mode = "column", out, data, images, labels, preset = "desk";
  std::size_t splits = 0, per_class = 100;
  std::uint32_t bits = 50;
  std::uint64_t seed = 0;
  bool check = false;
};

int run_classify(const ClassifyArgs& a) {
  const auto mode = parse_feature_mode(a.mode);
  ClassificationConfig cfg;
  LabeledBatch data;
  if (a.dataset == "car" || a.dataset == "csv") {
    if (a.data.empty()) throw Error("--dataset " + a.dataset + " needs --data");
    auto in = open_in(a.data);
    auto d = a.dataset == "car" ? load_car_eval(in) : load_categorical_csv(in, true);
    auto spec = encoder_for(d, a.bits);
    data = {encode_dataset(spec, d), d.labels};
    cfg = car_preset();
    cfg.sp.p = static_cast<std::uint32_t>(spec.width());
  } else if (a.dataset == "digits") {
    cfg = a.preset == "paper" ? digits_paper_preset() : digits_desk_preset();
    if (!a.images.empty()) {
      if (a.labels.empty()) throw Error("--images needs --labels");
      auto ii = open_in(a.images, true);
      auto li = open_in(a.labels, true);
      auto imgs = load_idx_images(ii);
      auto labs = load_idx_labels(li);
      data.patterns = binarize_all(imgs);
      data.labels.assign(labs.begin(), labs.end());
      cfg.sp.p = static_cast<std::uint32_t>(data.patterns.width);
    } else {
      auto digits = synthetic_digits(a.per_class, a.seed);
      data = {binarize_all(digits.images), digits.labels};
    }
  } else {
    throw Error("unknown dataset '" + a.dataset + "' (car, digits or csv)");
  }
  if (a.splits) cfg.splits = a.splits;
  cfg.sp.seed = a.seed;
  auto rep = run_classification(cfg, data, mode);

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.out.empty()) {
    file = open_out(a.out);
    out = &file;
  }
  *out << "split,mode,error,dims_in,dims_out\n" << std::setprecision(10);
  for (const auto& s : rep.splits)
    *out << s.split << ',' << to_string(mode) << ',' << s.error << ',' << s.dims_in << ',' << s.dims_out << '\n';
  std::cerr << "median error " << rep.median_error << " (raw baseline " << rep.median_baseline_error << ")\n";
  if (!a.check) return 0;

  bool ok = true;
  if (mode == FeatureMode::reduction) {
    for (const auto& s : rep.splits) ok = ok && s.dims_out < s.dims_in;
    ok = ok && std::abs(rep.median_error - rep.median_baseline_error) <= 0.05;
  } else if (a.dataset == "car") {
    ok = rep.median_error <= 0.5 * rep.median_baseline_error && rep.median_error <= 0.10;
  } else {
    ok = rep.median_error <= rep.median_baseline_error + 0.05;
  }
  std::cerr << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial pooler tools"};
  app.require_subcommand(1);

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Initial visibility and activity statistics for a configuration");
  c_stats->add_option("--config", stats.config, "key=value parameter file")->required();
  c_stats->add_option("--p-active", stats.p_active, "per-input activation probability")->check(CLI::Range(0.0, 1.0));
  c_stats->add_option("--csv", stats.csv, "also write key,value CSV here");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a pooler on a 0/1 CSV and save the model");
  c_train->add_option("--config", tr.config, "key=value parameter file");
  c_train->add_option("--data", tr.data, "0/1 CSV, one pattern per row")->required();
  c_train->add_option("--epochs", tr.epochs, "passes over the data");
  c_train->add_option("--model", tr.model, "output model file")->required();
  c_train->add_option("--trace", tr.trace, "per-step telemetry CSV");
  c_train->add_flag("--no-boost", tr.no_boost, "disable boosting");
  auto* g = c_train->add_flag("--global", tr.global, "global inhibition");
  auto* l = c_train->add_flag("--local", tr.local, "local inhibition");
  g->excludes(l);

  TransformArgs tf;
  auto* c_tf = app.add_subcommand("transform", "Column activations for each pattern");
  c_tf->add_option("--model", tf.model)->required();
  c_tf->add_option("--data", tf.data)->required();
  c_tf->add_option("--out", tf.out)->required();

  FeaturesArgs fe;
  auto* c_fe = app.add_subcommand("features", "Learned input-space features");
  c_fe->add_option("--model", fe.model)->required();
  c_fe->add_option("--mode", fe.mode)->required()->check(CLI::IsMember({"probabilistic", "mask", "reduce", "reconstruct"}));
  c_fe->add_option("--data", fe.data);
  c_fe->add_option("--out", fe.out)->required();

  TheoryArgs th;
  auto* c_th = app.add_subcommand("theory", "Increment pair from the Bernoulli likelihood");
  c_th->add_option("--x-bar", th.x_bar, "mean input activity");
  c_th->add_option("--kappa", th.kappa, "step scale");
  c_th->add_flag("--fit", th.fit, "estimate x_bar from --data through --model");
  c_th->add_option("--data", th.data);
  c_th->add_option("--model", th.model);

  EncodeArgs en;
  auto* c_en = app.add_subcommand("encode", "Categorical CSV to 0/1 CSV");
  c_en->add_option("--spec", en.spec, "encoder spec file")->required();
  c_en->add_option("--in", en.in)->required();
  c_en->add_option("--out", en.out)->required();
  c_en->add_option("--labels", en.labels, "write class labels, one per line");

  auto* c_ex = app.add_subcommand("experiment", "Reproduction experiments");
  c_ex->require_subcommand(1);
  BoostArgs bo;
  auto* c_bo = c_ex->add_subcommand("boost", "Boost frequency against input sparsity");
  c_bo->add_option("--sparsity", bo.sparsity, "lo:hi:step or comma list");
  c_bo->add_option("--trials", bo.trials);
  c_bo->add_option("--epochs", bo.epochs);
  c_bo->add_option("--preset", bo.preset)->check(CLI::IsMember({"desk", "paper"}));
  c_bo->add_option("--seed", bo.seed);
  c_bo->add_option("--out", bo.out, "CSV output (stdout if omitted)");
  auto* bg = c_bo->add_flag("--global", bo.global);
  auto* bl = c_bo->add_flag("--local", bo.local);
  bg->excludes(bl);
  c_bo->add_flag("--assert", bo.check, "exit nonzero unless the expected shape holds");

  ClassifyArgs cl;
  auto* c_cl = c_ex->add_subcommand("classify", "Linear classification on pooler features");
  c_cl->add_option("--dataset", cl.dataset)->check(CLI::IsMember({"car", "digits", "csv"}));
  c_cl->add_option("--mode", cl.mode)->check(CLI::IsMember({"column", "probabilistic", "reduction"}));
  c_cl->add_option("--splits", cl.splits);
  c_cl->add_option("--data", cl.data, "car or csv file");
  c_cl->add_option("--images", cl.images, "IDX image file for digits");
  c_cl->add_option("--labels", cl.labels, "IDX label file for digits");
  c_cl->add_option("--per-class", cl.per_class, "synthetic digits per class");
  c_cl->add_option("--preset", cl.preset)->check(CLI::IsMember({"desk", "paper"}));
  c_cl->add_option("--bits", cl.bits, "bits per categorical attribute");
  c_cl->add_option("--seed", cl.seed);
  c_cl->add_option("--out", cl.out, "CSV output (stdout if omitted)");
  c_cl->add_flag("--assert", cl.check, "exit nonzero unless the expected direction holds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_stats) return run_stats(stats);
    if (*c_train) return run_train(tr);
    if (*c_tf) return run_transform(tf);
    if (*c_fe) return run_features(fe);
    if (*c_th) return run_theory(th);
    if (*c_en) return run_encode(en);
    if (*c_bo) return run_boost(bo);
    if (*c_cl) return run_classify(cl);
  } catch (const ParamError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
