#include "xintent/cli.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "xintent/annotator.hpp"
#include "xintent/corpus.hpp"
#include "xintent/lime.hpp"
#include "xintent/metrics.hpp"
#include "xintent/model.hpp"

namespace xintent {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw UserError("cannot open input file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) throw UserError("cannot open output file: " + path);
  return out;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Dataset load_corpus_strict(const std::string& path, std::size_t max_len) {
  std::ifstream in = open_input(path);
  IngestStats stats;
  Dataset dataset = read_jsonl(in, &stats, max_len);
  if (stats.rejected > 0) {
    throw UserError("corpus file " + path + " has " + std::to_string(stats.rejected) +
                    " invalid record(s); first: " + stats.reject_reasons.front());
  }
  if (dataset.records.empty()) throw UserError("corpus file " + path + " has no records");
  return dataset;
}

std::vector<std::string> token_forms(const ParsedUtterance& u) {
  std::vector<std::string> forms;
  forms.reserve(u.tokens.size());
  for (const Token& t : u.tokens) forms.push_back(t.form);
  return forms;
}

struct AnnotateOpts {
  std::string input;
  std::string output;
  std::string trace;
};

int cmd_annotate(const AnnotateOpts& o, std::ostream& out, std::ostream& err) {
  std::ifstream in = open_input(o.input);
  IngestStats stats;
  Dataset dataset = parse_conllu(in, &stats);

  std::ofstream trace_out;
  if (!o.trace.empty()) trace_out = open_output(o.trace);

  std::size_t all_zero = 0;
  for (AnnotatedUtterance& rec : dataset.records) {
    TraversalTrace trace;
    rec = annotate(rec.utterance, &trace);
    if (trace.all_zero) ++all_zero;
    if (trace_out.is_open()) {
      nlohmann::ordered_json line;
      line["id"] = rec.utterance.id;
      line["root"] = trace.root_index;
      auto level1 = nlohmann::ordered_json::array();
      for (const TraversalTrace::Level1Hit& hit : trace.level1) {
        level1.push_back({{"index", hit.index}, {"deprel", hit.deprel}});
      }
      line["level1"] = level1;
      line["compounds"] = trace.compounds;
      line["removed_stopwords"] = trace.removed_stopwords;
      line["mask"] = std::vector<int>(rec.mask->begin(), rec.mask->end());
      trace_out << line.dump() << "\n";
    }
  }

  std::ofstream out_file = open_output(o.output);
  write_jsonl(dataset, out_file);

  for (const std::string& reason : stats.reject_reasons) err << "rejected " << reason << "\n";
  out << "records=" << dataset.records.size() << "\n"
      << "multi_intent_dropped=" << stats.multi_intent_dropped << "\n"
      << "truncated=" << stats.truncated << "\n"
      << "rejected=" << stats.rejected << "\n"
      << "all_zero_masks=" << all_zero << "\n";
  return 0;
}

struct TrainOpts {
  std::string corpus;
  std::string model;
  TrainConfig config;
};

int cmd_train(const TrainOpts& o, std::ostream& out) {
  const Dataset dataset = load_corpus_strict(o.corpus, o.config.max_len);
  TrainResult result = train(dataset, o.config);
  std::ofstream model_out = open_output(o.model);
  save_model(result.params, model_out);
  out << "records=" << dataset.records.size() << "\n"
      << "labels=" << result.params.vocab.num_classes() << "\n"
      << "vocab=" << result.params.vocab.size() << "\n"
      << "ce=" << fmt17(result.final_losses.cross_entropy) << "\n"
      << "prior=" << fmt17(result.final_losses.prior) << "\n"
      << "joint=" << fmt17(result.final_losses.joint) << "\n";
  return 0;
}

struct ExplainOpts {
  std::string model;
  std::string corpus;
  std::string output;
  std::string method;
  std::string lime_class;
  std::uint64_t seed = 0;
  int ig_steps = 50;
  LimeConfig lime;
  std::size_t max_len = kDefaultMaxLen;
};

int cmd_explain(const ExplainOpts& o, std::ostream& out) {
  std::ifstream model_in = open_input(o.model);
  const ClassifierParams params = load_model(model_in);
  const Dataset dataset = load_corpus_strict(o.corpus, o.max_len);
  for (const std::string& label : dataset.labels) {
    if (params.vocab.label_index(label) < 0) {
      throw UserError("corpus label \"" + label + "\" is not in the model's label inventory");
    }
  }
  int lime_target = -1;
  if (!o.lime_class.empty()) {
    lime_target = params.vocab.label_index(o.lime_class);
    if (lime_target < 0) {
      throw UserError("label \"" + o.lime_class + "\" is not in the model's label inventory");
    }
  }

  const PredictFn fn = [&params, max_len = o.max_len](const std::vector<std::string>& tokens) {
    return predict_proba(params, tokens, max_len);
  };
  LimeConfig lime_config = o.lime;
  lime_config.seed = o.seed;

  std::ofstream out_file = open_output(o.output);
  const std::size_t c = static_cast<std::size_t>(params.vocab.num_classes());
  for (const AnnotatedUtterance& rec : dataset.records) {
    const std::vector<std::string> tokens = token_forms(rec.utterance);
    AttributionMap map;
    if (o.method == "ig") {
      const std::vector<int> ids = tokens_to_ids(params.vocab, tokens, o.max_len);
      map.id = rec.utterance.id;
      map.method = "ig";
      map.per_class = ig_logit_matrix(params, ids);
      map.attributions = class_averaged_attribution(map.per_class, ids.size(), c);
      map.probabilities = forward(params, ids);
      map.predicted_class = argmax_lowest(map.probabilities);
    } else {
      map = lime_explain(fn, tokens, rec.utterance.id, lime_target, lime_config);
    }
    nlohmann::ordered_json line;
    line["id"] = map.id;
    line["method"] = map.method;
    line["predicted_class"] = params.vocab.labels[static_cast<std::size_t>(map.predicted_class)];
    line["probabilities"] = map.probabilities;
    line["attributions"] = map.attributions;
    out_file << line.dump() << "\n";
  }
  out << "records=" << dataset.records.size() << "\n"
      << "method=" << o.method << "\n";
  return 0;
}

struct EvaluateOpts {
  std::string model;
  std::string corpus;
  std::string attributions;
  std::string output;
  std::size_t k = 5;
  std::size_t max_len = kDefaultMaxLen;
};

struct AttrRecord {
  std::string predicted;
  std::vector<double> attributions;
};

std::unordered_map<std::string, AttrRecord> read_attributions(const std::string& path,
                                                              const ClassifierParams& params) {
  std::ifstream in = open_input(path);
  std::unordered_map<std::string, AttrRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw UserError("attribution file line " + std::to_string(line_no) +
                      " is not valid JSON: " + e.what());
    }
    const std::string where = "attribution file line " + std::to_string(line_no);
    if (!j.is_object()) throw UserError(where + " must hold a JSON object");
    for (const char* field : {"id", "method", "predicted_class", "probabilities", "attributions"}) {
      if (!j.contains(field)) {
        throw UserError(where + " is missing field \"" + field + "\"");
      }
    }
    AttrRecord rec;
    std::string id;
    std::string method;
    std::vector<double> probabilities;
    try {
      id = j["id"].get<std::string>();
      method = j["method"].get<std::string>();
      rec.predicted = j["predicted_class"].get<std::string>();
      probabilities = j["probabilities"].get<std::vector<double>>();
      rec.attributions = j["attributions"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw UserError(where + " has a field of the wrong type: " + e.what());
    }
    if (method != "ig" && method != "lime") {
      throw UserError(where + " has unknown method \"" + method + "\"");
    }
    if (params.vocab.label_index(rec.predicted) < 0) {
      throw UserError(where + " predicts unknown label \"" + rec.predicted + "\"");
    }
    if (probabilities.size() != static_cast<std::size_t>(params.vocab.num_classes())) {
      throw UserError(where + " probability vector does not match the model's class count");
    }
    if (!records.emplace(id, std::move(rec)).second) {
      throw UserError("attribution file has duplicate id \"" + id + "\"");
    }
  }
  return records;
}

int cmd_evaluate(const EvaluateOpts& o, std::ostream& out) {
  std::ifstream model_in = open_input(o.model);
  const ClassifierParams params = load_model(model_in);
  const Dataset dataset = load_corpus_strict(o.corpus, o.max_len);
  const std::unordered_map<std::string, AttrRecord> attrs =
      read_attributions(o.attributions, params);

  std::unordered_set<std::string> corpus_ids;
  std::string missing;
  for (const AnnotatedUtterance& rec : dataset.records) {
    if (!corpus_ids.insert(rec.utterance.id).second) {
      throw UserError("corpus has duplicate id \"" + rec.utterance.id + "\"");
    }
    if (attrs.find(rec.utterance.id) == attrs.end()) {
      missing += missing.empty() ? "" : ", ";
      missing += rec.utterance.id;
    }
  }
  if (!missing.empty()) {
    throw UserError("missing attributions for corpus ids: " + missing);
  }
  std::string extra;
  for (const auto& [id, rec] : attrs) {
    if (corpus_ids.find(id) == corpus_ids.end()) {
      extra += extra.empty() ? "" : ", ";
      extra += id;
    }
  }
  if (!extra.empty()) {
    throw UserError("attributions for ids not present in the corpus: " + extra);
  }

  const PredictFn fn = [&params, max_len = o.max_len](const std::vector<std::string>& tokens) {
    return predict_proba(params, tokens, max_len);
  };

  double tf1_sum = 0.0;
  double suff_sum = 0.0;
  double comp_sum = 0.0;
  std::vector<Rationale> pred_rationales;
  std::vector<Rationale> gold_rationales;
  std::vector<std::string> pred_labels;
  std::vector<std::string> gold_labels;
  for (const AnnotatedUtterance& rec : dataset.records) {
    const std::vector<std::string> tokens = token_forms(rec.utterance);
    const AttrRecord& ar = attrs.at(rec.utterance.id);
    if (ar.attributions.size() != tokens.size()) {
      throw UserError("attribution length for record \"" + rec.utterance.id +
                      "\" does not match its token count");
    }
    if (!rec.mask.has_value()) {
      throw UserError("record \"" + rec.utterance.id +
                      "\" has no explanation_mask; evaluation needs gold rationales");
    }
    const Rationale gold = Rationale::from_mask(*rec.mask);
    const Rationale pred = topk_rationale(ar.attributions, o.k);
    tf1_sum += token_f1(pred, gold, tokens.size());

    const std::vector<double> probs = fn(tokens);
    const int j = argmax_lowest(probs);
    suff_sum += sufficiency(fn, tokens, pred, j);
    comp_sum += comprehensiveness(fn, tokens, pred, j);
    pred_labels.push_back(params.vocab.labels[static_cast<std::size_t>(j)]);
    gold_labels.push_back(rec.utterance.intent);
    pred_rationales.push_back(pred);
    gold_rationales.push_back(gold);
  }

  const ClassificationReport cls =
      classification_report(pred_labels, gold_labels, params.vocab.labels);
  const double count = static_cast<double>(dataset.records.size());
  MetricsReport report;
  report.accuracy = cls.accuracy;
  report.token_f1 = tf1_sum / count;
  report.iou_f1 = iou_f1(pred_rationales, gold_rationales);
  report.comprehensiveness = comp_sum / count;
  report.sufficiency = suff_sum / count;
  report.per_class = cls.per_class;
  report.count = dataset.records.size();

  nlohmann::ordered_json file;
  file["accuracy"] = report.accuracy;
  file["token_f1"] = report.token_f1;
  file["iou_f1"] = report.iou_f1;
  file["comprehensiveness"] = report.comprehensiveness;
  file["sufficiency"] = report.sufficiency;
  auto per_class = nlohmann::ordered_json::object();
  for (const auto& [label, stats] : report.per_class) {
    per_class[label] = {{"precision", stats.precision},
                        {"recall", stats.recall},
                        {"f1", stats.f1},
                        {"support", stats.support}};
  }
  file["per_class"] = per_class;
  file["config"] = {{"k", o.k},
                    {"count", report.count},
                    {"model", o.model},
                    {"corpus", o.corpus},
                    {"attributions", o.attributions}};
  std::ofstream out_file = open_output(o.output);
  out_file << file.dump(2) << "\n";

  out << "accuracy=" << fmt6(report.accuracy) << " token_f1=" << fmt6(report.token_f1)
      << " iou_f1=" << fmt6(report.iou_f1)
      << " comprehensiveness=" << fmt6(report.comprehensiveness)
      << " sufficiency=" << fmt6(report.sufficiency) << " count=" << report.count << "\n";
  for (const auto& [label, stats] : report.per_class) {
    out << "class=" << label << " precision=" << fmt6(stats.precision)
        << " recall=" << fmt6(stats.recall) << " f1=" << fmt6(stats.f1)
        << " support=" << stats.support << "\n";
  }
  return 0;
}

struct KappaOpts {
  std::string ratings;
};

int cmd_kappa(const KappaOpts& o, std::ostream& out) {
  std::ifstream in = open_input(o.ratings);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    if (!rows.empty() && cells.size() != rows.front().size()) {
      throw UserError("ratings file row " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(rows.front().size()));
    }
    for (const std::string& c : cells) {
      if (c.empty()) {
        throw UserError("ratings file row " + std::to_string(line_no) + " has an empty cell");
      }
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw UserError("ratings file is empty");
  const std::size_t raters = rows.front().size();
  if (raters < 2) throw UserError("ratings file needs at least two rater columns");

  std::unordered_map<std::string, std::size_t> category_index;
  std::vector<std::vector<std::size_t>> counts;
  for (const std::vector<std::string>& row : rows) {
    for (const std::string& label : row) category_index.emplace(label, category_index.size());
  }
  counts.assign(rows.size(), std::vector<std::size_t>(category_index.size(), 0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const std::string& label : rows[i]) counts[i][category_index[label]] += 1;
  }

  const KappaResult r = fleiss_kappa(AgreementTable{raters, std::move(counts)});
  out << "kappa=" << fmt6(r.kappa) << "\n"
      << "p_bar=" << fmt6(r.p_bar) << "\n"
      << "p_e=" << fmt6(r.p_e) << "\n"
      << "items=" << r.items << "\n"
      << "raters=" << r.raters << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dependency-based explanation signals for intent classification"};
  app.require_subcommand(1);

  AnnotateOpts a_opts;
  CLI::App* annotate_cmd =
      app.add_subcommand("annotate", "derive silver explanation masks from dependency parses");
  annotate_cmd->add_option("--input", a_opts.input, "CoNLL-U input file")->required();
  annotate_cmd->add_option("--output", a_opts.output, "annotated corpus JSONL")->required();
  annotate_cmd->add_option("--trace", a_opts.trace, "per-record traversal trace JSONL");

  TrainOpts t_opts;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train the intent classifier with the joint loss");
  train_cmd->add_option("--corpus", t_opts.corpus, "annotated corpus JSONL")->required();
  train_cmd->add_option("--model", t_opts.model, "model file to write")->required();
  train_cmd->add_option("--lambda", t_opts.config.lambda, "attribution prior weight")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--epochs", t_opts.config.epochs, "training epochs")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch-size", t_opts.config.batch_size, "mini-batch size")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--learning-rate", t_opts.config.learning_rate, "Adam step size")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--dim", t_opts.config.dim, "embedding dimension")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--ig-steps", t_opts.config.ig_steps, "attribution quadrature steps")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-len", t_opts.config.max_len, "token truncation length")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", t_opts.config.seed, "RNG seed");

  ExplainOpts e_opts;
  CLI::App* explain_cmd =
      app.add_subcommand("explain", "write per-token attributions for a corpus");
  explain_cmd->add_option("--model", e_opts.model, "model file")->required();
  explain_cmd->add_option("--corpus", e_opts.corpus, "corpus JSONL")->required();
  explain_cmd->add_option("--output", e_opts.output, "attribution JSONL to write")->required();
  explain_cmd->add_option("--method", e_opts.method, "attribution method")
      ->required()
      ->check(CLI::IsMember({"ig", "lime"}));
  explain_cmd->add_option("--seed", e_opts.seed, "RNG seed (lime sampling)");
  explain_cmd->add_option("--ig-steps", e_opts.ig_steps, "attribution quadrature steps")
      ->check(CLI::PositiveNumber);
  explain_cmd->add_option("--num-samples", e_opts.lime.num_samples, "lime perturbations")
      ->check(CLI::PositiveNumber);
  explain_cmd->add_option("--kernel-width", e_opts.lime.kernel_width, "lime kernel width")
      ->check(CLI::PositiveNumber);
  explain_cmd->add_option("--ridge-alpha", e_opts.lime.ridge_alpha, "lime ridge strength")
      ->check(CLI::NonNegativeNumber);
  explain_cmd->add_option("--max-len", e_opts.max_len, "token truncation length")
      ->check(CLI::PositiveNumber);
  explain_cmd->add_option("--lime-class", e_opts.lime_class,
                          "explain this label instead of the predicted class");

  EvaluateOpts v_opts;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "score attributions against gold masks and labels");
  evaluate_cmd->add_option("--model", v_opts.model, "model file")->required();
  evaluate_cmd->add_option("--corpus", v_opts.corpus, "corpus JSONL with gold masks")->required();
  evaluate_cmd->add_option("--attributions", v_opts.attributions, "attribution JSONL")
      ->required();
  evaluate_cmd->add_option("--output", v_opts.output, "metrics report JSON to write")->required();
  evaluate_cmd->add_option("--k", v_opts.k, "rationale budget")->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--max-len", v_opts.max_len, "token truncation length")
      ->check(CLI::PositiveNumber);

  KappaOpts k_opts;
  CLI::App* kappa_cmd =
      app.add_subcommand("kappa", "Fleiss' kappa for a TSV of rater labels");
  kappa_cmd->add_option("--ratings", k_opts.ratings, "TSV file, one item per row")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (annotate_cmd->parsed()) return cmd_annotate(a_opts, out, err);
    if (train_cmd->parsed()) return cmd_train(t_opts, out);
    if (explain_cmd->parsed()) return cmd_explain(e_opts, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(v_opts, out);
    if (kappa_cmd->parsed()) return cmd_kappa(k_opts, out);
  } catch (const UserError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
  err << "error: no subcommand given\n";
  return 2;
}

}  // namespace xintent
