// roomgroup: groups listing photos into room spaces and assigns bed types.
//
// Subcommands run either the whole pipeline or a single stage with file
// handoff. Diagnostics go to stderr as JSON lines, summaries to stdout.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "roomgroup/bedmap.hpp"
#include "roomgroup/catalog.hpp"
#include "roomgroup/errors.hpp"
#include "roomgroup/metrics.hpp"
#include "roomgroup/pipeline.hpp"
#include "roomgroup/room_typing.hpp"
#include "roomgroup/rng.hpp"
#include "roomgroup/synthgen.hpp"

namespace fs = std::filesystem;
using namespace roomgroup;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRemote = 4;

const char* kCatalogFile = "catalog.json";
const char* kTruthFile = "truth.json";
const char* kScoresFile = "scores.csv";
const char* kEmbeddingsFile = "embeddings.rgec";
const char* kWeightsFile = "weights.json";

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError: return kExitConfig;
    case ErrorKind::RemoteFailure: return kExitRemote;
    default: return kExitData;
  }
}

void emit(const Diagnostic& d) { std::cerr << to_json_line(d) << '\n'; }

void emit_all(const Diagnostics& diags, const std::string& property_id) {
  for (const auto& d : diags.records()) {
    Diagnostic tagged = d;
    if (!property_id.empty()) tagged.message = property_id + ": " + d.message;
    emit(tagged);
  }
}

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorKind::ConfigError, msg); }

struct Settings {
  std::vector<std::string> inputs;
  std::string backend = "precomputed";
  std::string scores, embeddings, weights, truth, grouping, rules;
  double tau = 0.5;
  std::uint64_t seed = 0;
  double noise = 0.0;
  std::string predictor = "first-option";
  std::string endpoint;
  int retries = 2;
  std::size_t jobs = 1;
  std::size_t score_threads = 1;
  std::string out, out_dir;
};

// One property's input files. Flags win over directory defaults.
struct PropertyInput {
  fs::path catalog;
  std::optional<fs::path> dir;
  fs::path scores, embeddings, weights, truth;
};

fs::path pick(const std::string& flag_value, const std::optional<fs::path>& dir,
              const char* default_name) {
  if (!flag_value.empty()) return flag_value;
  if (dir) return *dir / default_name;
  return {};
}

// Directories holding catalog.json are single properties; other directories
// are scanned one level down for property directories.
std::vector<PropertyInput> resolve_inputs(const Settings& s) {
  if (s.inputs.empty()) config_error("no input given");
  std::vector<PropertyInput> out;
  for (const auto& raw : s.inputs) {
    const fs::path path(raw);
    if (!fs::exists(path)) config_error("input '" + raw + "' does not exist");
    if (fs::is_directory(path)) {
      if (fs::exists(path / kCatalogFile)) {
        out.push_back({path / kCatalogFile, path, {}, {}, {}, {}});
        continue;
      }
      std::vector<fs::path> dirs;
      for (const auto& entry : fs::directory_iterator(path))
        if (entry.is_directory() && fs::exists(entry.path() / kCatalogFile))
          dirs.push_back(entry.path());
      if (dirs.empty()) config_error("directory '" + raw + "' holds no " + kCatalogFile);
      std::sort(dirs.begin(), dirs.end());
      for (const auto& d : dirs) out.push_back({d / kCatalogFile, d, {}, {}, {}, {}});
    } else {
      out.push_back({path, std::nullopt, {}, {}, {}, {}});
    }
  }
  const bool explicit_files = !s.scores.empty() || !s.embeddings.empty() ||
                              !s.weights.empty() || !s.truth.empty() || !s.grouping.empty();
  if (explicit_files && out.size() > 1)
    config_error("--scores/--embeddings/--weights/--truth/--grouping need a single property input");
  for (auto& in : out) {
    in.scores = pick(s.scores, in.dir, kScoresFile);
    in.embeddings = pick(s.embeddings, in.dir, kEmbeddingsFile);
    in.weights = pick(s.weights, in.dir, kWeightsFile);
    in.truth = pick(s.truth, in.dir, kTruthFile);
  }
  return out;
}

void require_file(const fs::path& path, const std::string& flag, const std::string& why) {
  if (path.empty()) config_error(flag + " is required " + why);
  if (!fs::is_regular_file(path))
    config_error(flag + ": file '" + path.string() + "' does not exist");
}

void check_backend(const Settings& s, const std::vector<PropertyInput>& inputs) {
  for (const auto& in : inputs) {
    if (s.backend == "precomputed") {
      require_file(in.scores, "--scores", "with --backend precomputed");
    } else if (s.backend == "head") {
      require_file(in.embeddings, "--embeddings", "with --backend head");
      require_file(in.weights, "--weights", "with --backend head");
    } else {
      require_file(in.truth, "--truth", "with --backend oracle");
    }
  }
}

void check_predictor(const Settings& s, const std::vector<PropertyInput>& inputs) {
  if (s.predictor == "remote" && s.endpoint.empty())
    config_error("--endpoint is required with --predictor remote");
  if (s.predictor == "oracle")
    for (const auto& in : inputs) require_file(in.truth, "--truth", "with --predictor oracle");
}

void check_outputs(const Settings& s, std::size_t inputs) {
  if (!s.out.empty() && !s.out_dir.empty()) config_error("use either --out or --out-dir");
  if (inputs > 1 && s.out_dir.empty()) config_error("--out-dir is required for several inputs");
}

PipelineOptions pipeline_options(const Settings& s) {
  PipelineOptions o;
  if (!s.rules.empty()) {
    if (!fs::is_regular_file(s.rules)) config_error("--rules: file '" + s.rules + "' does not exist");
    o.rules = load_rules(s.rules);
  }
  o.tau = s.tau;
  o.seed = s.seed;
  o.score_threads = s.score_threads;
  return o;
}

std::unique_ptr<ScorerBackend> make_backend(const Settings& s, const PropertyInput& in) {
  if (s.backend == "precomputed") return std::make_unique<PrecomputedScores>(load_pair_scores(in.scores));
  if (s.backend == "head")
    return std::make_unique<LinearHead>(read_embedding_cache(in.embeddings),
                                        load_head_weights(in.weights));
  SynthConfig cfg;
  cfg.score_noise_sigma = s.noise;
  cfg.seed = s.seed;
  return std::make_unique<SyntheticOracle>(load_truth(in.truth), cfg);
}

std::optional<BedAssignment> assign_beds(const Settings& s, const PropertyInput& in,
                                         GroupingOutput& grouping, const PropertyCatalog& catalog,
                                         Diagnostics& diags) {
  if (s.predictor == "none") return std::nullopt;
  if (s.predictor == "oracle") {
    OracleFromTruth oracle(bed_truth_for_groups(grouping, load_truth(in.truth)));
    return map_bedrooms(grouping, catalog, oracle, &diags);
  }
  if (s.predictor == "remote") {
    RemoteOptions ro;
    ro.endpoint = s.endpoint;
    ro.retries = s.retries;
    if (const char* token = std::getenv("ROOMGROUP_PREDICTOR_TOKEN")) ro.token = token;
    RemoteService remote(ro);
    return map_bedrooms(grouping, catalog, remote, &diags);
  }
  FirstOption first;
  return map_bedrooms(grouping, catalog, first, &diags);
}

std::string summarize(const GroupingOutput& g) {
  std::ostringstream os;
  os << g.property_id << ':';
  for (const auto& [type, groups] : g.room_types) {
    std::size_t images = 0;
    for (const auto& group : groups) images += group.image_ids.size();
    os << ' ' << type << ' ' << groups.size() << " group(s)/" << images << " image(s);";
  }
  os << ' ' << g.unassigned.size() << " unassigned";
  return os.str();
}

struct JobResult {
  std::string property_id;
  std::string document;
  std::string summary;
  Diagnostics diagnostics;
  std::optional<Diagnostic> failure;
  int exit_code = 0;
};

// Runs `work` on every input with up to `jobs` threads. Results keep input
// order so output does not depend on scheduling.
template <class Work>
std::vector<JobResult> run_jobs(const std::vector<PropertyInput>& inputs, std::size_t jobs,
                                Work work) {
  std::vector<JobResult> results(inputs.size());
  auto run_one = [&](std::size_t i) {
    JobResult& r = results[i];
    try {
      work(inputs[i], r);
    } catch (const Error& e) {
      r.failure = Diagnostic{"error", std::string(error_kind_name(e.kind())), e.what()};
      r.exit_code = exit_code_for(e.kind());
    } catch (const std::exception& e) {
      r.failure = Diagnostic{"error", "Internal", e.what()};
      r.exit_code = kExitData;
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, inputs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < inputs.size(); ++i) run_one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < inputs.size(); i = next++) run_one(i);
    });
  for (auto& t : pool) t.join();
  return results;
}

int finish(const Settings& s, std::vector<JobResult>& results, const std::string& extension) {
  int code = 0;
  if (!s.out_dir.empty()) fs::create_directories(s.out_dir);
  for (auto& r : results) {
    emit_all(r.diagnostics, r.property_id);
    if (r.failure) {
      emit(*r.failure);
      if (code == 0) code = r.exit_code;
      continue;
    }
    if (!s.out_dir.empty()) {
      const fs::path path = fs::path(s.out_dir) / (r.property_id + extension);
      write_text_file(path, r.document);
      std::cout << r.summary << " -> " << path.string() << '\n';
    } else if (!s.out.empty()) {
      write_text_file(s.out, r.document);
      std::cout << r.summary << " -> " << s.out << '\n';
    } else {
      std::cout << r.document;
    }
  }
  return code;
}

int cmd_pipeline(const Settings& s) {
  const auto inputs = resolve_inputs(s);
  check_outputs(s, inputs.size());
  check_backend(s, inputs);
  check_predictor(s, inputs);
  const PipelineOptions options = pipeline_options(s);
  auto results = run_jobs(inputs, s.jobs, [&](const PropertyInput& in, JobResult& r) {
    const PropertyCatalog catalog = load_catalog(in.catalog, &r.diagnostics);
    r.property_id = catalog.property_id;
    auto backend = make_backend(s, in);
    PipelineResult result = run_pipeline(catalog, *backend, nullptr, options);
    r.diagnostics.append(result.diagnostics);
    assign_beds(s, in, result.output, catalog, r.diagnostics);
    r.document = serialize_grouping(result.output);
    r.summary = summarize(result.output);
  });
  return finish(s, results, ".json");
}

int cmd_score(const Settings& s) {
  const auto inputs = resolve_inputs(s);
  check_outputs(s, inputs.size());
  if (s.backend == "precomputed") config_error("score needs --backend head or --backend oracle");
  check_backend(s, inputs);
  const PipelineOptions options = pipeline_options(s);
  auto results = run_jobs(inputs, s.jobs, [&](const PropertyInput& in, JobResult& r) {
    const PropertyCatalog catalog = load_catalog(in.catalog, &r.diagnostics);
    r.property_id = catalog.property_id;
    auto backend = make_backend(s, in);
    PairScores scores;
    std::size_t encoder = 0, head = 0, pairs = 0;
    for (const auto& [type, build] : score_property(catalog, *backend, options, &r.diagnostics)) {
      add_pair_scores(scores, build.matrix);
      encoder += build.calls.encoder_calls;
      head += build.calls.head_calls;
      pairs += pair_count(build.matrix.size());
    }
    r.document = serialize_pair_scores(scores);
    r.summary = r.property_id + ": " + std::to_string(pairs) + " pair(s), " +
                std::to_string(encoder) + " encoder call(s), " + std::to_string(head) +
                " head call(s)";
  });
  return finish(s, results, ".csv");
}

int cmd_cluster(const Settings& s) {
  const auto inputs = resolve_inputs(s);
  check_outputs(s, inputs.size());
  for (const auto& in : inputs) require_file(in.scores, "--scores", "for cluster");
  const PipelineOptions options = pipeline_options(s);
  auto results = run_jobs(inputs, s.jobs, [&](const PropertyInput& in, JobResult& r) {
    const PropertyCatalog catalog = load_catalog(in.catalog, &r.diagnostics);
    r.property_id = catalog.property_id;
    const PairScores scores = load_pair_scores(in.scores);
    std::map<std::string, OverlapMatrix> matrices;
    for (const auto& [type, ids] : bucket_images(catalog, options.rules).clustered)
      matrices.emplace(type, matrix_from_pair_scores(scores, ids));
    const GroupingOutput grouping = cluster_property(catalog, matrices, options, &r.diagnostics);
    r.document = serialize_grouping(grouping);
    r.summary = summarize(grouping);
  });
  return finish(s, results, ".json");
}

int cmd_map(const Settings& s) {
  const auto inputs = resolve_inputs(s);
  check_outputs(s, inputs.size());
  check_predictor(s, inputs);
  if (s.grouping.empty() && inputs.size() == 1 && !inputs[0].dir)
    config_error("--grouping is required for map");
  auto results = run_jobs(inputs, s.jobs, [&](const PropertyInput& in, JobResult& r) {
    const PropertyCatalog catalog = load_catalog(in.catalog, &r.diagnostics);
    r.property_id = catalog.property_id;
    const fs::path grouping_path = pick(s.grouping, in.dir, "grouping.json");
    require_file(grouping_path, "--grouping", "for map");
    GroupingOutput grouping = load_grouping(grouping_path);
    if (grouping.property_id != catalog.property_id)
      fail(ErrorKind::SchemaViolation, "grouping is for property '" + grouping.property_id +
                                           "', catalog is '" + catalog.property_id + "'");
    validate_coverage(grouping, catalog);
    assign_beds(s, in, grouping, catalog, r.diagnostics);
    r.document = serialize_grouping(grouping);
    r.summary = summarize(grouping);
  });
  return finish(s, results, ".json");
}

std::vector<fs::path> collect(const std::vector<std::string>& paths, const std::string& flag,
                              bool truth_files) {
  std::vector<fs::path> out;
  for (const auto& raw : paths) {
    const fs::path p(raw);
    if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        const auto name = e.path().filename().string();
        if (truth_files ? name == kTruthFile : e.path().extension() == ".json") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      config_error(flag + ": '" + raw + "' does not exist");
    }
  }
  if (out.empty()) config_error(flag + " names no files");
  return out;
}

int cmd_eval(const Settings& s, const std::vector<std::string>& preds,
             const std::vector<std::string>& truths) {
  std::vector<GroupingOutput> predictions;
  for (const auto& p : collect(preds, "--pred", false)) predictions.push_back(load_grouping(p));
  std::map<std::string, GroundTruth> by_id;
  for (const auto& p : collect(truths, "--truth", true)) {
    GroundTruth t = load_truth(p);
    by_id[t.property_id] = std::move(t);
  }
  std::vector<GroundTruth> aligned;
  for (const auto& p : predictions) {
    auto it = by_id.find(p.property_id);
    if (it == by_id.end())
      fail(ErrorKind::MissingTruth, "no truth for property '" + p.property_id + "'");
    aligned.push_back(it->second);
  }
  const MetricReport report = evaluate(predictions, aligned);
  const std::string doc = serialize_report(report);
  if (s.out.empty()) {
    std::cout << doc;
    return 0;
  }
  write_text_file(s.out, doc);
  std::ostringstream os;
  os << report.properties.size() << " propert" << (report.properties.size() == 1 ? "y" : "ies")
     << ": bedroom ARI " << report.overall.ari << ", V " << report.overall.v_measure
     << ", accuracy " << report.overall.accuracy << " -> " << s.out << '\n';
  std::cout << os.str();
  return 0;
}

std::map<std::string, int> parse_rooms(const std::string& text) {
  std::map<std::string, int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) config_error("--rooms: expected TYPE=COUNT, got '" + item + "'");
    const auto type = parse_room_type(canonical_label(item.substr(0, eq)));
    if (!type || *type == RoomType::Other)
      config_error("--rooms: unknown room type '" + item.substr(0, eq) + "'");
    int count = 0;
    try {
      count = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      config_error("--rooms: bad count in '" + item + "'");
    }
    if (count < 1) config_error("--rooms: count must be at least 1 in '" + item + "'");
    out[std::string(room_type_name(*type))] = count;
  }
  if (out.empty()) config_error("--rooms is empty");
  return out;
}

std::pair<int, int> parse_range(const std::string& text) {
  try {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
      const int n = std::stoi(text);
      return {n, n};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::exception&) {
    config_error("--images-per-room: expected N or MIN..MAX, got '" + text + "'");
  }
}

struct SynthArgs {
  std::string rooms = "bedroom=2";
  std::string images = "2..5";
  std::size_t count = 1;
};

int cmd_synth(const Settings& s, const SynthArgs& a) {
  if (s.out.empty()) config_error("--out DIR is required for synth");
  SynthConfig base;
  base.rooms_per_type = parse_rooms(a.rooms);
  std::tie(base.images_min, base.images_max) = parse_range(a.images);
  base.score_noise_sigma = s.noise;
  try {
    base.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (a.count < 1) config_error("--count must be at least 1");
  for (std::size_t i = 0; i < a.count; ++i) {
    SynthConfig cfg = base;
    cfg.seed = a.count == 1 ? s.seed : mix_seed(s.seed, i);
    if (a.count > 1) cfg.property_id = "S" + std::to_string(s.seed) + "-" + std::to_string(i);
    const SyntheticProperty property = generate_property(cfg);
    const fs::path dir = a.count == 1 ? fs::path(s.out) : fs::path(s.out) / property.catalog.property_id;
    fs::create_directories(dir);
    write_catalog(property.catalog, dir / kCatalogFile);
    write_truth(property.truth, dir / kTruthFile);
    const SynthEncoding enc = synth_embeddings_and_weights(property);
    write_embedding_cache(enc.embeddings, dir / kEmbeddingsFile);
    write_text_file(dir / kWeightsFile, serialize_head_weights(enc.weights));

    SyntheticOracle oracle(property.truth, cfg);
    PairScores scores;
    std::map<std::string, std::vector<std::string>> by_type;
    for (const auto& image : property.truth.images) by_type[image.room_type].push_back(image.image_id);
    for (const auto& [type, ids] : by_type) add_pair_scores(scores, build_overlap_matrix(ids, oracle).matrix);
    write_pair_scores(scores, dir / kScoresFile);
    std::cout << property.catalog.property_id << ": " << property.truth.rooms.size() << " room(s), "
              << property.catalog.images.size() << " image(s) -> " << dir.string() << '\n';
  }
  return 0;
}

int cmd_pairs(const Settings& s, const PairCounts& counts) {
  const auto inputs = resolve_inputs(s);
  check_outputs(s, inputs.size());
  for (const auto& in : inputs) require_file(in.truth, "--truth", "for pairs");
  auto results = run_jobs(inputs, s.jobs, [&](const PropertyInput& in, JobResult& r) {
    const PropertyCatalog catalog = load_catalog(in.catalog, &r.diagnostics);
    r.property_id = catalog.property_id;
    const PairManifest manifest = generate_pair_manifest(catalog, load_truth(in.truth), counts, s.seed);
    r.document = serialize_manifest(manifest);
    r.summary = r.property_id + ": " + std::to_string(manifest.rows.size()) + " manifest row(s)";
  });
  return finish(s, results, ".pairs.json");
}

void add_inputs(CLI::App* sub, Settings& s) {
  sub->add_option("inputs", s.inputs, "Property directories or catalog files")->required();
  sub->add_option("--truth", s.truth, "Ground-truth document");
  sub->add_option("--jobs", s.jobs, "Properties processed in parallel")->check(CLI::PositiveNumber);
}

void add_backend(CLI::App* sub, Settings& s) {
  sub->add_option("--backend", s.backend, "Overlap scorer")
      ->check(CLI::IsMember({"precomputed", "head", "oracle"}));
  sub->add_option("--scores", s.scores, "Pair score CSV");
  sub->add_option("--embeddings", s.embeddings, "Embedding cache file");
  sub->add_option("--weights", s.weights, "Head weights document");
  sub->add_option("--noise", s.noise, "Score noise for --backend oracle")->check(CLI::NonNegativeNumber);
  sub->add_option("--score-threads", s.score_threads, "Pair scoring threads per property")
      ->check(CLI::PositiveNumber);
}

void add_clustering(CLI::App* sub, Settings& s) {
  sub->add_option("--tau", s.tau, "Noise removal threshold")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--rules", s.rules, "Room typing rules document");
}

void add_predictor(CLI::App* sub, Settings& s) {
  sub->add_option("--predictor", s.predictor, "Bed type predictor")
      ->check(CLI::IsMember({"none", "oracle", "first-option", "remote"}));
  sub->add_option("--endpoint", s.endpoint, "Remote predictor URL");
  sub->add_option("--retries", s.retries, "Remote retries")->check(CLI::NonNegativeNumber);
}

void add_outputs(CLI::App* sub, Settings& s) {
  sub->add_option("--out", s.out, "Output file");
  sub->add_option("--out-dir", s.out_dir, "Output directory, one file per property");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group listing photos into room spaces"};
  app.set_config("--config", "", "Read options from a TOML/INI file; flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  Settings s;
  app.add_option("--seed", s.seed, "Seed for every random choice");

  auto* pipeline = app.add_subcommand("pipeline", "Type, score, cluster, and map beds");
  add_inputs(pipeline, s);
  add_backend(pipeline, s);
  add_clustering(pipeline, s);
  add_predictor(pipeline, s);
  add_outputs(pipeline, s);

  auto* score = app.add_subcommand("score", "Write pair overlap scores");
  add_inputs(score, s);
  add_backend(score, s);
  score->add_option("--rules", s.rules, "Room typing rules document");
  add_outputs(score, s);

  auto* cluster = app.add_subcommand("cluster", "Cluster from pair scores");
  add_inputs(cluster, s);
  cluster->add_option("--scores", s.scores, "Pair score CSV");
  add_clustering(cluster, s);
  add_outputs(cluster, s);

  auto* map = app.add_subcommand("map", "Assign bed types to bedroom groups");
  add_inputs(map, s);
  map->add_option("--grouping", s.grouping, "Grouping document");
  add_predictor(map, s);
  add_outputs(map, s);

  std::vector<std::string> preds, truths;
  auto* eval = app.add_subcommand("eval", "Score groupings against ground truth");
  eval->add_option("--pred", preds, "Grouping files or directories")->required();
  eval->add_option("--truth", truths, "Truth files or directories (truth.json)")->required();
  eval->add_option("--out", s.out, "Report file");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate synthetic properties");
  synth->add_option("--rooms", synth_args.rooms, "Rooms per type, e.g. bedroom=4,bathroom=2");
  synth->add_option("--images-per-room", synth_args.images, "N or MIN..MAX");
  synth->add_option("--noise", s.noise, "Gaussian score noise sigma")->check(CLI::NonNegativeNumber);
  synth->add_option("--count", synth_args.count, "Number of properties");
  synth->add_option("--out", s.out, "Output directory")->required();

  PairCounts counts;
  auto* pairs = app.add_subcommand("pairs", "Write a training pair manifest");
  add_inputs(pairs, s);
  pairs->add_option("--positives", counts.self_supervised_pos, "Self-supervised positive pairs");
  pairs->add_option("--negatives", counts.negatives, "Negative pairs");
  pairs->add_option("--manual", counts.manual_slots, "Manual labelling slots");
  add_outputs(pairs, s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*pipeline) return cmd_pipeline(s);
    if (*score) return cmd_score(s);
    if (*cluster) return cmd_cluster(s);
    if (*map) return cmd_map(s);
    if (*eval) return cmd_eval(s, preds, truths);
    if (*synth) return cmd_synth(s, synth_args);
    if (*pairs) return cmd_pairs(s, counts);
  } catch (const Error& e) {
    emit({"error", std::string(error_kind_name(e.kind())), e.what()});
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    emit({"error", "Internal", e.what()});
    return kExitData;
  }
  return 0;
}
