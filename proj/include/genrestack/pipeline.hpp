#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "genrestack/corpus.hpp"
#include "genrestack/gbdt.hpp"
#include "genrestack/perceptron.hpp"

namespace genrestack {

// Loaded from an INI file:
//
//   [pipeline]  target_genre, output_dir, kb, use_kb, include_target_base,
//               permissive_xpos, jobs
//   [genres]    <genre> = <conllu path>   (concatenated into the multi-genre
//                                          models)
//   [extra]     <name> = <conllu path>    (extra base corpora, not
//                                          concatenated)
//   [split]     unit (document|sentence), train, dev, test, seed
//   [base]      epochs, seed
//   [meta]      rounds, max_depth, learning_rate, l2, min_child_weight,
//               subsample, seed
//
// Relative paths resolve against the config file's directory.
struct PipelineConfig {
  std::map<std::string, std::filesystem::path> genres;
  std::map<std::string, std::filesystem::path> extra;
  std::string target_genre;
  SplitSpec split;
  std::optional<std::filesystem::path> kb_path;
  PerceptronParams base;
  GbdtParams meta;
  std::filesystem::path output_dir = "genrestack-out";
  bool include_target_base = false;
  bool use_kb = true;
  bool permissive_xpos = false;
  int jobs = 1;

  // Applies one seed to the split, the base taggers and the meta-learner.
  void set_seed(std::uint64_t seed);
};

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);

// Throws ConfigError: unknown target genre, missing files, name clashes, or
// fewer than two ensemble members.
void validate(const PipelineConfig& config);

inline constexpr std::string_view kMultiGenreModel = "multiple-genres";
std::string multi_genre_without(std::string_view target);

struct PipelineStatus {
  int exit_code = 0;
  std::string failed_stage;  // empty on success
  std::string message;
};

// split -> train-base -> train-ensemble -> evaluate -> ablate. Every stage
// records its outcome in <output_dir>/status.tsv; a failure names the stage
// there and in the returned status.
PipelineStatus run_pipeline(const PipelineConfig& config, std::ostream& log);

}  // namespace genrestack
