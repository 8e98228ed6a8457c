#pragma once

#include <filesystem>

#include "gardin/config.hpp"

namespace gardin::cli {

/// The pipeline stages behind the CLI verbs. Each writes its artifacts plus
/// a manifest under cfg.out_dir and prints a short summary to stdout.
/// Failures are reported via the library exception types; the binary maps
/// them onto exit codes.

/// Generates the synthetic dataset into cfg.out_dir. Refuses to write into
/// an existing non-empty directory unless force is set.
void cmd_synth(const RunConfig& cfg, bool force);

/// Trains GARDiN on the train split of cfg.dataset_root; writes
/// gardin_checkpoint.bin, gardin_loss_log.csv, gardin_summary.json.
void cmd_train_gardin(const RunConfig& cfg);

/// Computes PMSRE vectors of the train split through the GARDiN checkpoint
/// and trains the classifier; writes alrec_checkpoint.bin,
/// alrec_loss_log.csv, alrec_summary.json and pmsre_train.csv.
void cmd_train_alrec(const RunConfig& cfg);

/// Scores the test split; writes scores.csv (video_id,frame,score_raw,
/// score_final) and pmsre_test.csv.
void cmd_score(const RunConfig& cfg);

/// Evaluates frame-level AUC of scores.csv against the test labels; prints
/// the one-line record and writes auc.json.
void cmd_eval(const RunConfig& cfg);

/// Runs the loss-subset and distance-combination sweeps on the dataset,
/// printing both tables and writing ablation.csv.
void cmd_ablate(const RunConfig& cfg);

}  // namespace gardin::cli
