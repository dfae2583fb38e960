/**
 * Copyright 2026 The trustscreen Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trustscreen/anomaly.hpp"
#include "trustscreen/filters.hpp"
#include "trustscreen/learn.hpp"
#include "trustscreen/query.hpp"

namespace trustscreen::eval {

// ---------------------------------------------------------------------------
// Metrics. Positive = reliable; a predicted flag of true means reliable.

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

struct PrfSet {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double f0_5 = 0.0;
};

struct MetricsReport {
    ConfusionMatrix confusion;
    PrfSet reliable;
    PrfSet unreliable;
    PrfSet weighted;  ///< by true-class support
};

/// (1 + b^2) P R / (b^2 P + R), and 0 when the denominator is 0.
double f_beta(double precision, double recall, double beta);
PrfSet prf(double precision, double recall);

ConfusionMatrix confusion(const std::vector<Label>& gold, const std::vector<bool>& predicted_reliable);
MetricsReport metrics_from_confusion(const ConfusionMatrix& c);

/// NoLabels for an empty input; InvalidArgument when the lengths differ.
MetricsReport compute_metrics(const std::vector<Label>& gold, const std::vector<bool>& predicted_reliable);

/// Predicts every record unreliable.
std::vector<bool> baseline(std::size_t n);

/// Gold labels from class counts alone, reliable first.
std::vector<Label> labels_from_counts(std::size_t reliable, std::size_t unreliable);

std::string metrics_to_json(const MetricsReport& m, int indent = 2);

// ---------------------------------------------------------------------------
// Filter-combination grid

struct ComponentFlags {
    std::vector<bool> feature;
    std::vector<bool> neural_recall;
    std::vector<bool> neural_precision;
    std::vector<bool> argumentation;
    std::vector<bool> subjectivity;
};

struct GridRow {
    std::string name;  ///< "Baseline", "F", "N(R)", "F+N(P)+A+S", ...
    std::vector<bool> predicted;
    MetricsReport metrics;
};

/// Baseline first, then every non-empty subset of {F, N, A, S} by size and
/// then F, N, A, S order; subsets holding N appear once per mode (R then P).
std::vector<GridRow> combination_grid(const std::vector<Label>& gold, const ComponentFlags& flags);

/// Recovers both neural modes from the stored verdicts. Records must have
/// every filter enabled.
ComponentFlags component_flags(const std::vector<filters::ReliabilityRecord>& records);

std::string grid_to_csv(const std::vector<GridRow>& rows);

// ---------------------------------------------------------------------------
// Threshold sweep

struct SweepRow {
    double threshold = 0.0;
    PrfSet negative;
    PrfSet weighted;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    /// column name (neg_precision, ..., w_f0_5) -> first threshold attaining the maximum
    std::map<std::string, double> argmax;
};

/// Row i uses t = i / steps with roberta_real_hi = roberta_fake_hi = t; the
/// prediction is the synthetic filter's flag alone.
SweepResult threshold_sweep(const std::vector<Label>& gold, const std::vector<std::optional<double>>& roberta_real,
                            const std::vector<double>& gltr_fake, const filters::ConsensusConfig& base,
                            int steps = 100);

std::string sweep_to_csv(const SweepResult& s);
inline constexpr const char* kSweepHeader = "threshold,neg_precision,neg_recall,neg_f1,neg_f0_5,w_precision,w_recall,w_f1,w_f0_5";

// ---------------------------------------------------------------------------
// Detector training

struct DetectorOptions {
    int generator_order = 3;
    double generator_add_k = 0.001;
    std::array<int, 2> scorer_orders{3, 2};
    double scorer_add_k = 0.1;
    std::size_t train_size = 200;  ///< leading human tweets that train the language models
    lm::SampleOptions sampling{};
    int folds = 5;
    learn::Grid grid{};
};

struct ChannelReport {
    learn::KernelSpec spec;
    double grid_accuracy = 0.0;  ///< mean fold accuracy of the chosen cell
    double cv_accuracy = 0.0;    ///< calibrated pipeline, thresholded at 0.5
    double human_top_bin = 0.0;  ///< mean top-bin share, percent
    double synthetic_top_bin = 0.0;
};

struct DetectorTraining {
    filters::DetectorBundle bundle;
    std::array<ChannelReport, 2> channels;
    std::size_t human_rows = 0;
    std::size_t synthetic_rows = 0;
};

/// EmptyCorpus when fewer than train_size + 10 tweets are available.
DetectorTraining train_detector(const std::vector<Tweet>& human, const DetectorOptions& options, std::uint64_t seed);

std::string detector_report_json(const DetectorTraining& t);

// ---------------------------------------------------------------------------
// Configuration: flat `key = value` text, '#' comments

struct PipelineConfig {
    std::filesystem::path prices;
    std::filesystem::path symbols;
    std::filesystem::path corpus;
    std::filesystem::path labels;   ///< tweet stream carrying gold labels; empty = none
    std::filesystem::path sidecar;  ///< empty = none
    std::filesystem::path lexicons;
    std::filesystem::path human_corpus;
    std::filesystem::path profanity_model;  ///< empty = lexicon hit rate
    std::filesystem::path detector_bundle;  ///< empty = train into the output directory
    std::filesystem::path output_dir = "out";
    std::string symbol = "TWTR";

    std::string anomaly_method = "arima";  ///< arima, lof or iforest
    std::size_t anomaly_window = 20;
    std::optional<Instant> anomaly_from;
    std::optional<Instant> anomaly_to;
    int anomaly_min_severity = 3;
    anomaly::SearchCaps arima_caps{};
    std::size_t lof_k = 10;
    anomaly::IForestOptions iforest{};
    double outlier_threshold = 0.0;  ///< 0 = method default (LOF 1.5, IForest 0.6)

    int query_days = 3;
    bool query_verified_only = false;
    bool query_allow_any_days = false;
    query::PrfOptions prf{};

    filters::AssessConfig assess{};
    DetectorOptions detector{};
    int sweep_steps = 100;
    std::uint64_t seed = 0;
};

/// Defaults point at the bundled data directory.
PipelineConfig default_config(const std::filesystem::path& data_dir);

/// Relative paths resolve against `base_dir`, except output.dir which stays
/// relative to the working directory. ConfigError names the line and key.
PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir, PipelineConfig start);
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig start);

/// One `key = value` assignment; ConfigError for unknown keys or bad values.
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value,
                      const std::filesystem::path& base_dir);

std::vector<std::string> config_keys();
std::string config_to_text(const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Pipeline stages. Each writes its artifact into cfg.output_dir.

struct DetectOutput {
    anomaly::ArimaModel model;
    std::vector<anomaly::AnomalyReport> reports;   ///< every graded day in range
    std::vector<anomaly::AnomalyReport> selected;  ///< |severity| >= min severity
};

struct RetrieveOutput {
    std::vector<Tweet> collection;  ///< corpus order, one entry per id
    std::vector<query::PrfResult> expansions;  ///< one per selected anomaly
};

struct AssessStageOutput {
    filters::AssessOutput assessment;
    std::optional<DetectorTraining> training;  ///< when the bundle was trained here
};

struct ReportOutput {
    std::optional<MetricsReport> metrics;  ///< absent when no record has a gold label
    std::size_t labeled = 0;
    std::size_t unlabeled = 0;
    std::vector<GridRow> grid;
    std::optional<filters::AlignmentStats> alignment;
};

DetectOutput run_detect(const PipelineConfig& cfg);
/// Multivariate screening of (time, close, volume) rows inside [from, to].
struct OutlierPoint {
    Instant timestamp;
    double score = 0.0;
    bool is_outlier = false;
};

std::vector<OutlierPoint> run_detect_multivariate(const PipelineConfig& cfg);

std::vector<anomaly::AnomalyReport> read_anomalies(const std::filesystem::path& path);
RetrieveOutput run_retrieve(const PipelineConfig& cfg, const std::vector<anomaly::AnomalyReport>& selected);
AssessStageOutput run_assess(const PipelineConfig& cfg, const std::vector<Tweet>& collection);
ReportOutput run_report(const PipelineConfig& cfg, const std::vector<filters::ReliabilityRecord>& records,
                        std::optional<filters::Direction> direction = std::nullopt);

struct PipelineResult {
    DetectOutput detect;
    RetrieveOutput retrieve;
    AssessStageOutput assess;
    ReportOutput report;
};

/// detect -> retrieve -> assess -> report. A failing stage rethrows with its
/// name prefixed; artifacts of completed stages stay on disk.
PipelineResult run_pipeline(const PipelineConfig& cfg);

/// Gold labels by tweet id from cfg.labels (empty map when unset).
std::map<std::string, Label> load_gold_labels(const PipelineConfig& cfg);

}  // namespace trustscreen::eval
