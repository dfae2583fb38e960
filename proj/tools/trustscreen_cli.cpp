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

// Command-line front end. Talks to the library through the C interface only.
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "trustscreen/trustscreen.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct StatusError {
    ts_status status;
};

void check(ts_status s) {
    if (s != TS_OK) throw StatusError{s};
}

struct ConfigDeleter {
    void operator()(ts_config* c) const { ts_config_free(c); }
};
using ConfigPtr = std::unique_ptr<ts_config, ConfigDeleter>;

struct StringDeleter {
    void operator()(char* s) const { ts_string_free(s); }
};
using CString = std::unique_ptr<char, StringDeleter>;

const char* opt(const std::optional<std::string>& s) { return s ? s->c_str() : nullptr; }

/// Config-key overrides collected from subcommand flags.
class Overrides {
public:
    void add(std::string key, std::optional<std::string>* value) { string_.emplace_back(std::move(key), value); }
    void add_flag(std::string key, bool* value) { flag_.emplace_back(std::move(key), value); }

    void apply(ts_config* cfg) const {
        for (const auto& [key, value] : string_) {
            if (*value) check(ts_config_set(cfg, key.c_str(), (*value)->c_str()));
        }
        for (const auto& [key, value] : flag_) {
            if (*value) check(ts_config_set(cfg, key.c_str(), "true"));
        }
    }

private:
    std::vector<std::pair<std::string, std::optional<std::string>*>> string_;
    std::vector<std::pair<std::string, bool*>> flag_;
};

void print(char* raw) {
    CString s(raw);
    if (s) std::cout << s.get() << '\n';
}

std::string default_data_dir() {
    if (const char* env = std::getenv("TRUSTSCREEN_DATA")) return env;
    return "data";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trustscreen: anomaly-triggered tweet retrieval and reliability screening"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ts_version()));

    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::string data_dir = default_data_dir();
    std::optional<std::string> out_dir;
    std::vector<std::string> sets;
    bool dump_config = false;
    app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "seed for sampling, fold shuffles and forests");
    app.add_option("--data-dir", data_dir, "bundled data directory used for defaults (env TRUSTSCREEN_DATA)");
    app.add_option("--out-dir", out_dir, "directory for stage artifacts (output.dir)");
    app.add_option("--set", sets, "extra key=value override, repeatable");
    app.add_flag("--dump-config", dump_config, "print the effective configuration to stderr");

    Overrides ov;
    ov.add("output.dir", &out_dir);

    // detect
    auto* detect = app.add_subcommand("detect", "grade price anomalies");
    std::optional<std::string> d_prices, d_method, d_window, d_from, d_to, d_out;
    detect->add_option("--prices", d_prices, "price CSV");
    detect->add_option("--method", d_method, "arima, lof or iforest");
    detect->add_option("--window", d_window, "rolling window length");
    detect->add_option("--from", d_from, "first graded timestamp");
    detect->add_option("--to", d_to, "last graded timestamp");
    detect->add_option("--out", d_out, "copy of anomalies.jsonl");
    ov.add("data.prices", &d_prices);
    ov.add("anomaly.method", &d_method);
    ov.add("anomaly.window", &d_window);
    ov.add("anomaly.from", &d_from);
    ov.add("anomaly.to", &d_to);

    // retrieve
    auto* retrieve = app.add_subcommand("retrieve", "build and expand queries, collect tweets");
    std::optional<std::string> r_corpus, r_symbol, r_date, r_days, r_anomalies, r_out, r_trace;
    bool r_verified = false;
    retrieve->add_option("--corpus", r_corpus, "tweet corpus JSONL");
    retrieve->add_option("--symbol", r_symbol, "ticker or RIC");
    retrieve->add_option("--date", r_date, "retrieve around this date instead of detected anomalies");
    retrieve->add_option("--days", r_days, "date-range half width in days");
    retrieve->add_flag("--verified-only", r_verified, "restrict to verified authors");
    retrieve->add_option("--anomalies", r_anomalies, "anomalies.jsonl to read (default: output directory)");
    retrieve->add_option("--out", r_out, "copy of collection.jsonl");
    retrieve->add_option("--trace", r_trace, "copy of the per-anomaly query traces");
    ov.add("data.corpus", &r_corpus);
    ov.add("symbol", &r_symbol);
    ov.add("query.days", &r_days);
    ov.add_flag("query.verified_only", &r_verified);

    // assess
    auto* assess = app.add_subcommand("assess", "run the reliability filters over a collection");
    std::optional<std::string> a_collection, a_sidecar, a_bundle, a_mode, a_out;
    assess->add_option("--collection", a_collection, "collection JSONL (default: output directory)");
    assess->add_option("--sidecar", a_sidecar, "score sidecar JSONL");
    assess->add_option("--bundle", a_bundle, "trained detector bundle directory");
    assess->add_option("--mode", a_mode, "recall or precision");
    assess->add_option("--out", a_out, "copy of assessed.jsonl");
    ov.add("data.sidecar", &a_sidecar);
    ov.add("detector.bundle", &a_bundle);
    ov.add("neural.mode", &a_mode);

    // train-detector
    auto* train = app.add_subcommand("train-detector", "train the n-gram detector channels");
    std::optional<std::string> t_human, t_out;
    train->add_option("--human", t_human, "human tweet JSONL");
    train->add_option("--out", t_out, "bundle directory (default: <output>/detector)");
    ov.add("data.human_corpus", &t_human);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "metrics and combination grid for assessed records");
    std::optional<std::string> e_assessed, e_labels, e_direction;
    evaluate->add_option("--assessed", e_assessed, "assessed.jsonl (default: output directory)");
    evaluate->add_option("--labels", e_labels, "tweet JSONL carrying gold labels");
    evaluate->add_option("--direction", e_direction, "price direction for sentiment alignment: up or down");
    ov.add("data.labels", &e_labels);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "discriminator threshold sensitivity sweep");
    std::optional<std::string> s_assessed, s_labels, s_step, s_out;
    sweep->add_option("--assessed", s_assessed, "assessed.jsonl (default: output directory)");
    sweep->add_option("--labels", s_labels, "tweet JSONL carrying gold labels");
    sweep->add_option("--step", s_step, "threshold step, must divide 1");
    sweep->add_option("--out", s_out, "copy of sweep.csv");
    ov.add("data.labels", &s_labels);
    ov.add("sweep.step", &s_step);

    // report
    app.add_subcommand("report", "run detect, retrieve, assess and evaluate end to end");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        ts_config* raw = nullptr;
        check(ts_config_new(data_dir.c_str(), &raw));
        ConfigPtr cfg(raw);
        if (config_path) check(ts_config_load(cfg.get(), config_path->c_str()));
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: --set expects key=value, got '" << s << "'\n";
                return kExitValidation;
            }
            check(ts_config_set(cfg.get(), s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()));
        }
        ov.apply(cfg.get());
        if (seed) check(ts_config_set_seed(cfg.get(), *seed));
        if (dump_config) {
            char* text = nullptr;
            check(ts_config_dump(cfg.get(), &text));
            CString owned(text);
            std::cerr << owned.get();
        }

        char* summary = nullptr;
        if (*detect) {
            check(ts_detect(cfg.get(), opt(d_out), &summary));
        } else if (*retrieve) {
            check(ts_retrieve(cfg.get(), opt(r_anomalies), opt(r_date), opt(r_out), opt(r_trace), &summary));
        } else if (*assess) {
            check(ts_assess(cfg.get(), opt(a_collection), opt(a_out), &summary));
        } else if (*train) {
            check(ts_train_detector(cfg.get(), opt(t_out), &summary));
        } else if (*evaluate) {
            check(ts_evaluate(cfg.get(), opt(e_assessed), opt(e_direction), &summary));
        } else if (*sweep) {
            check(ts_sweep(cfg.get(), opt(s_assessed), opt(s_out), &summary));
        } else {
            check(ts_run_pipeline(cfg.get(), &summary));
        }
        print(summary);
        return kExitOk;
    } catch (const StatusError& e) {
        std::cerr << "error: " << ts_status_name(e.status) << ": " << ts_last_error() << '\n';
        return ts_status_is_validation(e.status) ? kExitValidation : kExitRuntime;
    }
}
