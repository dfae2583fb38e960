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
#include "trustscreen/trustscreen.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include <json.hpp>

#include "trustscreen/evaluation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trustscreen;

struct ts_config {
    eval::PipelineConfig cfg;
};

namespace {

thread_local std::string g_last_error;

char* dup(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

/// Runs `fn`, mapping exceptions to status codes and recording the message.
template <typename Fn>
ts_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        g_last_error.clear();
        return TS_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return static_cast<ts_status>(e.code());
    } catch (const fs::filesystem_error& e) {
        g_last_error = e.what();
        return TS_IO_ERROR;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return TS_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = std::string("internal error: ") + e.what();
        return TS_INTERNAL;
    } catch (...) {
        g_last_error = "internal error";
        return TS_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

void emit(char** summary, const json& j) {
    if (summary) *summary = dup(j.dump(2));
}

void copy_out(const fs::path& produced, const char* out_path) {
    if (!out_path) return;
    const fs::path target(out_path);
    if (fs::exists(target) && fs::equivalent(produced, target)) return;
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::copy_file(produced, target, fs::copy_options::overwrite_existing);
}

json prf_json(const eval::PrfSet& p) {
    return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}, {"f0_5", p.f0_5}};
}

std::optional<filters::Direction> strongest_direction(const std::vector<anomaly::AnomalyReport>& reports,
                                                      int min_severity) {
    const anomaly::AnomalyReport* best = nullptr;
    for (const auto& a : reports) {
        if (std::abs(a.severity) < min_severity) continue;
        if (!best || std::abs(a.error) > std::abs(best->error)) best = &a;
    }
    if (!best) return std::nullopt;
    return best->severity < 0 ? filters::Direction::Down : filters::Direction::Up;
}

json report_json(const eval::ReportOutput& r) {
    json j{{"labeled", r.labeled}, {"unlabeled", r.unlabeled}};
    if (r.metrics) {
        j["unreliable"] = prf_json(r.metrics->unreliable);
        j["weighted"] = prf_json(r.metrics->weighted);
    }
    if (r.alignment) j["alignment_percent"] = r.alignment->percent;
    j["grid_rows"] = r.grid.size();
    return j;
}

}  // namespace

extern "C" {

const char* ts_version(void) { return TS_VERSION_STRING; }

const char* ts_last_error(void) { return g_last_error.c_str(); }

const char* ts_status_name(ts_status status) {
    // Names are string literals; the view is NUL-terminated.
    return error_code_name(static_cast<ErrorCode>(status)).data();
}

int ts_status_is_validation(ts_status status) { return is_validation_error(static_cast<ErrorCode>(status)) ? 1 : 0; }

void ts_string_free(char* s) { std::free(s); }

ts_status ts_config_new(const char* data_dir, ts_config** out) {
    return guarded([&] {
        need(data_dir, "data_dir");
        need(out, "out");
        *out = new ts_config{eval::default_config(data_dir)};
    });
}

void ts_config_free(ts_config* cfg) { delete cfg; }

ts_status ts_config_load(ts_config* cfg, const char* path) {
    return guarded([&] {
        need(cfg, "cfg");
        need(path, "path");
        cfg->cfg = eval::load_config(path, cfg->cfg);
    });
}

ts_status ts_config_set(ts_config* cfg, const char* key, const char* value) {
    return guarded([&] {
        need(cfg, "cfg");
        need(key, "key");
        need(value, "value");
        eval::set_config_value(cfg->cfg, key, value, fs::current_path());
    });
}

ts_status ts_config_set_seed(ts_config* cfg, uint64_t seed) {
    return guarded([&] {
        need(cfg, "cfg");
        cfg->cfg.seed = seed;
    });
}

ts_status ts_config_dump(const ts_config* cfg, char** text) {
    return guarded([&] {
        need(cfg, "cfg");
        need(text, "text");
        *text = dup(eval::config_to_text(cfg->cfg));
    });
}

ts_status ts_detect(const ts_config* cfg, const char* out_path, char** summary) {
    return guarded([&] {
        need(cfg, "cfg");
        const auto& c = cfg->cfg;
        json j{{"method", c.anomaly_method}};
        if (c.anomaly_method == "arima") {
            const auto d = eval::run_detect(c);
            j["order"] = {d.model.order.p, d.model.order.d, d.model.order.q};
            j["aic"] = d.model.aic;
            j["days"] = d.reports.size();
            json sel = json::array();
            for (const auto& a : d.selected) {
                sel.push_back({{"timestamp", format_instant(a.timestamp)}, {"severity", a.severity}});
            }
            j["selected"] = sel;
        } else {
            const auto pts = eval::run_detect_multivariate(c);
            std::size_t flagged = 0;
            for (const auto& p : pts) flagged += p.is_outlier ? 1 : 0;
            j["points"] = pts.size();
            j["outliers"] = flagged;
        }
        copy_out(c.output_dir / "anomalies.jsonl", out_path);
        j["artifact"] = (c.output_dir / "anomalies.jsonl").string();
        emit(summary, j);
    });
}

ts_status ts_retrieve(const ts_config* cfg, const char* anomalies_path, const char* anomaly_date,
                      const char* out_path, const char* trace_path, char** summary) {
    return guarded([&] {
        need(cfg, "cfg");
        const auto& c = cfg->cfg;
        std::vector<anomaly::AnomalyReport> selected;
        if (anomaly_date) {
            const auto t = parse_instant(anomaly_date);
            if (!t) throw Error(ErrorCode::InvalidArgument, std::string("bad anomaly date '") + anomaly_date + "'");
            anomaly::AnomalyReport a;
            a.timestamp = *t;
            selected.push_back(a);
        } else {
            const fs::path p = anomalies_path ? fs::path(anomalies_path) : c.output_dir / "anomalies.jsonl";
            for (const auto& a : eval::read_anomalies(p)) {
                if (std::abs(a.severity) >= c.anomaly_min_severity) selected.push_back(a);
            }
        }
        const auto r = eval::run_retrieve(c, selected);
        copy_out(c.output_dir / "collection.jsonl", out_path);
        copy_out(c.output_dir / "queries.jsonl", trace_path);
        json q = json::array();
        for (const auto& e : r.expansions) {
            q.push_back({{"query", query::compose_query_string(e.query)},
                         {"iterations", e.trace.iterations.size()},
                         {"converged", e.trace.converged}});
        }
        emit(summary, {{"anomalies", selected.size()}, {"collection", r.collection.size()}, {"queries", q}});
    });
}

ts_status ts_assess(const ts_config* cfg, const char* collection_path, const char* out_path, char** summary) {
    return guarded([&] {
        need(cfg, "cfg");
        const auto& c = cfg->cfg;
        const fs::path p = collection_path ? fs::path(collection_path) : c.output_dir / "collection.jsonl";
        const auto stream = parse_tweet_stream(p);
        const auto r = eval::run_assess(c, stream.tweets);
        copy_out(c.output_dir / "assessed.jsonl", out_path);
        std::size_t reliable = 0;
        for (const auto& rec : r.assessment.records) reliable += rec.reliable ? 1 : 0;
        json j{{"records", r.assessment.records.size()},
               {"reliable", reliable},
               {"rejected_lines", stream.rejects.size()},
               {"warnings", r.assessment.warnings}};
        if (r.training) j["detector"] = json::parse(eval::detector_report_json(*r.training));
        emit(summary, j);
    });
}

ts_status ts_train_detector(const ts_config* cfg, const char* bundle_dir, char** summary) {
    return guarded([&] {
        need(cfg, "cfg");
        const auto& c = cfg->cfg;
        if (c.human_corpus.empty()) throw Error(ErrorCode::ConfigError, "data.human_corpus is not set");
        const auto human = parse_tweet_stream(c.human_corpus).tweets;
        const auto t = eval::train_detector(human, c.detector, c.seed);
        const fs::path dir = bundle_dir ? fs::path(bundle_dir) : c.output_dir / "detector";
        filters::save_bundle(t.bundle, dir);
        emit(summary, json::parse(eval::detector_report_json(t)));
    });
}

ts_status ts_evaluate(const ts_config* cfg, const char* assessed_path, const char* direction, char** summary) {
    return guarded([&] {
        need(cfg, "cfg");
        const auto& c = cfg->cfg;
        const fs::path p = assessed_path ? fs::path(assessed_path) : c.output_dir / "assessed.jsonl";
        const auto records = filters::read_records(p);
        std::optional<filters::Direction> dir;
        if (direction) {
            dir = filters::parse_direction(direction);
        } else if (fs::exists(c.output_dir / "anomalies.jsonl") && c.anomaly_method == "arima") {
            dir = strongest_direction(eval::read_anomalies(c.output_dir / "anomalies.jsonl"), c.anomaly_min_severity);
        }
        const auto r = eval::run_report(c, records, dir);
        emit(summary, report_json(r));
    });
}

ts_status ts_sweep(const ts_config* cfg, const char* assessed_path, const char* out_path, char** summary) {
    return guarded([&] {
        need(cfg, "cfg");
        const auto& c = cfg->cfg;
        const fs::path p = assessed_path ? fs::path(assessed_path) : c.output_dir / "assessed.jsonl";
        const auto records = filters::read_records(p);
        const auto gold_by_id = eval::load_gold_labels(c);
        std::vector<Label> gold;
        std::vector<std::optional<double>> rr;
        std::vector<double> gltr;
        for (const auto& r : records) {
            const auto it = gold_by_id.find(r.id);
            if (it == gold_by_id.end()) continue;
            if (!r.neural_filter) {
                throw Error(ErrorCode::InvalidArgument, "record " + r.id + " has no neural outcome to sweep");
            }
            gold.push_back(it->second);
            rr.push_back(r.neural_filter->roberta_real);
            gltr.push_back(r.neural_filter->gltr_fake);
        }
        if (gold.empty()) throw Error(ErrorCode::NoLabels, "no assessed record carries a gold label");
        const auto s = eval::threshold_sweep(gold, rr, gltr, c.assess.consensus, c.sweep_steps);
        fs::create_directories(c.output_dir);
        const fs::path produced = c.output_dir / "sweep.csv";
        {
            std::ofstream out(produced, std::ios::binary);
            if (!out) throw Error(ErrorCode::IoError, "cannot write " + produced.string());
            out << eval::sweep_to_csv(s);
        }
        copy_out(produced, out_path);
        emit(summary, {{"rows", s.rows.size()}, {"argmax", s.argmax}});
    });
}

ts_status ts_run_pipeline(const ts_config* cfg, char** summary) {
    return guarded([&] {
        need(cfg, "cfg");
        const auto r = eval::run_pipeline(cfg->cfg);
        json sel = json::array();
        for (const auto& a : r.detect.selected) {
            sel.push_back({{"timestamp", format_instant(a.timestamp)}, {"severity", a.severity}});
        }
        emit(summary, {{"anomalies", sel},
                       {"collection", r.retrieve.collection.size()},
                       {"records", r.assess.assessment.records.size()},
                       {"warnings", r.assess.assessment.warnings},
                       {"report", report_json(r.report)},
                       {"output_dir", cfg->cfg.output_dir.string()}});
    });
}

}  // extern "C"
