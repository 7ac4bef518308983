#include "wsnloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "wsnloc/error.hpp"
#include "wsnloc/kernels.hpp"
#include "wsnloc/pathgraph.hpp"
#include "wsnloc/seeding.hpp"

namespace wsnloc {

const std::vector<Density>& density_grid() {
    static const std::vector<Density> grid{{150, 10}, {200, 15}, {250, 20}, {300, 25}};
    return grid;
}

TrialRow run_trial(const ExperimentConfig& config, const Scenario& scenario, std::size_t index,
                   TrialArtifacts* artifacts) {
    const auto started = std::chrono::steady_clock::now();
    TrialRow row;
    row.trial = index;
    row.seed = split_seed(config.base_seed, index);

    TrialArtifacts local;
    TrialArtifacts& art = artifacts ? *artifacts : local;
    art = TrialArtifacts{};
    art.network = deploy(scenario, config.n_unknown, config.n_anchor, config.range, row.seed);
    if (config.ranging.kind == RangingModel::Kind::Gaussian) {
        art.network.ranging = RangingModel::gaussian(config.ranging.sigma, split_seed(row.seed, 1));
    }
    const Network& net = art.network;
    row.n_nodes = net.size();
    TrialMetrics& m = row.metrics;

    art.ts = occurrence_profile(net, config.path_metric);
    if (config.no_partition) {
        art.partition.label.assign(net.size(), 0);
    } else {
        try {
            art.clustering = kmeans_two(art.ts);
            art.seg_nodes = select_segmentation_nodes(*art.clustering);
        } catch (const Error&) {
            m.flags.emplace_back("flat_occurrence");
        }
        art.pairs = form_pairs(art.seg_nodes, net);
        art.partition = partition(net, art.pairs.pairs, art.ts, config.partition);
        for (AreaId a : art.partition.disconnected_areas) m.flags.push_back("area" + std::to_string(a) + ":disconnected");
    }
    m.n_pairs = art.pairs.pairs.size();
    m.z = art.partition.z;

    m.spo_before = spo_count(net);
    m.spo_after = spo_count(net, art.partition);
    m.acd_term = acd_term(m.spo_before, m.spo_after);

    art.localization = localize_network(net, art.partition);
    for (const auto& sub : art.localization.subnets) {
        for (const auto& f : sub.flags) m.flags.push_back("subnet" + std::to_string(sub.subnet) + ":" + f);
    }
    const MleResult err = mle(art.localization, net);
    m.mle = err.mle;
    m.inaccurate = err.inaccurate;

    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return row;
}

TrialRow run_trial(const ExperimentConfig& config, std::size_t index, TrialArtifacts* artifacts) {
    return run_trial(config, resolve_scenario(config.scenario), index, artifacts);
}

namespace {

template <class F>
Summary summarize(std::span<const TrialRow> rows, F field) {
    Summary s;
    if (rows.empty()) return s;
    double sum = 0.0;
    for (const auto& r : rows) sum += field(r);
    s.mean = sum / static_cast<double>(rows.size());
    double var = 0.0;
    for (const auto& r : rows) {
        const double d = field(r) - s.mean;
        var += d * d;
    }
    s.stddev = std::sqrt(var / static_cast<double>(rows.size()));
    return s;
}

std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (const auto& f : flags) {
        if (!out.empty()) out += '|';
        out += f;
    }
    return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

const char* order_name(PairOrder order) {
    return order == PairOrder::DescendingTs ? "descending_ts" : "reversed_descending_ts";
}

}  // namespace

Aggregates aggregate(std::span<const TrialRow> rows) {
    Aggregates a;
    a.n_pairs = summarize(rows, [](const TrialRow& r) { return static_cast<double>(r.metrics.n_pairs); });
    a.z = summarize(rows, [](const TrialRow& r) { return static_cast<double>(r.metrics.z); });
    a.spo_before = summarize(rows, [](const TrialRow& r) { return static_cast<double>(r.metrics.spo_before); });
    a.spo_after = summarize(rows, [](const TrialRow& r) { return static_cast<double>(r.metrics.spo_after); });
    a.acd = summarize(rows, [](const TrialRow& r) { return r.metrics.acd_term; });
    a.mle = summarize(rows, [](const TrialRow& r) { return r.metrics.mle; });
    a.inaccurate = summarize(rows, [](const TrialRow& r) { return static_cast<double>(r.metrics.inaccurate); });
    a.runtime_ms = summarize(rows, [](const TrialRow& r) { return r.runtime_ms; });
    return a;
}

BatchReport run_batch(const ExperimentConfig& config) {
    if (config.trials == 0) throw Error("trials must be at least 1");
    const Scenario scenario = resolve_scenario(config.scenario);
    BatchReport report;
    report.config = config;
    report.rows.resize(config.trials);

    const unsigned workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(config.trials)));
    if (workers == 1) {
        for (std::size_t i = 0; i < config.trials; ++i) report.rows[i] = run_trial(config, scenario, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < config.trials; i = next++) {
                        report.rows[i] = run_trial(config, scenario, i);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                    next = config.trials;
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    report.aggregates = aggregate(report.rows);
    if (!config.out_dir.empty()) write_report(report, config.out_dir);
    return report;
}

void write_report_csv(std::ostream& out, std::span<const TrialRow> rows) {
    out << "trial,seed,n_nodes,n_pairs,z,spo_before,spo_after,acd_term,mle_m,inaccurate,flags,runtime_ms\n";
    char buf[512];
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        std::snprintf(buf, sizeof buf, "%zu,%llu,%zu,%zu,%zu,%zu,%zu,%.17g,%.17g,%zu,", r.trial,
                      static_cast<unsigned long long>(r.seed), r.n_nodes, m.n_pairs, m.z, m.spo_before, m.spo_after,
                      m.acd_term, m.mle, m.inaccurate);
        out << buf << join_flags(m.flags);
        std::snprintf(buf, sizeof buf, ",%.17g\n", r.runtime_ms);
        out << buf;
    }
}

std::vector<TrialRow> read_report_csv(std::istream& in) {
    std::vector<TrialRow> rows;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty report");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 12) throw Error("malformed report row: " + line);
        TrialRow r;
        r.trial = std::stoull(f[0]);
        r.seed = std::stoull(f[1]);
        r.n_nodes = std::stoull(f[2]);
        r.metrics.n_pairs = std::stoull(f[3]);
        r.metrics.z = std::stoull(f[4]);
        r.metrics.spo_before = std::stoull(f[5]);
        r.metrics.spo_after = std::stoull(f[6]);
        r.metrics.acd_term = std::strtod(f[7].c_str(), nullptr);
        r.metrics.mle = std::strtod(f[8].c_str(), nullptr);
        r.metrics.inaccurate = std::stoull(f[9]);
        if (!f[10].empty()) r.metrics.flags = split(f[10], '|');
        r.runtime_ms = std::strtod(f[11].c_str(), nullptr);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string report_json(const BatchReport& report) {
    using nlohmann::json;
    const auto& c = report.config;
    json j;
    j["format"] = kReportFormat;
    j["config"] = {{"scenario", c.scenario},
                   {"n_unknown", c.n_unknown},
                   {"n_anchor", c.n_anchor},
                   {"range", c.range},
                   {"trials", c.trials},
                   {"base_seed", c.base_seed},
                   {"ranging", c.ranging.describe()},
                   {"no_partition", c.no_partition},
                   {"path_metric", to_string(c.path_metric)},
                   {"min_side", c.partition.min_side},
                   {"min_anchors", c.partition.min_anchors},
                   {"pair_order", order_name(c.partition.order)},
                   {"workers", c.workers},
                   {"isa", kernels::isa_name(kernels::active_isa())}};
    auto summary = [](const Summary& s) { return json{{"mean", s.mean}, {"std", s.stddev}}; };
    const auto& a = report.aggregates;
    j["aggregates"] = {{"n_pairs", summary(a.n_pairs)},       {"z", summary(a.z)},
                       {"spo_before", summary(a.spo_before)}, {"spo_after", summary(a.spo_after)},
                       {"acd", summary(a.acd)},               {"mle_m", summary(a.mle)},
                       {"inaccurate", summary(a.inaccurate)}, {"runtime_ms", summary(a.runtime_ms)}};
    json rows = json::array();
    for (const auto& r : report.rows) {
        const auto& m = r.metrics;
        rows.push_back({{"trial", r.trial},
                        {"seed", r.seed},
                        {"n_nodes", r.n_nodes},
                        {"n_pairs", m.n_pairs},
                        {"z", m.z},
                        {"spo_before", m.spo_before},
                        {"spo_after", m.spo_after},
                        {"acd_term", m.acd_term},
                        {"mle_m", m.mle},
                        {"inaccurate", m.inaccurate},
                        {"flags", m.flags},
                        {"runtime_ms", r.runtime_ms}});
    }
    j["trials"] = std::move(rows);
    return j.dump(2);
}

void write_report(const BatchReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir + ": " + ec.message());
    const fs::path csv = fs::path(dir) / "report.csv";
    std::ofstream out(csv);
    if (!out) throw Error("cannot write " + csv.string());
    write_report_csv(out, report.rows);
    if (!out) throw Error("write failed: " + csv.string());
    const fs::path js = fs::path(dir) / "report.json";
    std::ofstream jout(js);
    if (!jout) throw Error("cannot write " + js.string());
    jout << report_json(report) << '\n';
    if (!jout) throw Error("write failed: " + js.string());
}

TraversalCell traversal_cell(double diameter, std::size_t n_unknown, std::size_t n_anchor, std::size_t trials,
                             std::uint64_t base_seed, double range) {
    if (trials == 0) throw Error("trials must be at least 1");
    const Scenario scenario = circle_scenario(diameter);
    TraversalCell cell;
    cell.diameter = diameter;
    cell.n_nodes = n_unknown + n_anchor;
    double blocked = 0.0;
    double ratio = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const Network net = deploy(scenario, n_unknown, n_anchor, range, split_seed(base_seed, t));
        const auto spo = static_cast<double>(spo_count(net));
        const auto pairs = static_cast<double>(in_range_pairs(net));
        blocked += spo;
        if (pairs > 0) ratio += 100.0 * spo / pairs;
    }
    cell.mean_traversing = blocked / static_cast<double>(trials);
    cell.ratio_percent = ratio / static_cast<double>(trials);
    return cell;
}

}  // namespace wsnloc
