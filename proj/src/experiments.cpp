#include "cycsig/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cycsig/errors.hpp"

namespace cycsig::experiments {

void ExperimentPlan::validate() const {
    if (lengths.empty()) throw ConfigError("plan needs at least one length");
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        if (lengths[i] == 0) throw ConfigError("segment lengths must be positive");
        if (i > 0 && lengths[i] <= lengths[i - 1]) throw ConfigError("segment lengths must be strictly ascending");
    }
    if (per_length == 0) throw ConfigError("segments per length must be at least 1");
    if (radii.empty()) throw ConfigError("plan needs at least one evaluation radius");
    for (double r : radii)
        if (!(r > 0.0)) throw ConfigError("evaluation radii must be positive");
    if (C && !(*C >= 0.0)) throw ConfigError("C must be nonnegative");
}

std::vector<std::size_t> ExperimentPlan::length_grid(std::size_t step, std::size_t max_length) {
    if (step == 0) throw ConfigError("length step must be positive");
    std::vector<std::size_t> out;
    for (std::size_t l = step; l <= max_length; l += step) out.push_back(l);
    return out;
}

std::vector<std::size_t> sample_segments(std::size_t n, std::size_t length, std::size_t count, std::uint64_t seed) {
    if (length == 0) throw ConfigError("segment length must be positive");
    if (length > n) throw ConfigError("segment length exceeds series length");
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(length), static_cast<std::uint32_t>(length >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> dist(0, n - length);
    std::vector<std::size_t> out(count);
    for (auto& s : out) s = dist(rng);
    return out;
}

std::size_t default_threads() {
    if (const char* env = std::getenv("CYCSIG_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw ConfigError("CYCSIG_THREADS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

void evaluate(const systems::LiftedSeries& series, const cubical::ComparisonSpace& y, const ExperimentPlan& plan,
              std::size_t start, std::size_t length, Outcome* out) {
    const persistence::SegmentView seg(series, start, length);
    for (std::size_t i = 0; i < plan.radii.size(); ++i) {
        out[i].start = start;
        out[i].length = length;
        out[i].radius = plan.radii[i];
    }
    try {
        const auto recs = signatures::signature_sweep(seg, y, plan.C, plan.radii);
        for (std::size_t i = 0; i < recs.size(); ++i) out[i].signature = recs[i].signature;
        return;
    } catch (const EdgeTooLong&) {
    }
    // Some radius failed; retry one at a time so the smaller radii survive.
    for (std::size_t i = 0; i < plan.radii.size(); ++i) {
        try {
            out[i].signature = signatures::signature(seg, y, plan.C, plan.radii[i]).signature;
        } catch (const EdgeTooLong& e) {
            out[i].error = e.what();
        }
    }
}

}  // namespace

std::vector<Outcome> run_plan(const systems::LiftedSeries& series, const cubical::ComparisonSpace& y,
                              const ExperimentPlan& plan, std::size_t threads) {
    plan.validate();
    for (double r : plan.radii)
        if (r > y.grid.r) throw ConfigError("evaluation radius exceeds space box size");

    struct Job {
        std::size_t start, length;
    };
    std::vector<Job> jobs;
    for (std::size_t l : plan.lengths)
        for (std::size_t s : sample_segments(series.size(), l, plan.per_length, plan.seed)) jobs.push_back({s, l});

    const std::size_t nr = plan.radii.size();
    std::vector<Outcome> out(jobs.size() * nr);
    if (threads == 0) threads = default_threads();
    threads = std::min(threads, std::max<std::size_t>(1, jobs.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            try {
                evaluate(series, y, plan, jobs[j].start, jobs[j].length, &out[j * nr]);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<Outcome> at_radius(const std::vector<Outcome>& all, double radius) {
    std::vector<Outcome> out;
    for (const auto& o : all)
        if (o.radius == radius) out.push_back(o);
    return out;
}

std::size_t RankTable::total(std::size_t l) const {
    std::size_t t = failed[l];
    for (auto c : counts[l]) t += c;
    return t;
}

std::optional<std::size_t> RankTable::rank0_extinction() const {
    for (std::size_t l = 0; l < lengths.size(); ++l)
        if (total(l) > 0 && counts[l][0] == 0) return lengths[l];
    return std::nullopt;
}

std::optional<std::size_t> RankTable::positive_onset() const {
    for (std::size_t l = 0; l < lengths.size(); ++l)
        for (std::size_t r = 1; r < counts[l].size(); ++r)
            if (counts[l][r] > 0) return lengths[l];
    return std::nullopt;
}

RankTable rank_table(const std::vector<Outcome>& outcomes, std::size_t max_rank) {
    RankTable t;
    t.max_rank = max_rank;
    std::map<std::size_t, std::size_t> row;
    for (const auto& o : outcomes) row.emplace(o.length, 0);
    for (auto& [l, i] : row) {
        i = t.lengths.size();
        t.lengths.push_back(l);
    }
    t.counts.assign(t.lengths.size(), std::vector<std::size_t>(max_rank + 1, 0));
    t.failed.assign(t.lengths.size(), 0);
    for (const auto& o : outcomes) {
        const auto l = row.at(o.length);
        if (!o.ok()) {
            ++t.failed[l];
            continue;
        }
        if (o.rank() > max_rank) throw Error("signature rank exceeds table width");
        ++t.counts[l][o.rank()];
    }
    return t;
}

double FrequencyCurves::peak(std::size_t key) const {
    double p = 0.0;
    for (double f : freq[key]) p = std::max(p, f);
    return p;
}

FrequencyCurves frequency_curves(const std::vector<Outcome>& outcomes, std::size_t rank, std::size_t ambient) {
    FrequencyCurves c;
    c.rank = rank;
    c.ambient = ambient;
    std::map<std::size_t, std::size_t> totals;
    std::map<std::string, std::map<std::size_t, std::size_t>> hits;
    for (const auto& o : outcomes) {
        ++totals[o.length];
        if (o.ok() && o.rank() == rank) ++hits[o.signature->key()][o.length];
    }
    for (const auto& [l, n] : totals) c.lengths.push_back(l);
    for (const auto& [key, per] : hits) {
        c.keys.push_back(key);
        std::vector<double> f;
        for (const auto& [l, n] : totals) {
            auto it = per.find(l);
            f.push_back(it == per.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n));
        }
        c.freq.push_back(std::move(f));
    }
    return c;
}

std::vector<std::string> frequent_keys(const FrequencyCurves& curves, double threshold) {
    std::vector<std::pair<double, std::string>> found;
    for (std::size_t i = 0; i < curves.keys.size(); ++i) {
        const double p = curves.peak(i);
        if (p >= threshold) found.emplace_back(p, curves.keys[i]);
    }
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::string> out;
    for (auto& [p, k] : found) out.push_back(std::move(k));
    return out;
}

std::map<std::string, std::size_t> onset_lengths(const FrequencyCurves& curves, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("onset threshold must lie in (0, 1]");
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < curves.keys.size(); ++i)
        for (std::size_t l = 0; l < curves.lengths.size(); ++l)
            if (curves.freq[i][l] >= threshold) {
                out.emplace(curves.keys[i], curves.lengths[l]);
                break;
            }
    return out;
}

InclusionGraph inclusion_graph(std::size_t ambient, const std::vector<std::string>& bottom,
                               const std::vector<std::string>& top) {
    InclusionGraph g;
    g.ambient = ambient;
    g.bottom = bottom;
    g.top = top;
    std::vector<gf2::Subspace> lo, hi;
    for (const auto& k : bottom) lo.push_back(gf2::Subspace::from_key(ambient, k));
    for (const auto& k : top) hi.push_back(gf2::Subspace::from_key(ambient, k));
    for (std::size_t i = 0; i < lo.size(); ++i)
        for (std::size_t j = 0; j < hi.size(); ++j)
            if (gf2::contains(hi[j], lo[i])) g.edges.emplace_back(i, j);
    return g;
}

Summary summarize(const std::vector<Outcome>& outcomes, std::size_t betti1, double threshold) {
    Summary s;
    s.betti1 = betti1;
    s.threshold = threshold;
    s.ranks = rank_table(outcomes, betti1);
    s.rank1 = frequency_curves(outcomes, 1, betti1);
    s.rank2 = frequency_curves(outcomes, 2, betti1);
    s.oscillations = frequent_keys(s.rank1, threshold);
    s.rank2_keys = frequent_keys(s.rank2, threshold);
    for (const auto& [k, l] : onset_lengths(s.rank1, threshold))
        if (std::find(s.oscillations.begin(), s.oscillations.end(), k) != s.oscillations.end()) s.onsets.emplace(k, l);
    s.graph = inclusion_graph(betti1, s.oscillations, s.rank2_keys);
    return s;
}

nlohmann::json summary_json(const Summary& s) {
    auto opt = [](std::optional<std::size_t> v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    auto peaks = [](const FrequencyCurves& c, const std::vector<std::string>& keys) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& k : keys) {
            const auto i = static_cast<std::size_t>(std::find(c.keys.begin(), c.keys.end(), k) - c.keys.begin());
            out.push_back({{"key", k}, {"peak", c.peak(i)}});
        }
        return out;
    };
    std::size_t failed = 0;
    for (auto f : s.ranks.failed) failed += f;
    nlohmann::json edges = nlohmann::json::array();
    for (auto [i, j] : s.graph.edges) edges.push_back({s.graph.bottom[i], s.graph.top[j]});
    return {{"betti1", s.betti1},
            {"threshold", s.threshold},
            {"rank0_extinction", opt(s.ranks.rank0_extinction())},
            {"positive_onset", opt(s.ranks.positive_onset())},
            {"failed_segments", failed},
            {"oscillations", peaks(s.rank1, s.oscillations)},
            {"onsets", s.onsets},
            {"rank2", peaks(s.rank2, s.rank2_keys)},
            {"inclusions", edges}};
}

ConfigResult run_configuration(const Configuration& c, std::size_t threads) {
    ConfigResult res;
    res.config = c;
    try {
        c.spec.validate();
        c.plan.validate();
        auto g = c.grid;
        g.dim = c.spec.dim();
        g.validate();
        const auto data = systems::generate(c.spec, c.n_points, c.data_seed, c.transient);
        const auto y = cubical::build_space(data.lifted, g);
        res.betti1 = y.betti1();
        res.outcomes = run_plan(data.lifted, y, c.plan, threads);
    } catch (const std::exception& e) {
        res.error = e.what();
        res.outcomes.clear();
    }
    return res;
}

std::vector<ConfigResult> stability_sweep(const std::vector<Configuration>& configs, std::size_t threads) {
    std::vector<ConfigResult> out;
    out.reserve(configs.size());
    for (const auto& c : configs) out.push_back(run_configuration(c, threads));
    return out;
}

void write_outcomes_jsonl(std::ostream& os, const std::vector<Outcome>& outcomes) {
    for (const auto& o : outcomes) {
        nlohmann::json j = {{"start", o.start}, {"length", o.length}, {"radius", o.radius}};
        if (o.ok()) {
            j["rank"] = o.rank();
            j["key"] = o.signature->key();
            j["signature"] = o.signature->to_json();
        } else {
            j["error"] = o.error;
        }
        os << j.dump() << '\n';
    }
}

std::vector<Outcome> read_outcomes_jsonl(std::istream& is) {
    std::vector<Outcome> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Outcome o;
            o.start = j.at("start").get<std::size_t>();
            o.length = j.at("length").get<std::size_t>();
            o.radius = j.at("radius").get<double>();
            if (j.contains("signature")) {
                o.signature = gf2::Subspace::from_json(j.at("signature"));
                if (j.contains("key") && j.at("key").get<std::string>() != o.signature->key())
                    throw Error("key does not match signature");
            } else {
                o.error = j.at("error").get<std::string>();
            }
            out.push_back(std::move(o));
        } catch (const std::exception& e) {
            throw Error("signature table line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::size_t parse_count(const std::string& s) {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw Error("bad integer '" + s + "'");
    return v;
}

}  // namespace

void write_rank_csv(std::ostream& os, const RankTable& t) {
    os << "L";
    for (std::size_t r = 0; r <= t.max_rank; ++r) os << ",rank" << r;
    os << ",failed\n";
    for (std::size_t l = 0; l < t.lengths.size(); ++l) {
        os << t.lengths[l];
        for (auto c : t.counts[l]) os << ',' << c;
        os << ',' << t.failed[l] << '\n';
    }
}

RankTable read_rank_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error("rank table is empty");
    const auto head = split_csv(line);
    if (head.size() < 3 || head.front() != "L" || head.back() != "failed") throw Error("rank table header malformed");
    RankTable t;
    t.max_rank = head.size() - 3;
    for (std::size_t r = 0; r <= t.max_rank; ++r)
        if (head[r + 1] != "rank" + std::to_string(r)) throw Error("rank table header malformed");
    try {
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto cells = split_csv(line);
            if (cells.size() != head.size()) throw Error("rank table row has wrong width");
            t.lengths.push_back(parse_count(cells[0]));
            std::vector<std::size_t> row;
            for (std::size_t r = 0; r <= t.max_rank; ++r) row.push_back(parse_count(cells[r + 1]));
            t.counts.push_back(std::move(row));
            t.failed.push_back(parse_count(cells.back()));
        }
    } catch (const std::invalid_argument&) {
        throw Error("rank table has a non-numeric cell");
    }
    return t;
}

void write_curves_csv(std::ostream& os, const FrequencyCurves& c) {
    os << "L";
    for (const auto& k : c.keys) os << ',' << k;
    os << '\n';
    char buf[32];
    for (std::size_t l = 0; l < c.lengths.size(); ++l) {
        os << c.lengths[l];
        for (std::size_t i = 0; i < c.keys.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.6g", c.freq[i][l]);
            os << ',' << buf;
        }
        os << '\n';
    }
}

FrequencyCurves read_curves_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error("frequency table is empty");
    const auto head = split_csv(line);
    if (head.empty() || head.front() != "L") throw Error("frequency table header malformed");
    FrequencyCurves c;
    c.keys.assign(head.begin() + 1, head.end());
    c.freq.resize(c.keys.size());
    if (!c.keys.empty()) {
        const auto& k = c.keys.front();
        c.rank = k == "0" ? 0 : static_cast<std::size_t>(std::count(k.begin(), k.end(), '|')) + 1;
        c.ambient = k == "0" ? 0 : k.find('|') == std::string::npos ? k.size() : k.find('|');
    }
    try {
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto cells = split_csv(line);
            if (cells.size() != head.size()) throw Error("frequency table row has wrong width");
            c.lengths.push_back(parse_count(cells[0]));
            for (std::size_t i = 0; i < c.keys.size(); ++i) c.freq[i].push_back(std::stod(cells[i + 1]));
        }
    } catch (const std::invalid_argument&) {
        throw Error("frequency table has a non-numeric cell");
    }
    return c;
}

void write_dot(std::ostream& os, const InclusionGraph& g) {
    os << "digraph inclusion {\n  rankdir=BT;\n";
    for (std::size_t i = 0; i < g.bottom.size(); ++i)
        os << "  v" << i + 1 << " [label=\"v" << i + 1 << "\\n" << g.bottom[i] << "\", shape=ellipse];\n";
    for (std::size_t j = 0; j < g.top.size(); ++j)
        os << "  w" << j + 1 << " [label=\"w" << j + 1 << "\\n" << g.top[j] << "\", shape=box];\n";
    for (auto [i, j] : g.edges) os << "  v" << i + 1 << " -> w" << j + 1 << ";\n";
    os << "}\n";
}

nlohmann::json plan_json(const ExperimentPlan& p) {
    nlohmann::json j = {{"lengths", p.lengths}, {"per_length", p.per_length}, {"seed", p.seed}, {"radii", p.radii}};
    j["C"] = p.C ? nlohmann::json(*p.C) : nlohmann::json(nullptr);
    return j;
}

ExperimentPlan plan_from_json(const nlohmann::json& j) {
    ExperimentPlan p;
    p.lengths = j.at("lengths").get<std::vector<std::size_t>>();
    p.per_length = j.at("per_length").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.radii = j.at("radii").get<std::vector<double>>();
    if (j.contains("C") && !j.at("C").is_null()) p.C = j.at("C").get<double>();
    return p;
}

}  // namespace cycsig::experiments
