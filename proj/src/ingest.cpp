#include "fairmatch/ingest.hpp"

#include "fairmatch/error.hpp"
#include "fairmatch/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace fairmatch {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::int64_t civil_seconds(int y, int mo, int d, int h, int mi, int s) {
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw DataError("invalid calendar date");
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + s;
}

} // namespace

std::int64_t parse_timestamp(std::string_view text) {
    const std::string s(trim(text));
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    char ampm[3] = {0, 0, 0};
    int consumed = 0;
    if (std::sscanf(s.c_str(), "%2d/%2d/%4d %2d:%2d:%2d %2[APMapm]%n", &mo, &d, &y, &h, &mi, &sec, ampm, &consumed) == 7 &&
        consumed == static_cast<int>(s.size())) {
        const char tag = static_cast<char>(std::toupper(static_cast<unsigned char>(ampm[0])));
        if (h < 1 || h > 12 || std::toupper(static_cast<unsigned char>(ampm[1])) != 'M') {
            throw DataError("bad 12-hour timestamp '" + s + "'");
        }
        h = h % 12 + (tag == 'P' ? 12 : 0);
    } else {
        char sep = 0;
        consumed = 0;
        if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &sec, &consumed) != 7 ||
            (sep != 'T' && sep != ' ') || consumed != static_cast<int>(s.size())) {
            throw DataError("unrecognized timestamp '" + s + "'");
        }
    }
    if (h > 23 || mi > 59 || sec > 59) throw DataError("bad time of day in '" + s + "'");
    return civil_seconds(y, mo, d, h, mi, sec);
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    field += '"';
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

std::vector<TripRecord> read_trips(std::istream& in, const TripColumns& columns, TripParseReport& report,
                                   double max_skip_fraction) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("trips CSV is empty (header row required)");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_csv_line(line);
    auto column = [&](const std::string& name) {
        for (std::size_t k = 0; k < header.size(); ++k) {
            if (trim(header[k]) == name) return k;
        }
        throw DataError("trips CSV has no column '" + name + "'");
    };
    const std::size_t c_pick = column(columns.pickup);
    const std::size_t c_drop = column(columns.dropoff);
    const std::size_t c_start = column(columns.start);

    std::vector<TripRecord> out;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++report.rows;
        const auto fields = split_csv_line(line);
        std::string problem;
        TripRecord rec;
        if (fields.size() != header.size()) {
            problem = "has " + std::to_string(fields.size()) + " fields, header has " + std::to_string(header.size());
        } else if (!parse_number(fields[c_pick], rec.pickup_area) || rec.pickup_area <= 0) {
            problem = "bad pickup area '" + fields[c_pick] + "'";
        } else if (!parse_number(fields[c_drop], rec.dropoff_area) || rec.dropoff_area <= 0) {
            problem = "bad dropoff area '" + fields[c_drop] + "'";
        } else {
            try {
                rec.start_time = parse_timestamp(fields[c_start]);
            } catch (const DataError& e) {
                problem = e.what();
            }
        }
        if (!problem.empty()) {
            ++report.skipped;
            if (report.messages.size() < 10) report.messages.push_back("line " + std::to_string(line_no) + ": " + problem);
            continue;
        }
        out.push_back(rec);
    }
    if (report.rows > 0 && static_cast<double>(report.skipped) > max_skip_fraction * static_cast<double>(report.rows)) {
        std::ostringstream msg;
        msg << "trips CSV: skipped " << report.skipped << " of " << report.rows << " rows (limit "
            << max_skip_fraction * 100 << "%)";
        if (!report.messages.empty()) msg << "; first: " << report.messages.front();
        throw DataError(msg.str());
    }
    return out;
}

Instance parse_trips(std::istream& in, const TripOptions& options, TripParseReport* report) {
    if (options.horizon < 1) throw UsageError("parse_trips: T must be at least 1");
    TripParseReport local;
    TripParseReport& rep = report ? *report : local;
    const auto trips = read_trips(in, options.columns, rep, options.max_skip_fraction);

    const std::int64_t start = parse_timestamp(options.window.start);
    const std::int64_t end = parse_timestamp(options.window.end);
    std::vector<std::size_t> window;
    for (std::size_t k = 0; k < trips.size(); ++k) {
        if (trips[k].start_time >= start && trips[k].start_time < end) window.push_back(k);
    }
    rep.in_window = static_cast<long>(window.size());
    if (static_cast<int>(window.size()) < options.horizon) {
        throw DataError("trips CSV: " + std::to_string(window.size()) + " trips in [" + options.window.start + ", " +
                        options.window.end + "), need T = " + std::to_string(options.horizon));
    }

    Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(Stream::instance)}));
    const int horizon = options.horizon;
    for (int k = 0; k < horizon; ++k) {
        const auto pick = static_cast<std::size_t>(k) + rng.index(window.size() - static_cast<std::size_t>(k));
        std::swap(window[static_cast<std::size_t>(k)], window[pick]);
    }
    window.resize(static_cast<std::size_t>(horizon));
    std::sort(window.begin(), window.end());

    std::map<int, std::vector<int>> by_area;
    for (int k = 0; k < horizon; ++k) by_area[trips[window[static_cast<std::size_t>(k)]].pickup_area].push_back(k);
    std::vector<Edge> edges;
    std::vector<std::vector<int>> groups;
    for (const auto& [area, members] : by_area) {
        for (int i : members) {
            for (int j : members) edges.push_back({i, j});
        }
        groups.push_back(members);
    }
    return Instance(std::vector<double>(static_cast<std::size_t>(horizon), 1.0),
                    std::vector<double>(static_cast<std::size_t>(horizon), 1.0), std::move(edges), std::move(groups),
                    horizon);
}

EdgeListGraph read_edge_list(std::istream& in) {
    std::string line;
    bool size_line_pending = false;
    std::vector<std::pair<long long, long long>> raw;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (line_no == 1 && view.rfind("%%MatrixMarket", 0) == 0) {
            size_line_pending = true;
        }
        if (view.empty() || view.front() == '%' || view.front() == '#') continue;
        std::istringstream fields{std::string(view)};
        long long u = 0, v = 0;
        if (!(fields >> u >> v)) throw DataError("edge list line " + std::to_string(line_no) + ": expected 'u v'");
        if (size_line_pending) {
            size_line_pending = false;
            continue;
        }
        raw.emplace_back(u, v);
    }

    std::vector<long long> ids;
    for (const auto& [u, v] : raw) {
        ids.push_back(u);
        ids.push_back(v);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    auto compact = [&](long long id) { return static_cast<int>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin()); };

    EdgeListGraph g;
    g.nodes = static_cast<int>(ids.size());
    for (const auto& [u, v] : raw) {
        if (u == v) continue;
        const int a = compact(u);
        const int b = compact(v);
        g.edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
    return g;
}

EdgeListGraph downsample(const EdgeListGraph& graph, int target, std::uint64_t seed) {
    if (target < 1) throw UsageError("downsample target must be at least 1");
    if (graph.nodes <= target) return graph;
    std::vector<int> order(static_cast<std::size_t>(graph.nodes));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (int k = 0; k < target; ++k) {
        const auto pick = static_cast<std::size_t>(k) + rng.index(order.size() - static_cast<std::size_t>(k));
        std::swap(order[static_cast<std::size_t>(k)], order[pick]);
    }
    order.resize(static_cast<std::size_t>(target));
    std::sort(order.begin(), order.end());
    std::vector<int> remap(static_cast<std::size_t>(graph.nodes), -1);
    for (std::size_t k = 0; k < order.size(); ++k) remap[static_cast<std::size_t>(order[k])] = static_cast<int>(k);

    EdgeListGraph out;
    out.nodes = target;
    for (const auto& [u, v] : graph.edges) {
        const int a = remap[static_cast<std::size_t>(u)];
        const int b = remap[static_cast<std::size_t>(v)];
        if (a >= 0 && b >= 0) out.edges.emplace_back(a, b);
    }
    return out;
}

Instance balanced_partition(const EdgeListGraph& graph, std::uint64_t seed, std::uint64_t weight_seed) {
    if (graph.nodes < 1) throw DataError("balanced_partition: graph has no nodes");
    std::vector<int> order(static_cast<std::size_t>(graph.nodes));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t k = order.size(); k > 1; --k) {
        std::swap(order[k - 1], order[static_cast<std::size_t>(rng.index(k))]);
    }
    const int left = graph.nodes / 2;
    std::vector<int> side(static_cast<std::size_t>(graph.nodes));  // 0 = offline, 1 = online
    for (std::size_t k = 0; k < order.size(); ++k) side[static_cast<std::size_t>(order[k])] = static_cast<int>(k) < left ? 0 : 1;
    // Ids within each side follow the original node order.
    std::vector<int> local(static_cast<std::size_t>(graph.nodes));
    int n_off = 0, n_on = 0;
    for (int v = 0; v < graph.nodes; ++v) local[static_cast<std::size_t>(v)] = side[static_cast<std::size_t>(v)] == 0 ? n_off++ : n_on++;

    std::vector<Edge> edges;
    for (const auto& [u, v] : graph.edges) {
        const int su = side[static_cast<std::size_t>(u)];
        const int sv = side[static_cast<std::size_t>(v)];
        if (su == sv) continue;
        const int off = su == 0 ? u : v;
        const int on = su == 0 ? v : u;
        edges.push_back({local[static_cast<std::size_t>(off)], local[static_cast<std::size_t>(on)]});
    }
    Rng wrng(weight_seed);
    std::vector<double> weights(static_cast<std::size_t>(n_off));
    for (double& w : weights) w = wrng.uniform();
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < n_off; ++i) groups.push_back({i});
    return Instance(std::move(weights), std::vector<double>(static_cast<std::size_t>(n_on), 1.0), std::move(edges),
                    std::move(groups), n_on);
}

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
            throw DataError("instance file: unknown field '" + key + "'" + (where.empty() ? "" : " in " + where));
        }
    }
}

json to_json(const Instance& instance) {
    json j;
    j["version"] = kInstanceSchemaVersion;
    j["horizon"] = instance.horizon();
    json offline = json::array();
    for (int i = 0; i < instance.num_offline(); ++i) offline.push_back({{"id", i}, {"weight", instance.weight(i)}});
    json online = json::array();
    for (int k = 0; k < instance.num_online(); ++k) online.push_back({{"id", k}, {"rate", instance.rate(k)}});
    json edges = json::array();
    for (const Edge& e : instance.edges()) edges.push_back({e.offline, e.online});
    j["offline"] = std::move(offline);
    j["online"] = std::move(online);
    j["edges"] = std::move(edges);
    j["groups"] = instance.groups();
    return j;
}

template <class F>
std::vector<double> read_side(const json& arr, const char* field, const char* value_key, F&& check) {
    if (!arr.is_array()) throw DataError(std::string("instance file: '") + field + "' must be an array");
    std::vector<double> values(arr.size());
    std::vector<bool> seen(arr.size(), false);
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const json& entry = arr[k];
        if (!entry.is_object()) throw DataError(std::string("instance file: entries of '") + field + "' must be objects");
        reject_unknown(entry, {"id", value_key}, std::string(field) + "[" + std::to_string(k) + "]");
        const long long id = entry.at("id").get<long long>();
        if (id < 0 || id >= static_cast<long long>(arr.size()) || seen[static_cast<std::size_t>(id)]) {
            throw DataError(std::string("instance file: ") + field + " ids must be 0..n-1 without repeats (got " +
                            std::to_string(id) + ")");
        }
        seen[static_cast<std::size_t>(id)] = true;
        values[static_cast<std::size_t>(id)] = entry.contains(value_key) ? entry.at(value_key).get<double>() : check();
    }
    return values;
}

} // namespace

void write_instance(std::ostream& out, const Instance& instance) { out << to_json(instance).dump(1) << "\n"; }

Instance read_instance(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(std::string("instance file: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("instance file: top level must be an object");
    reject_unknown(j, {"version", "offline", "online", "edges", "groups", "horizon"}, "");
    try {
        const int version = j.at("version").get<int>();
        if (version != kInstanceSchemaVersion) {
            throw DataError("instance file: schema version " + std::to_string(version) + " (this build reads " +
                            std::to_string(kInstanceSchemaVersion) + ")");
        }
        auto weights = read_side(j.at("offline"), "offline", "weight", [] { return 1.0; });
        auto rates = read_side(j.at("online"), "online", "rate", []() -> double {
            throw DataError("instance file: online entry without 'rate'");
        });
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw DataError("instance file: edges must be [i, j] pairs");
            edges.push_back({e[0].get<int>(), e[1].get<int>()});
        }
        std::vector<std::vector<int>> groups;
        if (j.contains("groups")) groups = j.at("groups").get<std::vector<std::vector<int>>>();
        return Instance(std::move(weights), std::move(rates), std::move(edges), std::move(groups),
                        j.at("horizon").get<int>());
    } catch (const json::exception& e) {
        throw DataError(std::string("instance file: ") + e.what());
    }
}

void write_instance_file(const std::string& path, const Instance& instance) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    write_instance(out, instance);
}

Instance read_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_instance(in);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string instance_hash(const Instance& instance) { return hex64(fnv1a64(to_json(instance).dump())); }

std::string lp_hash(const LpSolution& solution) {
    std::string text(to_string(solution.objective));
    char buf[32];
    for (double v : solution.x) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        text += buf;
    }
    std::snprintf(buf, sizeof buf, ";%.17g", solution.value);
    text += buf;
    return hex64(fnv1a64(text));
}

void write_lp_solution(std::ostream& out, const LpSolution& solution, const std::string& inst_hash) {
    json j;
    j["version"] = 1;
    j["instance_hash"] = inst_hash;
    j["objective"] = std::string(to_string(solution.objective));
    j["value"] = solution.value;
    j["x"] = solution.x;
    j["agent_mass"] = solution.agent_mass;
    j["cut_count"] = solution.cut_count;
    j["rounds"] = solution.rounds;
    j["pivots"] = solution.pivots;
    j["status"] = solution.status;
    j["backend"] = solution.backend;
    out << j.dump(1) << "\n";
}

LpSolution read_lp_solution(std::istream& in) {
    json j;
    try {
        in >> j;
        if (j.at("version").get<int>() != 1) throw DataError("LP solution file: unsupported version");
        LpSolution s;
        s.objective = parse_objective(j.at("objective").get<std::string>());
        s.value = j.at("value").get<double>();
        s.x = j.at("x").get<std::vector<double>>();
        s.agent_mass = j.at("agent_mass").get<std::vector<double>>();
        s.cut_count = j.at("cut_count").get<int>();
        s.rounds = j.at("rounds").get<int>();
        s.pivots = j.at("pivots").get<long>();
        s.status = j.at("status").get<std::string>();
        s.backend = j.at("backend").get<std::string>();
        return s;
    } catch (const json::exception& e) {
        throw DataError(std::string("LP solution file: ") + e.what());
    }
}

} // namespace fairmatch
