#pragma once

#include "fairmatch/benchmark_lp.hpp"
#include "fairmatch/instance.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fairmatch {

// ---- trips ----------------------------------------------------------------

struct TripColumns {
    std::string pickup = "Pickup Community Area";
    std::string dropoff = "Dropoff Community Area";
    std::string start = "Trip Start Timestamp";
};

/// Half-open [start, end); both in any format accepted by parse_timestamp.
struct TimeWindow {
    std::string start = "09/29/2020 06:00:00 PM";
    std::string end = "09/29/2020 07:00:00 PM";
};

struct TripRecord {
    int pickup_area = 0;
    int dropoff_area = 0;
    std::int64_t start_time = 0; ///< seconds since 1970-01-01, no time zone
};

struct TripOptions {
    TripColumns columns;
    TimeWindow window;
    int horizon = 0; ///< T trips to subsample
    std::uint64_t seed = 0;
    double max_skip_fraction = 0.10;
};

struct TripParseReport {
    long rows = 0;
    long skipped = 0;
    long in_window = 0;
    std::vector<std::string> messages; ///< first few skip reasons
};

/// "MM/DD/YYYY hh:mm:ss AM|PM" or "YYYY-MM-DD[T ]hh:mm:ss".
std::int64_t parse_timestamp(std::string_view text);

/// Split one CSV line (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

std::vector<TripRecord> read_trips(std::istream& in, const TripColumns& columns, TripParseReport& report,
                                   double max_skip_fraction = 0.10);

/// Drivers and riders from T sampled trips; an edge joins driver i and rider j
/// when their pickup areas match; one group of drivers per pickup area.
Instance parse_trips(std::istream& in, const TripOptions& options, TripParseReport* report = nullptr);

// ---- graphs ---------------------------------------------------------------

struct EdgeListGraph {
    int nodes = 0;
    std::vector<std::pair<int, int>> edges; ///< u < v, sorted, unique
};

/// Whitespace-separated "u v" pairs; '%' and '#' start comments; a MatrixMarket
/// size line is skipped. Ids are compacted to 0..n-1 in ascending order.
EdgeListGraph read_edge_list(std::istream& in);

/// Induced subgraph on a uniform sample of `target` nodes (identity if smaller).
EdgeListGraph downsample(const EdgeListGraph& graph, int target, std::uint64_t seed);

/// Uniform split into floor(n/2) offline and ceil(n/2) online nodes keeping only
/// cross edges; weights Uniform[0,1] from weight_seed; singleton groups.
Instance balanced_partition(const EdgeListGraph& graph, std::uint64_t seed, std::uint64_t weight_seed);

// ---- instance files -------------------------------------------------------

inline constexpr int kInstanceSchemaVersion = 1;

void write_instance(std::ostream& out, const Instance& instance);
Instance read_instance(std::istream& in);
void write_instance_file(const std::string& path, const Instance& instance);
Instance read_instance_file(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);
/// Hash of the canonical JSON text.
std::string instance_hash(const Instance& instance);
std::string lp_hash(const LpSolution& solution);

void write_lp_solution(std::ostream& out, const LpSolution& solution, const std::string& instance_hash);
LpSolution read_lp_solution(std::istream& in);

} // namespace fairmatch
