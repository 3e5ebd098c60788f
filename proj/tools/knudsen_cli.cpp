// Command-line driver for the random-billiard library. Everything goes
// through the C interface in knudsen/knudsen.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "knudsen/knudsen.h"

namespace {

using json = nlohmann::json;

constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitResource = 3;

struct CliFailure {
    int exit_code;
    std::string message;
};

void check(knudsen_status s) {
    if (s == KNUDSEN_OK) return;
    const int code = s == KNUDSEN_ERR_ATOM_CAP ? kExitResource
                     : (s == KNUDSEN_ERR_INVALID_ARGUMENT ||
                        s == KNUDSEN_ERR_DOMAIN)
                         ? kExitUsage
                         : kExitValidation;
    throw CliFailure{code, std::string(knudsen_status_name(s)) + ": " +
                               knudsen_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) {
    throw CliFailure{kExitUsage, msg};
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
    void operator()(T* p) const { Destroy(p); }
};

using MapPtr = std::unique_ptr<knudsen_map, Deleter<knudsen_map, knudsen_map_destroy>>;
using MeasurePtr =
    std::unique_ptr<knudsen_measure,
                    Deleter<knudsen_measure, knudsen_measure_destroy>>;
using EnsemblePtr =
    std::unique_ptr<knudsen_ensemble,
                    Deleter<knudsen_ensemble, knudsen_ensemble_destroy>>;
using CellPtr =
    std::unique_ptr<knudsen_cell, Deleter<knudsen_cell, knudsen_cell_destroy>>;
using ValidationPtr =
    std::unique_ptr<knudsen_validation,
                    Deleter<knudsen_validation, knudsen_validation_destroy>>;
using InvariancePtr =
    std::unique_ptr<knudsen_invariance,
                    Deleter<knudsen_invariance, knudsen_invariance_destroy>>;

MapPtr make_map(double alpha) {
    knudsen_map* m = nullptr;
    check(knudsen_map_create(alpha, &m));
    return MapPtr(m);
}

// Locale-independent, 17 significant digits.
std::string fmt17(double v) {
    char buf[64];
    auto [end, ec] =
        std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, end);
}

std::string fmt_short(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_double(std::string_view s, const std::string& what) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        usage_error("cannot parse " + what + " '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct RunConfig {
    double alpha = 0.5;
    int steps = 200;
    std::size_t particles = 30000;
    std::size_t bins = 45;
    std::size_t atoms_per_bin = 1;
    std::optional<std::uint64_t> seed;
    std::string initial = "uniform";
    std::string mode = "exact";
    std::string format = "csv";
    std::size_t atom_cap = 10'000'000;
    unsigned workers = 0;
};

std::uint64_t resolve_seed(const RunConfig& cfg) {
    if (cfg.seed) return *cfg.seed;
    if (const char* env = std::getenv("KNUDSEN_SEED")) {
        std::uint64_t v = 0;
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            usage_error("KNUDSEN_SEED is not an unsigned integer");
        }
        return v;
    }
    return 1;
}

MeasurePtr read_initial_file(const std::string& path, const RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) usage_error("cannot open initial distribution file " + path);
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::vector<std::vector<double>> rows;
    std::string line;
    const bool atoms = header == "theta,weight";
    const bool pieces = header == "bin_lo,bin_hi,density";
    if (!atoms && !pieces) {
        usage_error("initial file header must be 'theta,weight' or "
                    "'bin_lo,bin_hi,density'");
    }
    const std::size_t width = atoms ? 2 : 3;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split(line, ',');
        if (fields.size() != width) usage_error("malformed row: " + line);
        std::vector<double> row;
        for (auto f : fields) row.push_back(parse_double(f, "value"));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) usage_error("initial distribution file has no rows");

    knudsen_measure* m = nullptr;
    if (atoms) {
        std::vector<double> thetas, weights;
        for (const auto& r : rows) {
            thetas.push_back(r[0]);
            weights.push_back(r[1]);
        }
        check(knudsen_measure_create(thetas.data(), weights.data(),
                                     thetas.size(), &m));
    } else {
        std::vector<double> lo, hi, density;
        for (const auto& r : rows) {
            lo.push_back(r[0]);
            hi.push_back(r[1]);
            density.push_back(r[2]);
        }
        check(knudsen_measure_from_density(lo.data(), hi.data(), density.data(),
                                           lo.size(), cfg.atoms_per_bin,
                                           cfg.bins, &m));
    }
    return MeasurePtr(m);
}

MeasurePtr make_initial(const RunConfig& cfg) {
    knudsen_measure* m = nullptr;
    const std::string& init = cfg.initial;
    if (init == "uniform") {
        check(knudsen_measure_stock(KNUDSEN_DENSITY_UNIFORM, cfg.atoms_per_bin,
                                    cfg.bins, &m));
    } else if (init == "bumps") {
        check(knudsen_measure_stock(KNUDSEN_DENSITY_TWO_BUMP, cfg.atoms_per_bin,
                                    cfg.bins, &m));
    } else if (init == "sine") {
        check(knudsen_measure_stock(KNUDSEN_DENSITY_SINE_LAW, cfg.atoms_per_bin,
                                    cfg.bins, &m));
    } else if (init.starts_with("atom:")) {
        check(knudsen_measure_dirac(parse_double(init.substr(5), "atom angle"),
                                    &m));
    } else if (init.starts_with("file:")) {
        return read_initial_file(init.substr(5), cfg);
    } else {
        usage_error("unknown initial distribution '" + init +
                    "' (uniform, bumps, sine, atom:<theta>, file:<path>)");
    }
    return MeasurePtr(m);
}

std::vector<int> checkpoints(int steps) {
    std::vector<int> out;
    if (steps <= 50) {
        for (int s = 0; s <= steps; ++s) out.push_back(s);
        return out;
    }
    for (int i = 0; i < 20; ++i) {
        const int s = static_cast<int>(static_cast<long long>(i) * steps / 20);
        if (out.empty() || out.back() != s) out.push_back(s);
    }
    out.push_back(steps);
    return out;
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) usage_error("cannot write " + path);
    return file;
}

// ---- kernel ---------------------------------------------------------------

int cmd_kernel(const RunConfig& cfg, double theta) {
    const MapPtr map = make_map(cfg.alpha);
    knudsen_kernel_entry row[4];
    std::size_t n = 0;
    check(knudsen_kernel_row(map.get(), theta, row, &n));
    const char* label = nullptr;
    check(knudsen_region_label(map.get(), theta, &label));

    if (cfg.format == "json") {
        json out = {{"alpha", cfg.alpha}, {"theta", theta}, {"region", label}};
        out["rows"] = json::array();
        for (std::size_t i = 0; i < n; ++i) {
            out["rows"].push_back({{"branch", row[i].branch},
                                   {"probability", row[i].weight},
                                   {"image", row[i].image}});
        }
        std::cout << out.dump(2) << "\n";
        return 0;
    }
    std::cout << "region " << label << "\n";
    std::cout << "branch probability image\n";
    for (std::size_t i = 0; i < n; ++i) {
        std::cout << row[i].branch << ' ' << fmt_short(row[i].weight) << ' '
                  << fmt_short(row[i].image) << "\n";
    }
    return 0;
}

// ---- evolve ---------------------------------------------------------------

struct Checkpoint {
    int step;
    std::vector<double> masses;
    double tv;
    double ks;
};

int cmd_evolve(const RunConfig& cfg, const std::string& output,
               const std::string& distances_path) {
    if (cfg.mode != "exact" && cfg.mode != "ensemble") {
        usage_error("--mode must be exact or ensemble");
    }
    if (cfg.format != "csv" && cfg.format != "json") {
        usage_error("--format must be csv or json");
    }
    const MapPtr map = make_map(cfg.alpha);
    const MeasurePtr initial = make_initial(cfg);
    const std::uint64_t seed = resolve_seed(cfg);
    const auto marks = checkpoints(cfg.steps);

    std::vector<Checkpoint> taken;
    auto record = [&](int step, auto&& fill_histogram) {
        Checkpoint c{step, std::vector<double>(cfg.bins), 0.0, 0.0};
        fill_histogram(c.masses.data());
        check(knudsen_distance_to_mu(c.masses.data(), cfg.bins, &c.tv, &c.ks));
        taken.push_back(std::move(c));
    };

    std::size_t next = 0;
    if (cfg.mode == "exact") {
        knudsen_measure* raw = nullptr;
        check(knudsen_measure_clone(initial.get(), &raw));
        const MeasurePtr nu(raw);
        for (int s = 0; s <= cfg.steps; ++s) {
            if (s > 0) {
                check(knudsen_measure_evolve(map.get(), nu.get(), 1,
                                             cfg.atom_cap));
            }
            if (next < marks.size() && marks[next] == s) {
                record(s, [&](double* out) {
                    check(knudsen_measure_histogram(nu.get(), cfg.bins, out));
                });
                ++next;
            }
        }
    } else {
        knudsen_ensemble* raw = nullptr;
        check(knudsen_ensemble_from_measure(initial.get(), cfg.particles, seed,
                                            &raw));
        const EnsemblePtr e(raw);
        for (int s = 0; s <= cfg.steps; ++s) {
            if (s > 0) check(knudsen_ensemble_step(map.get(), e.get(), cfg.workers));
            if (next < marks.size() && marks[next] == s) {
                record(s, [&](double* out) {
                    check(knudsen_ensemble_histogram(e.get(), cfg.bins, out));
                });
                ++next;
            }
        }
    }

    std::ofstream file;
    std::ostream& out = open_output(output, file);
    if (cfg.format == "json") {
        json doc = {{"alpha", cfg.alpha},
                    {"mode", cfg.mode},
                    {"initial", cfg.initial},
                    {"steps", cfg.steps},
                    {"bins", cfg.bins},
                    {"seed", seed}};
        if (cfg.mode == "ensemble") doc["particles"] = cfg.particles;
        doc["checkpoints"] = json::array();
        for (const auto& c : taken) {
            doc["checkpoints"].push_back(
                {{"step", c.step}, {"tv", c.tv}, {"ks", c.ks}, {"masses", c.masses}});
        }
        out << doc.dump(2) << "\n";
    } else {
        out << "step,bin_index,bin_lo,bin_hi,mass\n";
        for (const auto& c : taken) {
            for (std::size_t j = 0; j < cfg.bins; ++j) {
                const double lo = std::numbers::pi * static_cast<double>(j) /
                                  static_cast<double>(cfg.bins);
                const double hi = std::numbers::pi * static_cast<double>(j + 1) /
                                  static_cast<double>(cfg.bins);
                out << c.step << ',' << j << ',' << fmt17(lo) << ','
                    << fmt17(hi) << ',' << fmt17(c.masses[j]) << '\n';
            }
        }
    }
    if (!distances_path.empty()) {
        std::ofstream dfile;
        std::ostream& d = open_output(distances_path, dfile);
        d << "step,tv,ks\n";
        for (const auto& c : taken) {
            d << c.step << ',' << fmt17(c.tv) << ',' << fmt17(c.ks) << '\n';
        }
    }
    const auto& last = taken.back();
    std::cerr << "step " << last.step << ": tv " << fmt_short(last.tv)
              << ", ks " << fmt_short(last.ks) << "\n";
    return 0;
}

// ---- oracle ---------------------------------------------------------------

json invariance_json(const knudsen_invariance* r) {
    knudsen_invariance_summary s{};
    check(knudsen_invariance_summary_get(r, &s));
    std::vector<double> z(s.first_bins * s.angle_bins);
    check(knudsen_invariance_bins(r, nullptr, nullptr, z.data(), z.size()));
    return {{"first_bins", s.first_bins}, {"angle_bins", s.angle_bins},
            {"samples", s.samples},       {"failed_bins", s.failed_bins},
            {"max_z", s.max_z},           {"passed", s.passed != 0},
            {"z", z}};
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int cmd_oracle(const RunConfig& cfg, std::size_t grid_size, std::size_t samples,
               std::size_t liouville_samples, const std::string& output) {
    knudsen_cell* raw = nullptr;
    check(knudsen_cell_create(cfg.alpha, &raw));
    const CellPtr cell(raw);
    const std::uint64_t seed = resolve_seed(cfg);

    std::vector<double> grid(grid_size);
    check(knudsen_validation_grid(cell.get(), grid_size, grid.data()));
    knudsen_validation* vraw = nullptr;
    check(knudsen_validate(cell.get(), grid.data(), grid.size(), samples, seed,
                           cfg.workers, &vraw));
    const ValidationPtr validation(vraw);
    int passed = 0;
    double max_z = 0.0;
    std::size_t points = 0;
    check(knudsen_validation_summary(validation.get(), &passed, &max_z, &points));

    json pts = json::array();
    for (std::size_t i = 0; i < points; ++i) {
        knudsen_validation_point p{};
        check(knudsen_validation_point_at(validation.get(), i, &p));
        json z = json::array();
        for (double v : p.z) z.push_back(finite_or_null(v));
        pts.push_back({{"theta", p.theta},
                       {"expected", p.expected},
                       {"observed", p.observed},
                       {"z", z},
                       {"max_abs_deviation", p.max_abs_deviation},
                       {"max_z", finite_or_null(p.max_z)},
                       {"unclassified", p.unclassified}});
    }

    knudsen_invariance* iraw = nullptr;
    check(knudsen_liouville_check(cell.get(), liouville_samples, seed,
                                  cfg.workers, &iraw));
    const InvariancePtr liouville(iraw);
    const json liouville_json = invariance_json(liouville.get());

    const bool ok = passed != 0 && liouville_json["passed"].get<bool>();
    const json report = {
        {"alpha", cfg.alpha},
        {"seed", seed},
        {"passed", ok},
        {"branch_validation",
         {{"samples_per_point", samples},
          {"grid_size", grid_size},
          {"max_z", finite_or_null(max_z)},
          {"passed", passed != 0},
          {"points", pts}}},
        {"liouville", liouville_json}};

    std::ofstream file;
    open_output(output, file) << report.dump(2) << "\n";
    return ok ? 0 : kExitValidation;
}

// ---- skew -----------------------------------------------------------------

std::vector<int> parse_word(const std::string& text) {
    std::vector<int> word;
    const bool commas = text.find(',') != std::string::npos;
    if (commas) {
        for (auto f : split(text, ',')) {
            int k = 0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), k);
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                usage_error("malformed word '" + text + "'");
            }
            word.push_back(k);
        }
    } else {
        for (char c : text) {
            if (c < '0' || c > '9') usage_error("malformed word '" + text + "'");
            word.push_back(c - '0');
        }
    }
    if (word.empty()) usage_error("empty word");
    for (int k : word) {
        if (k < 1 || k > 4) usage_error("word entries must be 1..4");
    }
    return word;
}

int cmd_skew(const RunConfig& cfg, const std::string& word_text, double x,
             std::size_t samples, double lo, double hi,
             const std::string& output) {
    const std::vector<int> word = parse_word(word_text);
    const MapPtr map = make_map(cfg.alpha);
    double flo = 0.0, fhi = 0.0, measure = 0.0;
    check(knudsen_cylinder_fiber(map.get(), x, word.data(), word.size(), &flo,
                                 &fhi));
    check(knudsen_fiber_measure(map.get(), x, word.data(), word.size(), &measure));

    const MeasurePtr nu = make_initial(cfg);
    knudsen_skew_consistency t1{};
    check(knudsen_skew_consistency_check(map.get(), nu.get(), lo, hi, cfg.steps, samples,
                                 resolve_seed(cfg), &t1));

    const double length = fhi - flo;
    const json doc = {
        {"alpha", cfg.alpha},
        {"word", word},
        {"x", x},
        {"fiber", {{"lo", flo}, {"hi", fhi}, {"empty", !(fhi > flo)}}},
        {"fiber_length", length},
        {"fiber_measure", measure},
        {"difference", std::abs(length - measure)},
        {"skew_consistency",
         {{"initial", cfg.initial},
          {"interval", {lo, hi}},
          {"steps", cfg.steps},
          {"samples", samples},
          {"exact", t1.exact},
          {"estimate", t1.estimate},
          {"standard_error", t1.standard_error}}}};
    std::ofstream file;
    open_output(output, file) << doc.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random billiard with a triangular serrated wall: exit-angle "
                 "kernel, measure evolution and ray-tracing checks"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--alpha", cfg.alpha, "Base angle of the cell, in (0, pi/6)")
            ->capture_default_str();
        sub->add_option("--seed", cfg.seed,
                        "RNG seed (falls back to KNUDSEN_SEED, then 1)");
        sub->add_option("--workers", cfg.workers, "Worker threads (0 = all cores)");
    };

    double theta = 0.0;
    auto* kernel = app.add_subcommand("kernel", "Tabulate the kernel row at one angle");
    add_common(kernel);
    kernel->add_option("--theta", theta, "Incoming angle in [0, pi]")->required();
    kernel->add_option("--format", cfg.format, "table or json");

    std::string output = "-";
    std::string distances;
    auto* evolve = app.add_subcommand("evolve", "Evolve a distribution of angles");
    add_common(evolve);
    evolve->add_option("--steps", cfg.steps)->capture_default_str()->check(CLI::NonNegativeNumber);
    evolve->add_option("--particles", cfg.particles)->capture_default_str()->check(CLI::PositiveNumber);
    evolve->add_option("--bins", cfg.bins)->capture_default_str()->check(CLI::PositiveNumber);
    evolve->add_option("--atoms-per-bin", cfg.atoms_per_bin)->capture_default_str()->check(CLI::PositiveNumber);
    evolve->add_option("--initial", cfg.initial,
                       "uniform | bumps | sine | atom:<theta> | file:<path>")
        ->capture_default_str();
    evolve->add_option("--mode", cfg.mode, "exact | ensemble")->capture_default_str();
    evolve->add_option("--format", cfg.format, "csv | json")->capture_default_str();
    evolve->add_option("--atom-cap", cfg.atom_cap)->capture_default_str();
    evolve->add_option("--output", output, "Histogram output ('-' = stdout)");
    evolve->add_option("--distances", distances, "Write step,tv,ks here");

    std::size_t grid_size = 50;
    std::size_t samples = 100000;
    std::size_t liouville_samples = 1000000;
    auto* oracle = app.add_subcommand("oracle", "Validate the kernel by ray tracing");
    add_common(oracle);
    oracle->add_option("--grid", grid_size)->capture_default_str()->check(CLI::PositiveNumber);
    oracle->add_option("--samples", samples, "Entry points per grid angle")
        ->capture_default_str()->check(CLI::PositiveNumber);
    oracle->add_option("--liouville-samples", liouville_samples)
        ->capture_default_str()->check(CLI::PositiveNumber);
    oracle->add_option("--output", output, "Report path ('-' = stdout)");

    std::string word;
    double x = 0.0;
    std::size_t skew_samples = 100000;
    std::vector<double> interval = {0.0, std::numbers::pi / 2};
    auto* skew = app.add_subcommand("skew", "Cylinder-set and skew-map checks");
    add_common(skew);
    skew->add_option("--word", word, "Branch word, e.g. 1,1 or 11 (first entry acts last)")
        ->required();
    skew->add_option("--x", x, "Base angle of the fiber")->required();
    skew->add_option("--steps", cfg.steps, "Skew iterations for the measure check")
        ->default_val(5)->check(CLI::NonNegativeNumber);
    skew->add_option("--samples", skew_samples)->capture_default_str()->check(CLI::PositiveNumber);
    skew->add_option("--interval", interval, "Test interval lo,hi")
        ->delimiter(',')->expected(2);
    skew->add_option("--initial", cfg.initial)->capture_default_str();
    skew->add_option("--bins", cfg.bins, "Bins used to atomize a density start")
        ->capture_default_str()->check(CLI::PositiveNumber);
    skew->add_option("--output", output, "Report path ('-' = stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*kernel) return cmd_kernel(cfg, theta);
        if (*evolve) return cmd_evolve(cfg, output, distances);
        if (*oracle) {
            return cmd_oracle(cfg, grid_size, samples, liouville_samples, output);
        }
        if (*skew) {
            return cmd_skew(cfg, word, x, skew_samples, interval[0], interval[1],
                            output);
        }
    } catch (const CliFailure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.exit_code;
    }
    return kExitUsage;
}
