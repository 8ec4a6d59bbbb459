// dhi_cli: exact and sampled DHI statistics for groups mod p.
//
//   dhi_cli exact    --p 1193 [--subgroup]
//   dhi_cli dhi-test --p 1193 --n 354 [--replicates 1000] [--seed S] [--null-seed S]
//   dhi_cli survey   --lo 2000 --hi 4000 [--subgroup] [--n N]
//   dhi_cli table1   [--p 1193] [--n 59,118,354]
//   dhi_cli classify --lo 2000 --hi 2100
//
// Exit status: 0 success, 1 invalid configuration, 2 I/O failure.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dhi/dhi.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

std::optional<std::uint64_t> parse_u64(std::string text) {
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    text = text.substr(2);
    base = 16;
  }
  if (text.empty()) return std::nullopt;
  std::uint64_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (ec != std::errc() || end != text.data() + text.size()) return std::nullopt;
  return value;
}

// CLI11 validator for 64-bit seeds in decimal or 0x-hex.
const CLI::Validator kSeed(
    [](std::string& s) -> std::string {
      return parse_u64(s) ? std::string() : "expected a decimal or 0x-hex 64-bit value, got '" + s + "'";
    },
    "SEED");

std::vector<std::uint64_t> parse_schedule(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto v = parse_u64(item);
    if (!v) throw dhi::Error(dhi::ErrorKind::InvalidConfig, "bad sample size '" + item + "'");
    out.push_back(*v);
  }
  return out;
}

// 64-bit FNV-1a; stable across platforms, used only to name cache files.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Common {
  std::string format = "csv";
  std::string out;
  unsigned threads = 1;
  std::string cache_dir;
};

struct Args {
  std::uint64_t p = 0;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  bool subgroup = false;
  bool no_full = false;
  std::string n;
  std::uint64_t replicates = 1000;
  std::string seed = "0";
  std::string null_seed;
  std::uint64_t exact_bound = std::uint64_t{1} << 20;
  unsigned shards = 1;
};

dhi::Format parse_format(const std::string& f) { return f == "json" ? dhi::Format::Json : dhi::Format::Csv; }

std::uint64_t null_seed_for(const Args& a) {
  if (!a.null_seed.empty()) return *parse_u64(a.null_seed);
  return dhi::derive_seed(*parse_u64(a.seed), 0x6e756c6cULL);
}

std::uint64_t required_n(const Args& a) {
  auto v = parse_u64(a.n);
  if (!v || *v == 0) throw dhi::Error(dhi::ErrorKind::InvalidConfig, "--n must be a positive integer");
  return *v;
}

/// Writes to --out or stdout.
class Sink {
 public:
  explicit Sink(const Common& common) : path_(common.out) {}

  void write(const std::string& bytes) {
    if (path_.empty()) {
      std::cout << bytes << std::flush;
    } else {
      dhi::write_file_atomically(path_, bytes);
    }
  }

 private:
  std::filesystem::path path_;
};

/// Result cache keyed by subcommand plus every flag that influences output.
class Cache {
 public:
  Cache(const Common& common, const CLI::App& command) {
    if (common.cache_dir.empty()) return;
    dir_ = common.cache_dir;
    std::map<std::string, std::string> flags;
    for (const CLI::Option* opt : command.get_options()) {
      const std::string name = opt->get_name();
      if (name == "--out" || name == "--threads" || name == "--cache-dir" || name == "--help") continue;
      if (opt->count() == 0) continue;
      std::string value;
      for (const auto& r : opt->results()) value += r + ";";
      flags[name] = value;
    }
    key_ = command.get_name();
    for (const auto& [k, v] : flags) key_ += " " + k + "=" + v;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(key_)));
    stem_ = command.get_name() + "-" + hex;
  }

  std::optional<std::string> lookup() const {
    if (dir_.empty()) return std::nullopt;
    auto key = slurp(dir_ / (stem_ + ".key"));
    if (!key || *key != key_) return std::nullopt;
    return slurp(dir_ / (stem_ + ".out"));
  }

  void store(const std::string& bytes) const {
    if (dir_.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw dhi::Error(dhi::ErrorKind::Io, dir_.string() + ": " + ec.message());
    dhi::write_file_atomically(dir_ / (stem_ + ".out"), bytes);
    dhi::write_file_atomically(dir_ / (stem_ + ".key"), key_);
  }

 private:
  static std::optional<std::string> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  std::filesystem::path dir_;
  std::string key_;
  std::string stem_;
};

template <typename Compute>
void run_cached(const Common& common, const CLI::App& command, Compute&& compute) {
  Cache cache(common, command);
  Sink sink(common);
  if (auto hit = cache.lookup()) {
    sink.write(*hit);
    return;
  }
  const std::string bytes = compute();
  cache.store(bytes);
  sink.write(bytes);
}

dhi::CyclicGroup group_for(const Args& a) {
  return a.subgroup ? dhi::make_prime_subgroup(a.p) : dhi::make_full_group(a.p);
}

dhi::SurveyRecord base_record(const dhi::CyclicGroup& group) {
  dhi::SurveyRecord rec;
  rec.prime = group.modulus;
  rec.kind = dhi::is_safe_prime(group.modulus) ? dhi::PrimeKind::SafePrime : dhi::PrimeKind::OtherPrime;
  rec.family = group.family;
  rec.order = group.order;
  return rec;
}

std::string cmd_exact(const Args& a, const Common& c) {
  const auto group = group_for(a);
  auto rec = base_record(group);
  rec.mode = dhi::SurveyMode::Exact;
  rec.statistic = dhi::exact_dhi_statistic(group, {a.exact_bound, c.threads}).statistic_T;
  const std::vector<dhi::SurveyRecord> records{rec};
  return dhi::render_report<dhi::SurveyRecord>(records, parse_format(c.format));
}

std::string cmd_dhi_test(const Args& a, const Common& c) {
  const auto group = group_for(a);
  const std::uint64_t n = required_n(a);
  if (static_cast<unsigned __int128>(n) > static_cast<unsigned __int128>(group.order) * group.order) {
    throw dhi::Error(dhi::ErrorKind::InvalidConfig, "--n exceeds N^2");
  }
  dhi::PermutationOptions options;
  options.sampling.shards = a.shards;
  options.threads = c.threads;
  const auto report = dhi::dhi_permutation_test(group, n, a.replicates, *parse_u64(a.seed), null_seed_for(a), options);
  auto rec = base_record(group);
  rec.mode = dhi::SurveyMode::Sampled;
  rec.n = n;
  rec.replicates = a.replicates;
  rec.statistic = report.observed_raw_entropy;
  rec.p_value = report.p_value;
  rec.proportion_lower = report.proportion_lower;
  rec.distance_to_center = report.distance_to_center;
  rec.relative_distance = report.relative_distance;
  rec.sample_seed = report.sample_seed;
  rec.null_seed = report.null_seed;
  const std::vector<dhi::SurveyRecord> records{rec};
  return dhi::render_report<dhi::SurveyRecord>(records, parse_format(c.format));
}

std::string cmd_survey(const Args& a, const Common& c) {
  dhi::SurveyConfig config;
  config.mode = a.n.empty() ? dhi::SurveyMode::Exact : dhi::SurveyMode::Sampled;
  if (config.mode == dhi::SurveyMode::Sampled) config.n = required_n(a);
  config.replicates = a.replicates;
  config.base_seed = *parse_u64(a.seed);
  config.full_groups = !a.no_full;
  config.prime_subgroups = a.subgroup;
  config.threads = c.threads;
  config.exact_bound = a.exact_bound;
  config.shards = a.shards;

  const auto format = parse_format(c.format);
  if (format == dhi::Format::Csv && !c.out.empty() && c.cache_dir.empty()) {
    // Stream rows to the partial file as they complete, then publish it.
    std::filesystem::path tmp = c.out;
    tmp += ".partial";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw dhi::Error(dhi::ErrorKind::Io, tmp.string() + ": cannot open");
    out << dhi::kSurveyCsvHeader << '\n';
    try {
      dhi::run_survey(a.lo, a.hi, config, [&](const dhi::SurveyRecord& r) { out << dhi::csv_row(r) << '\n' << std::flush; });
    } catch (...) {
      out.close();
      std::filesystem::remove(tmp);
      throw;
    }
    out.close();
    std::error_code ec;
    if (!out) ec = std::make_error_code(std::errc::io_error);
    if (!ec) std::filesystem::rename(tmp, c.out, ec);
    if (ec) {
      std::filesystem::remove(tmp, ec);
      throw dhi::Error(dhi::ErrorKind::Io, c.out + ": " + ec.message());
    }
    return {};
  }
  const auto records = dhi::run_survey(a.lo, a.hi, config);
  return dhi::render_report<dhi::SurveyRecord>(records, format);
}

std::string cmd_table1(const Args& a, const Common& c) {
  const auto schedule = a.n.empty() ? dhi::default_table1_schedule() : parse_schedule(a.n);
  dhi::Table1Options options;
  options.family = a.subgroup ? dhi::Family::PrimeSubgroup : dhi::Family::FullGroup;
  options.threads = c.threads;
  options.shards = a.shards;
  const auto records =
      dhi::reproduce_table1(a.p, schedule, a.replicates, *parse_u64(a.seed), null_seed_for(a), options);
  return dhi::render_report<dhi::Table1Record>(records, parse_format(c.format));
}

std::string cmd_classify(const Args& a, const Common& c) {
  const auto records = dhi::classify_primes(a.lo, a.hi);
  return dhi::render_report<dhi::PrimeClass>(records, parse_format(c.format));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical assessment of the Diffie-Hellman indistinguishability assumption"};
  app.require_subcommand(1);

  Common common;
  Args args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", common.out, "Output path (default: stdout)");
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--cache-dir", common.cache_dir, "Directory for cached results");
  };
  auto add_sampling = [&](CLI::App* sub) {
    sub->add_option("--replicates", args.replicates, "Null replicates R")->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "Sample seed (decimal or 0x-hex)")->check(kSeed);
    sub->add_option("--null-seed", args.null_seed, "Null-distribution seed (decimal or 0x-hex)")->check(kSeed);
    sub->add_option("--shards", args.shards, "Sampling substreams (part of the sample identity)")
        ->check(CLI::PositiveNumber);
  };

  auto* exact = app.add_subcommand("exact", "Exact statistic T_N over all N^2 exponent pairs");
  exact->add_option("--p", args.p, "Prime modulus")->required();
  exact->add_flag("--subgroup", args.subgroup, "Use the prime-order subgroup of a safe prime");
  exact->add_option("--exact-bound", args.exact_bound, "Largest order accepted in exact mode");
  add_common(exact);

  auto* test = app.add_subcommand("dhi-test", "Permutation test on a sample of n triples");
  test->add_option("--p", args.p, "Prime modulus")->required();
  test->add_flag("--subgroup", args.subgroup, "Use the prime-order subgroup of a safe prime");
  test->add_option("--n", args.n, "Sample size")->required();
  add_sampling(test);
  add_common(test);

  auto* survey = app.add_subcommand("survey", "Compare groups over a prime range (exact unless --n is given)");
  survey->add_option("--lo", args.lo, "Lowest prime")->required();
  survey->add_option("--hi", args.hi, "Highest prime")->required();
  survey->add_flag("--subgroup", args.subgroup, "Also test prime-order subgroups of safe primes");
  survey->add_flag("--no-full", args.no_full, "Skip the full groups Z_p^*");
  survey->add_option("--n", args.n, "Shared sample size; selects sampled mode");
  survey->add_option("--exact-bound", args.exact_bound, "Largest order accepted in exact mode");
  add_sampling(survey);
  add_common(survey);

  auto* table1 = app.add_subcommand("table1", "Permutation tests over a sample-size schedule");
  args.p = 1193;
  table1->add_option("--p", args.p, "Prime modulus")->capture_default_str();
  table1->add_flag("--subgroup", args.subgroup, "Use the prime-order subgroup of a safe prime");
  table1->add_option("--n", args.n, "Comma-separated schedule (default: the 41-entry schedule)");
  add_sampling(table1);
  add_common(table1);

  auto* classify = app.add_subcommand("classify", "List primes in a range as safe or other");
  classify->add_option("--lo", args.lo, "Lower bound")->required();
  classify->add_option("--hi", args.hi, "Upper bound")->required();
  add_common(classify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    auto compute = [&]() -> std::string {
      if (name == "exact") return cmd_exact(args, common);
      if (name == "dhi-test") return cmd_dhi_test(args, common);
      if (name == "table1") return cmd_table1(args, common);
      if (name == "classify") return cmd_classify(args, common);
      return cmd_survey(args, common);
    };
    if (name == "survey" && common.format == "csv" && !common.out.empty() && common.cache_dir.empty()) {
      cmd_survey(args, common);
    } else {
      run_cached(common, *chosen, compute);
    }
  } catch (const dhi::Error& e) {
    std::cerr << "dhi_cli: " << e.what() << '\n';
    return e.kind() == dhi::ErrorKind::Io ? kExitIo : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "dhi_cli: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
