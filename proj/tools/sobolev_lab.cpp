// sobolev_lab -- command-line front end: ball, domain, verify, rearrange,
// table and replay.

#include "sobolev/chiti.hpp"
#include "sobolev/rearrange.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sobolev;

namespace {

constexpr int kVersion = 1;

struct RunConfig {
  std::string command;
  std::vector<json> domains; // resolved specs
  std::string field;         // rearrange input
  int n = 2;
  std::vector<double> p{2.0};
  std::vector<double> q;
  double h = 1.0 / 128;
  double tol = -1; // <= 0: the module default
  int max_iter = 500;
  std::string out = ".";
  std::string format = "table";
  int jobs = 1;
  bool supercritical = false;
  int budget = 500;
};

json config_json(const RunConfig &c) {
  return {{"command", c.command},
          {"domains", c.domains},
          {"field", c.field},
          {"n", c.n},
          {"p", c.p},
          {"q", c.q},
          {"h", c.h},
          {"tol", c.tol},
          {"max_iter", c.max_iter},
          {"out", c.out},
          {"format", c.format},
          {"jobs", c.jobs},
          {"experimental_supercritical", c.supercritical},
          {"budget", c.budget},
          {"version", kVersion}};
}

RunConfig config_from_json(const json &j) {
  RunConfig c;
  try {
    c.command = j.at("command");
    c.domains = j.at("domains").get<std::vector<json>>();
    c.field = j.at("field");
    c.n = j.at("n");
    c.p = j.at("p").get<std::vector<double>>();
    c.q = j.at("q").get<std::vector<double>>();
    c.h = j.at("h");
    c.tol = j.at("tol");
    c.max_iter = j.at("max_iter");
    c.out = j.at("out");
    c.format = j.at("format");
    c.jobs = j.at("jobs");
    c.supercritical = j.at("experimental_supercritical");
    c.budget = j.at("budget");
  } catch (const json::exception &e) {
    throw usage_error(std::string("malformed run configuration: ") + e.what());
  }
  return c;
}

std::string number(double x) {
  if (std::isnan(x))
    return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0 ? 0.0 : x);
  return buf;
}

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// "1/128" or "0.0078125"
double parse_spacing(const std::string &text) {
  try {
    std::size_t used = 0;
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used == text.size())
        return v;
    } else {
      const std::string a = text.substr(0, slash), b = text.substr(slash + 1);
      std::size_t ua = 0, ub = 0;
      const double num = std::stod(a, &ua), den = std::stod(b, &ub);
      if (ua == a.size() && ub == b.size())
        return num / den;
    }
  } catch (const std::exception &) {
  }
  throw usage_error("--h: cannot parse \"" + text + "\"");
}

void normalize_q(RunConfig &c) {
  std::sort(c.q.begin(), c.q.end());
  c.q.erase(std::unique(c.q.begin(), c.q.end()), c.q.end());
}

double the_p(const RunConfig &c) {
  if (c.p.size() != 1)
    throw usage_error(c.command + " takes exactly one -p");
  return c.p.front();
}

void check_config(RunConfig &c) {
  const double default_tol = c.command == "ball" ? ShootOptions{}.tol
                                                 : QuotientOptions{}.tolerance;
  if (c.tol <= 0)
    c.tol = default_tol;
  if (!(c.h > 0) || !std::isfinite(c.h))
    throw usage_error("--h must be positive");
  if (c.max_iter < 1)
    throw usage_error("--max-iter must be positive");
  if (c.jobs < 1)
    throw usage_error("--jobs must be positive");
  if (c.budget < 1)
    throw usage_error("--budget must be positive");
  if (c.p.empty())
    throw usage_error("no exponent p given");
  for (double q : c.q)
    if (!(q > 0))
      throw usage_error("q must be positive");
  normalize_q(c);
  if (c.command != "ball" && c.command != "rearrange" && c.n != 2)
    throw usage_error("grid commands are planar; -n must be 2");
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec || !fs::is_directory(c.out))
    throw usage_error("output directory " + c.out + " is not writable");
}

std::ofstream open_output(const RunConfig &c, const std::string &name,
                          std::string *path = nullptr) {
  const fs::path target = fs::path(c.out) / name;
  std::ofstream out(target);
  if (!out)
    throw usage_error("cannot write " + target.string());
  out << std::setprecision(17);
  if (path)
    *path = target.string();
  return out;
}

void emit(const nlohmann::ordered_json &summary, const std::string &format) {
  auto text = [](const nlohmann::ordered_json &v) {
    return v.is_number() ? short_number(v.get<double>())
           : v.is_string() ? v.get<std::string>()
                           : v.dump();
  };
  if (format == "json") {
    std::cout << summary.dump(2) << '\n';
  } else if (format == "csv") {
    std::string keys, values;
    for (const auto &[k, v] : summary.items()) {
      keys += (keys.empty() ? "" : ",") + k;
      values += (values.empty() ? "" : ",") + text(v);
    }
    std::cout << keys << '\n' << values << '\n';
  } else {
    std::size_t width = 0;
    for (const auto &[k, v] : summary.items())
      width = std::max(width, k.size());
    for (const auto &[k, v] : summary.items())
      std::cout << std::left << std::setw(int(width) + 2) << k << text(v) << '\n';
  }
}

QuotientOptions quotient_options(const RunConfig &c) {
  QuotientOptions o;
  o.tolerance = c.tol;
  o.max_iterations = c.max_iter;
  o.allow_supercritical = c.supercritical;
  return o;
}

const json &the_domain(const RunConfig &c) {
  if (c.domains.size() != 1)
    throw usage_error(c.command + " takes exactly one --domain");
  return c.domains.front();
}

SobolevResult solve(const RunConfig &c, const json &domain, double p) {
  const DomainSpec spec = domain_from_json(domain);
  validate(spec);
  return minimize_quotient(build_grid(spec, c.h), p, quotient_options(c));
}

int cmd_ball(RunConfig c) {
  const double p = the_p(c);
  if (!admissible(c.n, p))
    throw usage_error(admissibility_message(c.n, p));
  if (c.q.empty())
    c.q = {p, 2 * p};
  for (double q : c.q)
    if (q < p)
      throw usage_error("q = " + number(q) + " is below p = " + number(p));
  ShootOptions so;
  so.tol = c.tol;
  so.allow_supercritical = c.supercritical;
  const RadialProfile profile = normalize_to_unit_ball(shoot(c.n, p, so));
  const json config = config_json(c);

  std::string profile_path, khat_path;
  {
    std::ofstream out = open_output(c, "ball_profile.csv", &profile_path);
    write_radial_profile(out, profile, {{"config", config}});
  }
  {
    std::ofstream out = open_output(c, "khat.csv", &khat_path);
    out << json{{"format", "sobolev-lab/khat-table"},
                {"version", kVersion},
                {"n", c.n},
                {"p", p},
                {"cp_ball", profile.cp_ball},
                {"config", config}}
               .dump()
        << '\n'
        << "q,khat,exponent\n";
    for (double q : c.q)
      out << number(q) << ',' << number(khat(c.n, p, q, so)) << ','
          << number(k_exponent(c.n, p, q)) << '\n';
  }
  emit({{"n", c.n},
        {"p", p},
        {"cp_ball", profile.cp_ball},
        {"profile", profile_path},
        {"khat", khat_path}},
       c.format);
  return 0;
}

int cmd_domain(const RunConfig &c) {
  const double p = the_p(c);
  const json &domain = the_domain(c);
  const SobolevResult r = solve(c, domain, p);
  std::string path;
  {
    std::ofstream out = open_output(c, "field.csv", &path);
    write_field(out, r.field,
                {{"config", config_json(c)},
                 {"domain", domain},
                 {"p", p},
                 {"cp", r.cp},
                 {"iterations", r.iterations},
                 {"residual", r.residual}});
  }
  emit({{"domain", domain.value("shape", "")},
        {"p", p},
        {"h", c.h},
        {"measure", r.field.measure()},
        {"cp", r.cp},
        {"iterations", r.iterations},
        {"residual", r.residual},
        {"field", path}},
       c.format);
  return 0;
}

int cmd_verify(RunConfig c) {
  const double p = the_p(c);
  if (p < 1 || p > 2)
    throw usage_error("theorem requires 1 <= p <= 2 (got p = " + number(p) + ")");
  if (c.q.empty())
    c.q = {p, 2 * p};
  const SobolevResult r = solve(c, the_domain(c), p);
  ReverseHolderReport rep = verify_reverse_holder(r, c.q);
  rep.domain = the_domain(c);
  const json config = config_json(c);

  json report = to_json(rep);
  report["config"] = config;
  {
    std::ofstream out = open_output(c, "report.json");
    out << report.dump(2) << '\n';
  }
  {
    std::ofstream out = open_output(c, "report.txt");
    out << json{{"format", "sobolev-lab/report-table"},
                {"version", kVersion},
                {"config", config}}
               .dump()
        << '\n';
    write_table(out, rep);
  }
  if (c.format == "json") {
    std::cout << report.dump(2) << '\n';
  } else if (c.format == "csv") {
    std::cout << "q,K,norm_q,rhs,margin,hlp\n";
    for (const QReport &row : rep.per_q)
      std::cout << number(row.q) << ',' << number(row.K) << ','
                << number(row.norm_q) << ',' << number(row.rhs) << ','
                << number(row.margin) << ',' << row.hlp << '\n';
  } else {
    write_table(std::cout, rep);
  }
  if (!rep.passed) {
    std::cerr << "sobolev_lab: verify: failed:";
    for (const std::string &f : rep.failures)
      std::cerr << ' ' << f << ';';
    std::cerr << '\n';
    return 4;
  }
  return 0;
}

int cmd_rearrange(RunConfig c) {
  std::ifstream in(c.field);
  if (!in)
    throw usage_error("cannot open field file " + c.field);
  const GriddedField field = read_field(in);
  if (c.q.empty())
    c.q = {1.0, 2.0};
  const VolumeProfile u_star = decreasing_rearrangement(field);
  std::string path;
  {
    std::ofstream out = open_output(c, "rearranged.csv", &path);
    write_volume_profile(out, u_star, {{"config", config_json(c)}});
  }
  nlohmann::ordered_json summary = {{"measure", u_star.total_volume},
                  {"sup", u_star.values.size() ? u_star.values(0) : 0.0},
                  {"cells", u_star.size()}};
  for (double q : c.q)
    summary["equimeasurability_q" + short_number(q)] =
        equimeasurability_residual(field, q);
  summary["profile"] = path;
  emit(summary, c.format);
  return 0;
}

// ---- table ----

const std::vector<std::string> kColumns = {
    "domain_index", "domain", "p", "q", "h", "cp", "rho", "volume_omega",
    "volume_ball", "K", "norm_p", "norm_q", "margin", "crossing_count", "s1",
    "min_I", "verdict", "error"};

using Row = std::vector<std::string>;

std::uint64_t fnv1a(const std::string &text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string clean_message(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

struct Group {
  std::size_t domain_index = 0;
  double p = 0;
  std::vector<std::string> keys; // one per q
  std::vector<Row> rows;
};

class RowCache {
public:
  RowCache() {
    if (const char *dir = std::getenv("SOBOLEV_LAB_CACHE"); dir && *dir) {
      dir_ = dir;
      std::error_code ec;
      fs::create_directories(dir_, ec);
      if (ec)
        throw usage_error("SOBOLEV_LAB_CACHE: cannot create " + dir_.string());
    }
  }

  bool load(const std::string &key, Row &row) const {
    if (dir_.empty())
      return false;
    std::ifstream in(path(key));
    if (!in)
      return false;
    try {
      const json j = json::parse(in);
      if (j.at("key") != key)
        return false;
      row = j.at("cells").get<Row>();
      return row.size() == kColumns.size();
    } catch (const json::exception &) {
      return false;
    }
  }

  void store(const std::string &key, const Row &row) const {
    if (dir_.empty())
      return;
    const fs::path target = path(key);
    const fs::path tmp = target.string() + ".tmp";
    {
      std::ofstream out(tmp);
      out << json{{"key", key}, {"cells", row}}.dump() << '\n';
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
  }

private:
  fs::path path(const std::string &key) const {
    char name[40];
    std::snprintf(name, sizeof name, "row-%016llx.json",
                  static_cast<unsigned long long>(fnv1a(key)));
    return dir_ / name;
  }

  fs::path dir_;
};

void fill_group(const RunConfig &c, const RowCache &cache, Group &g) {
  const json &domain = c.domains[g.domain_index];
  const std::string label = domain.value("shape", "domain");
  g.rows.assign(c.q.size(), Row{});
  bool all_cached = true;
  for (std::size_t k = 0; k < c.q.size(); ++k)
    all_cached = cache.load(g.keys[k], g.rows[k]) && all_cached;
  if (all_cached)
    return;

  auto error_row = [&](double q, const std::string &message) {
    Row row(kColumns.size());
    row[0] = std::to_string(g.domain_index);
    row[1] = label;
    row[2] = number(g.p);
    row[3] = number(q);
    row[4] = number(c.h);
    row[16] = "error";
    row[17] = clean_message(message);
    return row;
  };

  std::optional<SobolevResult> solved;
  std::string solve_error;
  try {
    solved = solve(c, domain, g.p);
  } catch (const std::exception &e) {
    solve_error = e.what();
  }
  for (std::size_t k = 0; k < c.q.size(); ++k) {
    const double q = c.q[k];
    Row row;
    if (!solved) {
      row = error_row(q, solve_error);
    } else if (q < g.p) {
      row = error_row(q, "q = " + number(q) + " is below p = " + number(g.p));
    } else {
      try {
        const ReverseHolderReport rep = verify_reverse_holder(*solved, {q});
        const QReport &qr = rep.per_q.front();
        row = {std::to_string(g.domain_index),
               label,
               number(g.p),
               number(q),
               number(c.h),
               number(rep.cp_omega),
               number(rep.rho),
               number(rep.volume_omega),
               number(rep.volume_ball),
               number(qr.K),
               number(rep.lhs),
               number(qr.norm_q),
               number(qr.margin),
               std::to_string(rep.crossing.crossing_count),
               rep.equality_case ? "" : number(rep.crossing.s1),
               number(rep.dominance.min_I),
               rep.equality_case ? "equality case (ball)"
               : rep.passed      ? "inequality holds"
                                 : "failed",
               ""};
        if (!rep.passed) {
          std::string failures;
          for (const std::string &f : rep.failures)
            failures += (failures.empty() ? "" : "; ") + f;
          row[17] = clean_message(failures);
        }
      } catch (const std::exception &e) {
        row = error_row(q, e.what());
      }
    }
    g.rows[k] = row;
    cache.store(g.keys[k], row);
  }
}

int cmd_table(const RunConfig &c) {
  if (c.domains.empty())
    throw usage_error("table needs at least one --domain");
  if (c.q.empty())
    throw usage_error("table needs at least one -q");
  const std::size_t total = c.domains.size() * c.p.size() * c.q.size();
  if (total > std::size_t(c.budget))
    throw usage_error("table has " + std::to_string(total) +
                      " rows, above the budget of " + std::to_string(c.budget));

  std::vector<Group> groups;
  for (std::size_t d = 0; d < c.domains.size(); ++d)
    for (double p : c.p) {
      Group g;
      g.domain_index = d;
      g.p = p;
      for (double q : c.q)
        g.keys.push_back(json{{"domain", c.domains[d]},
                              {"n", c.n},
                              {"p", p},
                              {"q", q},
                              {"h", c.h},
                              {"tol", c.tol},
                              {"max_iter", c.max_iter},
                              {"experimental_supercritical", c.supercritical},
                              {"version", kVersion}}
                             .dump());
      groups.push_back(std::move(g));
    }

  const RowCache cache;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < groups.size();)
      fill_group(c, cache, groups[k]);
  };
  const int threads = std::min<int>(c.jobs, int(groups.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t)
    pool.emplace_back(worker);
  worker();
  for (std::thread &t : pool)
    t.join();

  std::vector<Row> rows;
  for (const Group &g : groups)
    rows.insert(rows.end(), g.rows.begin(), g.rows.end());
  const auto failed = std::count_if(rows.begin(), rows.end(),
                                    [](const Row &r) { return !r.back().empty(); });

  std::ostringstream csv;
  csv << json{{"format", "sobolev-lab/table"},
              {"version", kVersion},
              {"config", config_json(c)}}
             .dump()
      << '\n';
  for (std::size_t k = 0; k < kColumns.size(); ++k)
    csv << (k ? "," : "") << kColumns[k];
  csv << '\n';
  for (const Row &row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k)
      csv << (k ? "," : "") << row[k];
    csv << '\n';
  }
  {
    std::ofstream out = open_output(c, "table.csv");
    out << csv.str();
  }

  if (c.format == "csv") {
    std::cout << csv.str();
  } else if (c.format == "json") {
    json all = json::array();
    for (const Row &row : rows) {
      json obj;
      for (std::size_t k = 0; k < kColumns.size(); ++k)
        obj[kColumns[k]] = row[k];
      all.push_back(obj);
    }
    std::cout << all.dump(2) << '\n';
  } else {
    const std::vector<std::size_t> shown = {1, 2, 3, 5, 9, 12, 13, 16};
    std::vector<std::size_t> width(kColumns.size(), 0);
    for (std::size_t k : shown) {
      width[k] = kColumns[k].size();
      for (const Row &row : rows)
        width[k] = std::max(width[k], row[k].size());
    }
    auto line = [&](const Row &row) {
      for (std::size_t k : shown)
        std::cout << std::left << std::setw(int(width[k]) + 2) << row[k];
      std::cout << '\n';
    };
    line(kColumns);
    for (const Row &row : rows)
      line(row);
  }
  if (failed)
    std::cerr << "sobolev_lab: warning: " << failed << " of " << rows.size()
              << " rows failed; see the error column\n";
  return 0;
}

int run(RunConfig c) {
  check_config(c);
  if (c.command == "ball")
    return cmd_ball(c);
  if (c.command == "domain")
    return cmd_domain(c);
  if (c.command == "verify")
    return cmd_verify(c);
  if (c.command == "rearrange")
    return cmd_rearrange(c);
  if (c.command == "table")
    return cmd_table(c);
  throw usage_error("unknown command " + c.command);
}

// Reads the run configuration embedded in an output file: either a JSON
// document or a JSON header line.
RunConfig replay_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw usage_error("cannot open " + path);
  std::string first;
  std::getline(in, first);
  json j;
  try {
    j = json::parse(first);
  } catch (const json::exception &) {
    in.clear();
    in.seekg(0);
    try {
      j = json::parse(in);
    } catch (const json::exception &) {
      throw usage_error(path + " carries no JSON header");
    }
  }
  if (!j.contains("config"))
    throw usage_error(path + " carries no run configuration");
  return config_from_json(j.at("config"));
}

int exit_code(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Usage:
    return 2;
  case ErrorKind::Solver:
    return 3;
  case ErrorKind::Verification:
    return 4;
  }
  return 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Extremal Sobolev functions, comparison balls and reverse "
               "Hoelder checks."};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help and exit");

  RunConfig cfg;
  std::vector<std::string> domain_args;
  std::string spacing = "1/128";
  std::string replay_file;
  std::string replay_out;

  auto common = [&](CLI::App *sub, bool grid) {
    sub->set_help_flag("--help", "print help and exit");
    sub->add_option("-n", cfg.n, "dimension")->capture_default_str();
    sub->add_option("-p", cfg.p, "exponent p (repeatable for table)")
        ->capture_default_str();
    sub->add_option("-q", cfg.q, "comparison exponent q (repeatable)");
    sub->add_option("--tol", cfg.tol, "solver tolerance (default: module default)");
    sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
    sub->add_option("--format", cfg.format, "stdout format")
        ->check(CLI::IsMember({"json", "csv", "table"}))
        ->capture_default_str();
    sub->add_flag("--experimental-supercritical", cfg.supercritical,
                  "allow p > 2 where the solvers support it");
    if (grid) {
      sub->add_option("--domain", domain_args,
                      "domain spec: inline JSON or a JSON file");
      sub->add_option("--h", spacing, "grid spacing, e.g. 1/128")
          ->capture_default_str();
      sub->add_option("--max-iter", cfg.max_iter, "fixed-point iteration cap")
          ->capture_default_str();
    }
  };

  CLI::App *ball = app.add_subcommand("ball", "C_p and the extremal of the unit ball");
  common(ball, false);
  CLI::App *domain = app.add_subcommand("domain", "C_p and the extremal of a planar domain");
  common(domain, true);
  CLI::App *verify = app.add_subcommand("verify", "reverse Hoelder report for a domain");
  common(verify, true);
  CLI::App *rearrange = app.add_subcommand("rearrange", "decreasing rearrangement of a field file");
  common(rearrange, false);
  rearrange->add_option("--field", cfg.field, "field file")->required();
  CLI::App *table = app.add_subcommand("table", "sweep over domains, p and q");
  common(table, true);
  table->add_option("--jobs", cfg.jobs, "parallel rows")->capture_default_str();
  table->add_option("--budget", cfg.budget, "maximum number of rows")
      ->capture_default_str();
  CLI::App *replay = app.add_subcommand("replay", "rerun the configuration embedded in an output file");
  replay->set_help_flag("--help", "print help and exit");
  replay->add_option("file", replay_file, "output file")->required();
  replay->add_option("--out", replay_out, "override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (replay->parsed()) {
      RunConfig c = replay_config(replay_file);
      if (!replay_out.empty())
        c.out = replay_out;
      return run(c);
    }
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.h = parse_spacing(spacing);
    for (const std::string &d : domain_args)
      cfg.domains.push_back(domain_to_json(load_domain(d)));
    return run(cfg);
  } catch (const Error &e) {
    std::cerr << "sobolev_lab: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception &e) {
    std::cerr << "sobolev_lab: internal error: " << e.what() << '\n';
    return 1;
  }
}
