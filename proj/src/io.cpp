#include "winstat/io.hpp"

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <sys/stat.h>
#include <unistd.h>

#include <json.hpp>

#include "sha256.hpp"
#include "winstat/error.hpp"
#include "winstat/version.hpp"

namespace winstat::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Files and formatting
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return buf.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const auto slash = path.find_last_of('/');
  const std::string dir = slash == std::string::npos
                              ? std::string(".")
                              : path.substr(0, slash);
  std::string tmp = dir + "/.winstat_tmp_XXXXXX";
  std::vector<char> tmpl(tmp.begin(), tmp.end());
  tmpl.push_back('\0');
  const int fd = ::mkstemp(tmpl.data());
  if (fd < 0) throw IoError("cannot create temp file near '" + path + "'");
  ::fchmod(fd, 0644);  // mkstemp defaults to 0600
  tmp.assign(tmpl.data());

  std::size_t written = 0;
  while (written < content.size()) {
    const ssize_t n =
        ::write(fd, content.data() + written, content.size() - written);
    if (n < 0) {
      ::close(fd);
      ::unlink(tmp.c_str());
      throw IoError("failed writing '" + path + "'");
    }
    written += static_cast<std::size_t>(n);
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    ::unlink(tmp.c_str());
    throw IoError("cannot move temp file onto '" + path + "'");
  }
}

std::string sha256_hex(std::string_view bytes) {
  return detail::Sha256::hex(bytes);
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double_cell(std::string_view cell, const std::string& where) {
  double value = 0.0;
  const auto res =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
    throw ParseError("cannot parse number '" + std::string(cell) + "' in " +
                     where);
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.emplace_back(line.substr(start));
      break;
    }
    cells.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

json parse_json_text(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw ParseError(what + " is not valid JSON");
  return j;
}

double require_number(const json& j, const std::string& key,
                      const std::string& what) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ParseError(what + " needs a numeric field '" + key + "'");
  return j.at(key).get<double>();
}

std::string require_string(const json& j, const std::string& key,
                           const std::string& what) {
  if (!j.contains(key) || !j.at(key).is_string())
    throw ParseError(what + " needs a string field '" + key + "'");
  return j.at(key).get<std::string>();
}

// ---------------------------------------------------------------------------
// JSON building blocks
// ---------------------------------------------------------------------------

const char* kind_name(ComponentKind k) {
  switch (k) {
    case ComponentKind::TimeToEvent:
      return "time_to_event";
    case ComponentKind::Ordinal:
      return "ordinal";
    default:
      return "continuous";
  }
}

const char* direction_name(Direction d) {
  return d == Direction::HigherBetter ? "higher_better" : "lower_better";
}

const char* flag_name(StatFlag f) {
  switch (f) {
    case StatFlag::Finite:
      return "finite";
    case StatFlag::Infinite:
      return "infinite";
    default:
      return "undefined";
  }
}

const char* scheme_name(WeightScheme s) {
  switch (s) {
    case WeightScheme::Equal:
      return "equal";
    case WeightScheme::PairCount:
      return "pair-count";
    default:
      return "sample-size";
  }
}

json flagged_value(double v, StatFlag flag) {
  return flag == StatFlag::Finite ? json(v) : json(nullptr);
}

json statistics_to_json(const WinStatistics& s) {
  return json{{"p_treatment", s.p_treatment},
              {"p_control", s.p_control},
              {"p_tie", s.p_tie},
              {"win_ratio", flagged_value(s.win_ratio, s.win_ratio_flag)},
              {"win_ratio_flag", flag_name(s.win_ratio_flag)},
              {"win_odds", flagged_value(s.win_odds, s.win_odds_flag)},
              {"win_odds_flag", flag_name(s.win_odds_flag)},
              {"net_benefit", s.net_benefit}};
}

json tally_to_json(const WinTally& t, const HceDefinition& hce) {
  json per_component = json::array();
  for (std::size_t i = 0; i < t.per_component.size(); ++i)
    per_component.push_back(
        {{"level", i + 1},
         {"name", hce.components[i].name},
         {"wins_treatment", t.per_component[i].wins_treatment},
         {"wins_control", t.per_component[i].wins_control}});
  return json{{"n_treatment", t.n_treatment},
              {"n_control", t.n_control},
              {"pairs", t.pairs()},
              {"wins_treatment", t.wins_treatment},
              {"wins_control", t.wins_control},
              {"ties", t.ties},
              {"per_component", per_component}};
}

json hce_to_json(const HceDefinition& hce) {
  json components = json::array();
  for (const auto& c : hce.components)
    components.push_back({{"name", c.name},
                          {"kind", kind_name(c.kind)},
                          {"direction", direction_name(c.direction)},
                          {"margin", c.margin}});
  return json{{"components", components}, {"horizon", hce.horizon}};
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json manifest_to_json(const Manifest& m) {
  json inputs = json::array();
  for (const auto& in : m.inputs)
    inputs.push_back(
        {{"name", in.name}, {"path", in.path}, {"sha256", in.sha256}});
  json j{{"tool", "winstat"},
         {"version", WINSTAT_VERSION_STRING},
         {"command", m.command},
         {"inputs", inputs},
         {"seeds", m.seeds}};
  if (!m.options_json.empty()) {
    json options = json::parse(m.options_json, nullptr, false);
    j["options"] = options.is_discarded() ? json::object() : options;
  }
  if (m.stamp) j["timestamp"] = utc_timestamp();
  return j;
}

json design_to_json(const theory::SlopeDesign& d) {
  return json{{"measurement_times", d.measurement_times},
              {"followup_years", d.followup_years},
              {"sigma_s", d.sigma_s},
              {"sigma_e", d.sigma_e},
              {"slope_mean_treat", d.slope_mean_treat},
              {"slope_mean_ctrl", d.slope_mean_ctrl}};
}

json validation_to_json(const ValidationReport& report) {
  auto issues = [](const std::vector<ValidationIssue>& list) {
    json arr = json::array();
    for (const auto& issue : list)
      arr.push_back({{"subject_id", issue.subject_id},
                     {"component", issue.component},
                     {"code", issue.code},
                     {"message", issue.message}});
    return arr;
  };
  return json{{"violations", issues(report.violations)},
              {"warnings", issues(report.warnings)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

// ---------------------------------------------------------------------------
// HCE config
// ---------------------------------------------------------------------------

HceDefinition parse_hce_json(const std::string& text) {
  const json j = parse_json_text(text, "HCE config");
  if (!j.contains("components") || !j.at("components").is_array())
    throw ParseError("HCE config needs a 'components' array");
  HceDefinition hce;
  hce.horizon = require_number(j, "horizon", "HCE config");
  for (const auto& cj : j.at("components")) {
    ComponentSpec comp;
    comp.name = require_string(cj, "name", "HCE component");
    const std::string kind = require_string(cj, "kind", "HCE component");
    if (kind == "time_to_event")
      comp.kind = ComponentKind::TimeToEvent;
    else if (kind == "ordinal")
      comp.kind = ComponentKind::Ordinal;
    else if (kind == "continuous")
      comp.kind = ComponentKind::Continuous;
    else
      throw ParseError("unknown component kind '" + kind + "'");
    if (cj.contains("direction")) {
      const std::string dir = require_string(cj, "direction", "HCE component");
      if (dir == "higher_better")
        comp.direction = Direction::HigherBetter;
      else if (dir == "lower_better")
        comp.direction = Direction::LowerBetter;
      else
        throw ParseError("unknown direction '" + dir + "'");
    }
    if (cj.contains("margin"))
      comp.margin = require_number(cj, "margin", "HCE component");
    hce.components.push_back(std::move(comp));
  }
  hce.check();
  return hce;
}

std::string hce_to_json_text(const HceDefinition& hce) {
  return dump(hce_to_json(hce));
}

// ---------------------------------------------------------------------------
// Subject CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> expected_header(const HceDefinition& hce) {
  std::vector<std::string> cols{"subject_id", "arm", "stratum",
                                "followup_time"};
  for (const auto& comp : hce.components) {
    if (comp.kind == ComponentKind::TimeToEvent) {
      cols.push_back(comp.name + "_time");
      cols.push_back(comp.name + "_status");
    } else {
      cols.push_back(comp.name + "_value");
    }
  }
  return cols;
}

std::string join(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out.push_back(',');
    out += cols[i];
  }
  return out;
}

}  // namespace

CsvDataset parse_dataset_csv(const std::string& text,
                             const HceDefinition& hce) {
  hce.check();
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError("dataset CSV is empty");

  const auto expected = expected_header(hce);
  const auto header = split_csv_line(lines.front());
  if (header != expected)
    throw ParseError("dataset CSV header must be exactly '" + join(expected) +
                     "'");
  if (lines.size() < 2) throw ParseError("dataset CSV has no subject rows");

  CsvDataset data;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split_csv_line(lines[li]);
    const std::string where = "row " + std::to_string(li + 1);
    if (cells.size() != expected.size())
      throw ParseError(where + " has " + std::to_string(cells.size()) +
                       " cells; expected " + std::to_string(expected.size()));
    SubjectRecord rec;
    rec.subject_id = cells[0];
    if (rec.subject_id.empty())
      throw ParseError(where + " has an empty subject_id");
    const std::string& label = cells[1];
    rec.arm = label == "1" ? 1 : label == "0" ? 0 : -1;
    if (!cells[2].empty()) rec.stratum = cells[2];
    rec.followup_time = parse_double_cell(cells[3], where + " followup_time");

    std::size_t col = 4;
    for (const auto& comp : hce.components) {
      if (comp.kind == ComponentKind::TimeToEvent) {
        const std::string& time_cell = cells[col++];
        const std::string& status_cell = cells[col++];
        if (time_cell.empty() && status_cell.empty()) continue;  // no entry
        if (time_cell.empty() || status_cell.empty())
          throw ParseError(where + ": component '" + comp.name +
                           "' needs both time and status (or neither)");
        const double time =
            parse_double_cell(time_cell, where + " " + comp.name + "_time");
        bool occurred;
        if (status_cell == "1")
          occurred = true;
        else if (status_cell == "0")
          occurred = false;
        else
          throw ParseError(where + ": status '" + status_cell +
                           "' must be 1 (occurred) or 0 (censored)");
        rec.observations[comp.name] = Observation::event(occurred, time);
      } else {
        const std::string& value_cell = cells[col++];
        rec.observations[comp.name] =
            value_cell.empty()
                ? Observation::missing()
                : Observation::measured(parse_double_cell(
                      value_cell, where + " " + comp.name + "_value"));
      }
    }
    data.arm_labels.push_back(label);
    data.records.push_back(std::move(rec));
  }
  return data;
}

std::vector<SubjectRecord> select_arms(const CsvDataset& data,
                                       const std::string& treatment_label,
                                       const std::string& comparator_label) {
  if (treatment_label == comparator_label)
    throw ValidationError("treatment and comparator labels must differ");
  std::vector<SubjectRecord> out;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    if (data.arm_labels[i] == treatment_label) {
      out.push_back(data.records[i]);
      out.back().arm = 1;
    } else if (data.arm_labels[i] == comparator_label) {
      out.push_back(data.records[i]);
      out.back().arm = 0;
    }
  }
  for (const auto& label : {treatment_label, comparator_label}) {
    const int code = label == treatment_label ? 1 : 0;
    bool found = false;
    for (const auto& rec : out) found = found || rec.arm == code;
    if (!found)
      throw ValidationError("no subjects with arm label '" + label + "'");
  }
  return out;
}

std::map<std::string, std::vector<SubjectRecord>> group_by_arm(
    const CsvDataset& data) {
  std::map<std::string, std::vector<SubjectRecord>> arms;
  for (std::size_t i = 0; i < data.records.size(); ++i)
    arms[data.arm_labels[i]].push_back(data.records[i]);
  return arms;
}

std::string dataset_to_csv(const std::vector<SubjectRecord>& records,
                           const HceDefinition& hce,
                           const std::vector<std::string>* arm_labels) {
  hce.check();
  std::string out = join(expected_header(hce)) + "\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    out += rec.subject_id;
    out.push_back(',');
    out += arm_labels ? (*arm_labels)[i] : std::to_string(rec.arm);
    out.push_back(',');
    if (rec.stratum) out += *rec.stratum;
    out.push_back(',');
    out += format_double(rec.followup_time);
    for (const auto& comp : hce.components) {
      auto it = rec.observations.find(comp.name);
      const Observation* obs =
          it == rec.observations.end() ? nullptr : &it->second;
      if (comp.kind == ComponentKind::TimeToEvent) {
        out.push_back(',');
        if (obs && obs->kind == Observation::Kind::Event) {
          out += format_double(obs->time);
          out.push_back(',');
          out += obs->occurred ? "1" : "0";
        } else {
          out.push_back(',');
        }
      } else {
        out.push_back(',');
        if (obs && obs->kind == Observation::Kind::Value)
          out += format_double(obs->value);
      }
    }
    out.push_back('\n');
  }
  return out;
}

PairedDataset parse_paired_csv(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError("paired CSV is empty");
  const auto header = split_csv_line(lines.front());
  if (header != std::vector<std::string>{"subject_id", "y1", "y0"})
    throw ParseError("paired CSV header must be exactly 'subject_id,y1,y0'");
  if (lines.size() < 2) throw ParseError("paired CSV has no subject rows");
  PairedDataset rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split_csv_line(lines[li]);
    const std::string where = "row " + std::to_string(li + 1);
    if (cells.size() != 3)
      throw ParseError(where + " must have exactly 3 cells");
    rows.push_back(PairedRow{cells[0],
                             parse_double_cell(cells[1], where + " y1"),
                             parse_double_cell(cells[2], where + " y0")});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Theory / scenario configs
// ---------------------------------------------------------------------------

std::vector<theory::StratumSpec> parse_strata_json(const std::string& text) {
  const json j = parse_json_text(text, "strata config");
  if (!j.contains("strata") || !j.at("strata").is_array() ||
      j.at("strata").empty())
    throw ParseError("strata config needs a non-empty 'strata' array");
  std::vector<theory::StratumSpec> strata;
  for (const auto& sj : j.at("strata")) {
    theory::StratumSpec s;
    s.weight = require_number(sj, "weight", "stratum");
    s.mu1 = require_number(sj, "mu_treat", "stratum");
    s.mu0 = require_number(sj, "mu_ctrl", "stratum");
    s.sigma = require_number(sj, "sigma", "stratum");
    strata.push_back(s);
  }
  return strata;
}

namespace {

theory::SlopeDesign design_from_json(const json& j) {
  const double sigma_s = require_number(j, "sigma_s", "slope design");
  const double sigma_e = require_number(j, "sigma_e", "slope design");
  const double mt = require_number(j, "slope_mean_treat", "slope design");
  const double mc = require_number(j, "slope_mean_ctrl", "slope design");
  theory::SlopeDesign d;
  if (j.contains("measurement_times")) {
    if (!j.at("measurement_times").is_array())
      throw ParseError("'measurement_times' must be an array");
    d.measurement_times =
        j.at("measurement_times").get<std::vector<double>>();
    if (d.measurement_times.empty())
      throw ParseError("'measurement_times' must not be empty");
    d.followup_years = d.measurement_times.back();
    d.sigma_s = sigma_s;
    d.sigma_e = sigma_e;
    d.slope_mean_treat = mt;
    d.slope_mean_ctrl = mc;
    d.check();
    return d;
  }
  const double n = require_number(j, "n_measurements", "slope design");
  const double followup = require_number(j, "followup_years", "slope design");
  if (n != std::trunc(n))
    throw ParseError("'n_measurements' must be an integer");
  return theory::equally_spaced_design(static_cast<int>(n), followup, sigma_s,
                                       sigma_e, mt, mc);
}

}  // namespace

theory::SlopeDesign parse_design_json(const std::string& text) {
  return design_from_json(parse_json_text(text, "slope design"));
}

sim::SimScenario parse_scenario_json(const std::string& text) {
  const json j = parse_json_text(text, "scenario config");
  if (!j.contains("design") || !j.at("design").is_object())
    throw ParseError("scenario config needs a 'design' object");
  sim::SimScenario s;
  s.design = design_from_json(j.at("design"));
  const double n = require_number(j, "n_per_arm", "scenario config");
  if (n != std::trunc(n) || n < 2)
    throw ParseError("'n_per_arm' must be an integer >= 2");
  s.n_per_arm = static_cast<std::int64_t>(n);
  if (j.contains("intercept_mean"))
    s.intercept_mean = require_number(j, "intercept_mean", "scenario config");
  if (j.contains("intercept_sd"))
    s.intercept_sd = require_number(j, "intercept_sd", "scenario config");
  if (j.contains("seed")) {
    const double seed = require_number(j, "seed", "scenario config");
    if (seed != std::trunc(seed) || seed < 0)
      throw ParseError("'seed' must be a nonnegative integer");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  if (j.contains("event_components")) {
    if (!j.at("event_components").is_array())
      throw ParseError("'event_components' must be an array");
    for (const auto& ej : j.at("event_components")) {
      sim::EventComponentSpec ev;
      ev.name = require_string(ej, "name", "event component");
      ev.hazard_treat = require_number(ej, "hazard_treat", "event component");
      ev.hazard_ctrl = require_number(ej, "hazard_ctrl", "event component");
      s.event_components.push_back(std::move(ev));
    }
  }
  s.check();
  return s;
}

namespace {

json scenario_to_json(const sim::SimScenario& s) {
  json events = json::array();
  for (const auto& ev : s.event_components)
    events.push_back({{"name", ev.name},
                      {"hazard_treat", ev.hazard_treat},
                      {"hazard_ctrl", ev.hazard_ctrl}});
  return json{{"design", design_to_json(s.design)},
              {"n_per_arm", s.n_per_arm},
              {"intercept_mean", s.intercept_mean},
              {"intercept_sd", s.intercept_sd},
              {"event_components", events},
              {"seed", s.seed}};
}

}  // namespace

std::string scenario_to_json_text(const sim::SimScenario& s) {
  return dump(scenario_to_json(s));
}

// ---------------------------------------------------------------------------
// Result documents
// ---------------------------------------------------------------------------

std::string run_analysis(const CsvDataset& data, const HceDefinition& hce,
                         const AnalyzeOptions& options,
                         const Manifest& manifest) {
  const auto records =
      select_arms(data, options.treatment_label, options.comparator_label);
  const ValidationReport validation = validate_dataset(records, hce);
  if (!validation.ok()) {
    std::ostringstream msg;
    msg << "dataset is not analyzable; " << validation.violations.size()
        << " violation(s):";
    const std::size_t shown =
        std::min<std::size_t>(validation.violations.size(), 5);
    for (std::size_t i = 0; i < shown; ++i)
      msg << "\n  - " << validation.violations[i].message << " [subject '"
          << validation.violations[i].subject_id << "']";
    if (shown < validation.violations.size()) msg << "\n  - ...";
    throw ValidationError(msg.str());
  }

  const WinTally t = tally(records, hce, options.threads);
  const WinStatistics stats = win_statistics(t);

  json report{{"manifest", manifest_to_json(manifest)},
              {"hce", hce_to_json(hce)},
              {"arms",
               {{"treatment_label", options.treatment_label},
                {"comparator_label", options.comparator_label}}},
              {"validation", validation_to_json(validation)},
              {"tally", tally_to_json(t, hce)},
              {"statistics", statistics_to_json(stats)}};

  if (options.stratified) {
    const StratifiedResult strat = stratified_win_ratio(
        records, hce, options.weight_scheme, options.threads);
    json per_stratum = json::object();
    for (const auto& [label, sr] : strat.per_stratum)
      per_stratum[label] = {{"weight", sr.weight},
                            {"tally", tally_to_json(sr.tally, hce)},
                            {"statistics", statistics_to_json(sr.stats)}};
    report["stratified"] = {
        {"weight_scheme", scheme_name(strat.scheme)},
        {"pooled_win_ratio",
         flagged_value(strat.pooled_win_ratio, strat.pooled_flag)},
        {"pooled_flag", flag_name(strat.pooled_flag)},
        {"per_stratum", per_stratum}};
  }

  if (options.permutations) {
    const PermutationResult perm = permutation_test(
        records, hce, *options.permutations, options.seed, options.threads);
    report["permutation"] = {{"statistic", "net_benefit"},
                             {"observed", perm.observed_net_benefit},
                             {"n_permutations", perm.n_permutations},
                             {"seed", perm.seed},
                             {"p_value", perm.p_value}};
  }
  return dump(report);
}

std::string run_transitivity(const CsvDataset& data, const HceDefinition& hce,
                             int threads, const Manifest& manifest) {
  const auto arms = group_by_arm(data);
  const TransitivityResult result = transitivity_check(arms, hce, threads);
  json pairwise = json::array();
  for (const auto& [pair, stats] : result.pairwise)
    pairwise.push_back({{"treatment", pair.first},
                        {"comparator", pair.second},
                        {"statistics", statistics_to_json(stats)}});
  json cycles = json::array();
  for (const auto& cycle : result.cycles)
    cycles.push_back({cycle[0], cycle[1], cycle[2]});
  return dump(json{{"manifest", manifest_to_json(manifest)},
                   {"arms", result.arm_labels},
                   {"pairwise", pairwise},
                   {"cycles", cycles}});
}

std::string run_individual(const PairedDataset& rows,
                           const Manifest& manifest) {
  const WinStatistics stats = individual_win_ratio(rows);
  return dump(json{{"manifest", manifest_to_json(manifest)},
                   {"n_subjects", rows.size()},
                   {"statistics", statistics_to_json(stats)}});
}

std::string theory_normal_report(const theory::NormalArmPair& pair,
                                 const Manifest& manifest) {
  const double theta = theory::win_prob_normal(pair);
  const theory::WinSummary s = theory::stats_from_theta(theta);
  return dump(json{{"manifest", manifest_to_json(manifest)},
                   {"inputs",
                    {{"mu_treat", pair.mu1},
                     {"mu_ctrl", pair.mu0},
                     {"sd_treat", pair.sigma1},
                     {"sd_ctrl", pair.sigma0}}},
                   {"theta", theta},
                   {"win_ratio", s.win_ratio},
                   {"win_odds", s.win_odds},
                   {"net_benefit", s.net_benefit}});
}

namespace {

json slope_method_json(const theory::SlopeWinRatio& r) {
  return json{{"variance", r.variance},
              {"theta", r.theta},
              {"win_ratio", r.win_ratio}};
}

}  // namespace

std::string theory_slope_report(const theory::SlopeDesign& design,
                                const Manifest& manifest) {
  const auto truth = theory::slope_result(design, theory::SlopeMethod::True);
  const auto lsme = theory::slope_result(design, theory::SlopeMethod::Lsme);
  const auto mc =
      theory::slope_result(design, theory::SlopeMethod::MeanChange);
  json methods{{"true", slope_method_json(truth)},
               {"lsme", slope_method_json(lsme)},
               {"mc", slope_method_json(mc)}};
  methods["lsme"]["attenuation_vs_true"] =
      1.0 - lsme.win_ratio / truth.win_ratio;
  methods["mc"]["attenuation_vs_true"] = 1.0 - mc.win_ratio / truth.win_ratio;
  return dump(json{{"manifest", manifest_to_json(manifest)},
                   {"design", design_to_json(design)},
                   {"methods", methods}});
}

std::string theory_strata_report(std::span<const theory::StratumSpec> strata,
                                 const Manifest& manifest) {
  json per_stratum = json::array();
  for (std::size_t i = 0; i < strata.size(); ++i) {
    const double theta = theory::stratum_win_prob(strata[i]);
    per_stratum.push_back({{"stratum", i + 1},
                           {"weight", strata[i].weight},
                           {"mu_treat", strata[i].mu1},
                           {"mu_ctrl", strata[i].mu0},
                           {"sigma", strata[i].sigma},
                           {"theta", theta},
                           {"win_ratio", theory::stratum_wr(strata[i])}});
  }
  const double marginal_theta = theory::marginal_win_prob(strata);
  return dump(
      json{{"manifest", manifest_to_json(manifest)},
           {"per_stratum", per_stratum},
           {"marginal",
            {{"theta", marginal_theta},
             {"win_ratio", theory::marginal_wr(strata)}}},
           {"stratified_pooled_win_ratio",
            theory::stratified_pooled_wr(strata)}});
}

std::string strata_to_csv(std::span<const theory::StratumSpec> strata) {
  std::string csv = "stratum,weight,mu_treat,mu_ctrl,sigma,theta,win_ratio\n";
  for (std::size_t i = 0; i < strata.size(); ++i) {
    const double theta = theory::stratum_win_prob(strata[i]);
    csv += std::to_string(i + 1) + ',' + format_double(strata[i].weight) +
           ',' + format_double(strata[i].mu1) + ',' +
           format_double(strata[i].mu0) + ',' +
           format_double(strata[i].sigma) + ',' + format_double(theta) + ',' +
           format_double(theory::stratum_wr(strata[i])) + '\n';
  }
  const double marginal_theta = theory::marginal_win_prob(strata);
  csv += "marginal,1,,,," + format_double(marginal_theta) + ',' +
         format_double(theory::marginal_wr(strata)) + '\n';
  csv += "pooled,1,,,,," + format_double(theory::stratified_pooled_wr(strata)) +
         '\n';
  return csv;
}

SweepOutputs run_sweep(const theory::SlopeDesign& base, theory::SweepAxis axis,
                       std::span<const double> grid,
                       const Manifest& manifest) {
  const auto rows = theory::sweep(base, axis, grid);

  std::string csv =
      "x,theta_true,wr_true,theta_lsme,wr_lsme,theta_mc,wr_mc\n";
  json json_rows = json::array();
  for (const auto& r : rows) {
    csv += format_double(r.x) + ',' + format_double(r.theta_true) + ',' +
           format_double(r.wr_true) + ',' + format_double(r.theta_lsme) +
           ',' + format_double(r.wr_lsme) + ',' + format_double(r.theta_mc) +
           ',' + format_double(r.wr_mc) + '\n';
    json_rows.push_back({{"x", r.x},
                         {"theta_true", r.theta_true},
                         {"wr_true", r.wr_true},
                         {"theta_lsme", r.theta_lsme},
                         {"wr_lsme", r.wr_lsme},
                         {"theta_mc", r.theta_mc},
                         {"wr_mc", r.wr_mc}});
  }
  const char* axis_name = axis == theory::SweepAxis::SlopeSd ? "slope_sd"
                          : axis == theory::SweepAxis::Followup
                              ? "followup"
                              : "n_measurements";
  const std::string json_text =
      dump(json{{"manifest", manifest_to_json(manifest)},
                {"axis", axis_name},
                {"design", design_to_json(base)},
                {"rows", json_rows}});
  return SweepOutputs{std::move(csv), json_text};
}

std::string run_simulation(const sim::SimScenario& scenario,
                           const SimulateOptions& options,
                           const Manifest& manifest) {
  json methods = json::object();
  const auto run_method = [&](sim::SlopeEstimator method, const char* key,
                              theory::SlopeMethod closed) {
    const auto closed_form = theory::slope_result(scenario.design, closed);
    const sim::McWrResult mc = sim::monte_carlo_wr(
        scenario, method, options.replications, options.threads);
    json replicates = json::array();
    for (std::size_t rep = 0; rep < mc.replicate_wr.size(); ++rep) {
      const double wr = mc.replicate_wr[rep];
      replicates.push_back(
          {{"replication", rep},
           {"win_ratio", std::isnan(wr) ? json(nullptr) : json(wr)},
           {"wins_treatment", mc.replicate_wins_t[rep]},
           {"wins_control", mc.replicate_wins_c[rep]},
           {"ties", mc.replicate_ties[rep]}});
    }
    json empirical{{"replications", mc.replications},
                   {"degenerate", mc.degenerate},
                   {"mean_win_ratio", std::isnan(mc.mean_wr)
                                          ? json(nullptr)
                                          : json(mc.mean_wr)},
                   {"se", mc.se_available ? json(mc.se_wr) : json(nullptr)},
                   {"estimate_variance",
                    std::isnan(mc.estimate_variance)
                        ? json(nullptr)
                        : json(mc.estimate_variance)},
                   {"flagged_subjects", mc.flagged_subjects},
                   {"replicates", replicates}};
    json block{{"closed_form", slope_method_json(closed_form)},
               {"empirical", empirical}};
    if (!std::isnan(mc.mean_wr)) {
      block["delta_vs_theory"] = mc.mean_wr - closed_form.win_ratio;
      if (mc.se_available)
        block["within_3_se"] = std::fabs(mc.mean_wr - closed_form.win_ratio) <=
                               3.0 * mc.se_wr;
    }
    methods[key] = block;
  };

  if (options.run_lsme)
    run_method(sim::SlopeEstimator::Lsme, "lsme", theory::SlopeMethod::Lsme);
  if (options.run_mc)
    run_method(sim::SlopeEstimator::MeanChange, "mc",
               theory::SlopeMethod::MeanChange);

  return dump(json{{"manifest", manifest_to_json(manifest)},
                   {"scenario", scenario_to_json(scenario)},
                   {"methods", methods}});
}

std::string export_simulated_dataset(const sim::SimScenario& scenario,
                                     std::int64_t replication,
                                     sim::SlopeEstimator method) {
  sim::SimScenario rep_scenario = scenario;
  rep_scenario.seed = sim::replication_seed(scenario, replication);
  const sim::SimulatedTrial trial = sim::simulate_trial(rep_scenario);
  const sim::SlopeEstimates slopes = sim::estimate_slopes(trial, method);
  const auto records = sim::to_records(rep_scenario, trial, slopes);
  return dataset_to_csv(records, sim::scenario_hce(rep_scenario));
}

}  // namespace winstat::io
