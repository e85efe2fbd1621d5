#include "app.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "diforms/group_rep.hpp"
#include "diforms/models.hpp"
#include "diforms/spectral.hpp"

namespace {

using diforms::Atom;
using diforms::Complex;
using diforms::Errc;
using diforms::Error;
using diforms::Section;
using json = nlohmann::ordered_json;

struct CommonFlags {
  std::string config_path;
  std::string out_path;
  bool no_timestamp = false;
  double tolerance = 1e-10;
  std::uint64_t seed = 1;
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) diforms::raise(Errc::config_error, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    diforms::raise(Errc::config_error, "cannot parse " + path + ": " + e.what());
  }
  return doc;
}

Complex parse_complex(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    diforms::raise(Errc::config_error, "complex values are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

Eigen::VectorXcd parse_cvector(const json& j) {
  if (!j.is_array()) diforms::raise(Errc::config_error, "vector must be an array");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_complex(j[i]);
  return v;
}

Eigen::MatrixXcd parse_cmatrix(const json& j) {
  if (!j.is_array() || j.empty()) diforms::raise(Errc::config_error, "matrix must be a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXcd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows)
      diforms::raise(Errc::config_error, "matrix must be square");
    if (r == 0) m.resize(rows, rows);
    for (Eigen::Index c = 0; c < rows; ++c) m(r, c) = parse_complex(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

struct BuiltModel {
  diforms::AtomicMeasureSpace space;
  diforms::FiberLayout layout;
  diforms::DirectIntegralForm form;
};

BuiltModel build_explicit(const json& params) {
  if (!params.contains("atoms") || !params.contains("weights") || !params.contains("dims") ||
      !params.contains("matrices"))
    diforms::raise(Errc::config_error, "explicit model needs atoms, weights, dims, matrices");
  std::vector<Atom> atoms;
  for (const auto& a : params["atoms"]) atoms.push_back(a.get<Atom>());
  std::vector<double> weights = params["weights"].get<std::vector<double>>();
  std::vector<int> dims = params["dims"].get<std::vector<int>>();
  std::vector<double> scales;
  if (params.contains("metric_scales"))
    scales = params["metric_scales"].get<std::vector<double>>();
  auto space = diforms::make_space(atoms, weights);
  diforms::FiberLayout layout(space, dims, scales);
  std::vector<Eigen::MatrixXcd> matrices;
  if (params["matrices"].size() != atoms.size())
    diforms::raise(Errc::config_error, "one matrix per atom required");
  for (const auto& m : params["matrices"]) matrices.push_back(parse_cmatrix(m));
  try {
    return {space, layout, diforms::DirectIntegralForm(layout, std::move(matrices))};
  } catch (const Error& e) {
    if (e.code() == Errc::non_hermitian_form || e.code() == Errc::dimension_mismatch)
      diforms::raise(Errc::config_error, e.what());
    throw;
  }
}

BuiltModel build_model(const json& config) {
  const std::string kind = config.value("kind", "");
  if (kind == "explicit") {
    if (!config.contains("explicit"))
      diforms::raise(Errc::config_error, "missing explicit model parameters");
    return build_explicit(config["explicit"]);
  }
  if (kind == "position") {
    const json& p = config.value("position", json::object());
    if (!p.contains("k_min") || !p.contains("k_max") || !p.contains("n_per_cell"))
      diforms::raise(Errc::config_error, "position model needs k_min, k_max, n_per_cell");
    try {
      auto model = diforms::position_model(p["k_min"].get<int>(), p["k_max"].get<int>(),
                                           p["n_per_cell"].get<int>());
      return {model.space, model.layout, model.form};
    } catch (const Error& e) {
      diforms::raise(Errc::config_error, e.what());
    }
  }
  if (kind == "random") {
    const json& p = config.value("random", json::object());
    const auto range = p.value("eig_range", std::vector<double>{-5.0, 5.0});
    if (range.size() != 2) diforms::raise(Errc::config_error, "eig_range is [lo, hi]");
    try {
      auto model = diforms::random_model(p.value("seed", std::uint64_t{1}),
                                         p.value("n_atoms", 8), p.value("max_dim", 6),
                                         range[0], range[1]);
      return {model.space, model.layout, model.form};
    } catch (const Error& e) {
      diforms::raise(Errc::config_error, e.what());
    }
  }
  diforms::raise(Errc::config_error, "unknown model kind '" + kind + "'");
}

std::vector<Section> load_sections(const std::string& path, const diforms::FiberLayout& layout) {
  const json doc = load_json(path);
  if (!doc.contains("sections") || !doc["sections"].is_array())
    diforms::raise(Errc::config_error, "sections file needs a 'sections' array");
  std::vector<Section> out;
  for (const json& s : doc["sections"]) {
    Section section(layout);
    if (!s.is_array())
      diforms::raise(Errc::config_error, "a section is a list of {atom, vector} pairs");
    for (const json& pair : s) {
      if (!pair.contains("atom") || !pair.contains("vector"))
        diforms::raise(Errc::config_error, "a section entry needs 'atom' and 'vector'");
      try {
        section.set_fiber(pair["atom"].get<Atom>(), parse_cvector(pair["vector"]));
      } catch (const Error& e) {
        diforms::raise(Errc::config_error, e.what());
      }
    }
    out.push_back(std::move(section));
  }
  return out;
}

void emit(const json& report, const CommonFlags& flags) {
  const std::string text = report.dump(2) + "\n";
  if (flags.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(flags.out_path, std::ios::binary);
  if (!out) diforms::raise(Errc::config_error, "cannot write " + flags.out_path);
  out << text;
}

json header(const char* command, const CommonFlags& flags) {
  json doc;
  doc["command"] = command;
  if (!flags.no_timestamp) {
    const auto now = std::chrono::system_clock::now();
    doc["timestamp"] =
        static_cast<std::int64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                      now.time_since_epoch())
                                      .count());
  }
  return doc;
}

json model_summary(const BuiltModel& model, const diforms::SpectralModel& spec) {
  json m;
  m["atom_count"] = model.space.size();
  m["total_measure"] = model.space.total_measure();
  m["m_below"] = spec.semibound().m_below;
  m["m_above"] = spec.semibound().m_above;
  m["spectrum_min"] = spec.semibound().spectrum_min;
  m["spectrum_max"] = spec.semibound().spectrum_max;
  if (!model.space.truncation_note().empty())
    m["truncation_note"] = model.space.truncation_note();
  return m;
}

int cmd_represent(const CommonFlags& flags, const std::string& sections_path,
                  bool tolerance_flag_set) {
  const json config = load_json(flags.config_path);
  BuiltModel model = build_model(config);
  if (sections_path.empty())
    diforms::raise(Errc::config_error, "represent needs --sections <file>");
  std::vector<Section> sections = load_sections(sections_path, model.layout);

  const diforms::SpectralModel spec = diforms::decompose(model.form);
  const diforms::DFinWitness witness{
      diforms::all_atoms(model.space),
      diforms::BorelSetSpec::closed(spec.semibound().spectrum_min - 1.0,
                                    spec.semibound().spectrum_max + 1.0)};
  // An explicit --tolerance wins over the config's own override.
  const double tol =
      tolerance_flag_set ? flags.tolerance : config.value("tolerance", flags.tolerance);

  json doc = header("represent", flags);
  doc["model"] = model_summary(model, spec);
  json reports = json::array();
  bool all_pass = true;
  for (const Section& phi : sections) {
    const diforms::RepresentationReport r =
        diforms::verify_representation(spec, phi, witness, tol);
    json entry;
    entry["q_direct"] = r.q_direct;
    entry["q_spectral"] = r.q_spectral;
    entry["q_global_spectral"] = r.q_global_spectral;
    entry["abs_error"] = r.abs_error;
    entry["rel_error"] = r.rel_error;
    entry["fiber_vs_global_rel"] = r.fiber_vs_global_rel;
    entry["first_abs_moment"] = r.first_abs_moment;
    entry["second_moment"] = r.second_moment;
    entry["graph_norm"] = r.graph_norm;
    entry["in_dfin"] = r.in_dfin;
    entry["in_dt"] = r.in_dt;
    entry["verdict"] = diforms::to_string(r.verdict);
    reports.push_back(std::move(entry));
    if (r.verdict == diforms::RepresentationVerdict::fail) all_pass = false;
  }
  doc["sections"] = std::move(reports);
  doc["all_pass"] = all_pass;
  emit(doc, flags);
  return all_pass ? 0 : 1;
}

diforms::IndexSet random_subset(const diforms::AtomicMeasureSpace& space, std::mt19937_64& rng) {
  std::vector<Atom> members;
  for (Atom a : space.atoms())
    if (rng() & 1u) members.push_back(a);
  return diforms::IndexSet(std::move(members));
}

diforms::Partition random_partition(const diforms::IndexSet& parent, std::mt19937_64& rng,
                                    int n_parts) {
  std::vector<std::vector<Atom>> buckets(static_cast<std::size_t>(n_parts));
  std::uniform_int_distribution<int> pick(0, n_parts - 1);
  for (Atom a : parent.members()) buckets[static_cast<std::size_t>(pick(rng))].push_back(a);
  diforms::Partition p;
  p.parent = parent;
  for (auto& b : buckets) p.parts.push_back(diforms::IndexSet(std::move(b)));
  return p;
}

json property_entry(const std::string& name, double residual, double tolerance, bool pass) {
  json j;
  j["name"] = name;
  j["max_residual"] = residual;
  j["tolerance"] = tolerance;
  j["pass"] = pass;
  return j;
}

int cmd_check(const CommonFlags& flags, const std::string& suite) {
  const json config = load_json(flags.config_path);
  json doc = header("check", flags);
  doc["suite"] = suite;
  doc["seed"] = flags.seed;
  json properties = json::array();
  std::mt19937_64 rng(flags.seed);

  if (suite == "oa") {
    BuiltModel model = build_model(config);
    double max_residual = 0.0;
    double max_cross = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      Section phi = diforms::random_section(model.layout, rng);
      diforms::IndexSet parent = random_subset(model.space, rng);
      diforms::Partition p = random_partition(parent, rng, 3);
      max_residual =
          std::max(max_residual, diforms::check_orthogonal_additivity(model.form, phi, p).residual);
      diforms::IndexSet d1 = random_subset(model.space, rng);
      diforms::IndexSet d2 = diforms::all_atoms(model.space).subtract(d1);
      Section psi = diforms::random_section(model.layout, rng);
      max_cross =
          std::max(max_cross, std::abs(diforms::cross_term(model.form, d1, d2, phi, psi)));
    }
    properties.push_back(property_entry("partition_additivity", max_residual, 1e-11,
                                        max_residual <= 1e-11));
    properties.push_back(property_entry("disjoint_cross_terms", max_cross, 1e-12,
                                        max_cross <= 1e-12));
  } else if (suite == "tails") {
    auto geo = diforms::geometric_tail_model(24);
    std::vector<diforms::IndexSet> tails;
    for (int n = 1; n <= 20; ++n) {
      std::vector<Atom> members;
      for (int k = n; k <= 24; ++k) members.push_back(k);
      tails.push_back(diforms::IndexSet(std::move(members)));
    }
    const diforms::TailReport rep =
        diforms::check_tail_vanishing(geo.form, geo.section, tails, 1e-5);
    double worst_ratio = 0.0;
    for (int n = 1; n <= 20; ++n)
      worst_ratio = std::max(worst_ratio, rep.values[static_cast<std::size_t>(n - 1)] /
                                              std::ldexp(1.0, 1 - n));
    properties.push_back(property_entry("geometric_tail_bound", worst_ratio, 1.0,
                                        worst_ratio <= 1.0 && rep.vanished));
  } else if (suite == "closability") {
    BuiltModel model = build_model(config);
    Section phi = diforms::random_section(model.layout, rng);
    std::vector<Section> seq;
    for (int n = 1; n <= 8; ++n) seq.push_back(phi * Complex(1.0 / n, 0.0));
    const auto scaling = diforms::closability_probe(
        [&model](const Section& s) { return diforms::eval_q(model.form, s); }, seq);
    const bool scaling_ok =
        scaling.status == diforms::ClosabilityVerdict::Status::consistent;
    properties.push_back(
        property_entry("scaling_sequence_consistent", scaling_ok ? 0.0 : 1.0, 0.5, scaling_ok));

    const auto [family, verdict] = diforms::spike_family(8);
    const bool spike_ok = verdict.status == diforms::ClosabilityVerdict::Status::violation;
    properties.push_back(
        property_entry("spike_family_violation_detected", spike_ok ? 0.0 : 1.0, 0.5, spike_ok));
  } else if (suite == "csb") {
    BuiltModel model = build_model(config);
    const diforms::SpectralModel spec = diforms::decompose(model.form);
    std::vector<std::pair<Section, Section>> samples;
    for (int i = 0; i < 200; ++i)
      samples.emplace_back(diforms::random_section(model.layout, rng),
                           diforms::random_section(model.layout, rng));
    samples.emplace_back(Section::zero(model.layout), diforms::random_section(model.layout, rng));
    const diforms::CsbResult r = diforms::csb_check(
        [&model](const Section& s) { return diforms::eval_q(model.form, s); },
        [&spec](const Section& s) {
          const double g = diforms::graph_norm(spec, s);
          return g * g;
        },
        1.0, samples);
    properties.push_back(property_entry("cauchy_schwarz_graph_norm", r.max_excess, 1e-10,
                                        r.holds));
  } else if (suite == "norms") {
    bool all = true;
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      auto model = diforms::random_model(flags.seed + static_cast<std::uint64_t>(trial) * 977,
                                         6, 5, -3.0, 9.0);
      const diforms::SpectralModel spec = diforms::decompose(model.form);
      const double m = std::max(0.0, -spec.semibound().spectrum_min);
      std::vector<Section> samples;
      for (int i = 0; i < 50; ++i) samples.push_back(diforms::random_section(model.layout, rng));
      const diforms::NormEquivalenceResult r =
          diforms::norm_equivalence_check(spec, m, samples);
      all = all && r.holds;
      worst = std::max({worst, r.max_upper_excess, r.max_lower_excess});
    }
    properties.push_back(property_entry("graph_norm_equivalence", worst, 1e-10, all));
  } else {
    diforms::raise(Errc::config_error, "unknown suite '" + suite + "'");
  }

  bool all_pass = true;
  for (const json& p : properties) all_pass = all_pass && p["pass"].get<bool>();
  doc["properties"] = std::move(properties);
  doc["all_pass"] = all_pass;
  emit(doc, flags);
  return all_pass ? 0 : 1;
}

int cmd_group(const CommonFlags& flags) {
  const json config = load_json(flags.config_path);
  if (config.value("kind", "") != "group")
    diforms::raise(Errc::config_error, "group command needs a config with kind 'group'");
  const json& p = config.value("group", json::object());
  if (!p.contains("cayley")) diforms::raise(Errc::config_error, "group config needs 'cayley' path");

  std::filesystem::path table_path(p["cayley"].get<std::string>());
  if (table_path.is_relative())
    table_path = std::filesystem::path(flags.config_path).parent_path() / table_path;
  std::ifstream table_in(table_path);
  if (!table_in) diforms::raise(Errc::config_error, "cannot open " + table_path.string());
  std::stringstream buffer;
  buffer << table_in.rdbuf();

  diforms::GroupModel group = [&buffer] {
    try {
      return diforms::GroupModel::build(diforms::parse_cayley_table(buffer.str()));
    } catch (const Error& e) {
      diforms::raise(Errc::config_error, e.what());
    }
  }();
  const diforms::RegularRepresentation rep = diforms::regular_rep(group);
  const diforms::IsotypicDecomposition decomp =
      diforms::isotypic_decomposition(rep, p.value("seed", flags.seed));

  std::vector<Complex> coefficients;
  if (p.contains("coefficients")) {
    for (const json& c : p["coefficients"]) coefficients.push_back(parse_complex(c));
  } else {
    // Hermitian random coefficients, zero at the identity so the operator is
    // traceless (non-semibounded whenever it is nonzero).
    std::mt19937_64 rng(p.value("coefficient_seed", flags.seed));
    std::normal_distribution<double> gauss(0.0, 1.0);
    coefficients.assign(static_cast<std::size_t>(group.order()), Complex(0.0));
    for (int g = 1; g < group.order(); ++g) {
      const int inv = group.inverse(g);
      if (g > inv) continue;
      if (g == inv) {
        coefficients[static_cast<std::size_t>(g)] = gauss(rng);
      } else {
        const Complex z(gauss(rng), gauss(rng));
        coefficients[static_cast<std::size_t>(g)] = z;
        coefficients[static_cast<std::size_t>(inv)] = std::conj(z);
      }
    }
  }

  const diforms::InvariantForm form = diforms::make_invariant_form(rep, decomp, coefficients);

  std::mt19937_64 rng(flags.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_vec = [&] {
    Eigen::VectorXcd v(group.order());
    for (int i = 0; i < group.order(); ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      v(i) = Complex(re, im);
    }
    return v;
  };

  std::vector<Eigen::VectorXcd> vectors;
  for (int i = 0; i < 10; ++i) vectors.push_back(random_vec());
  const double invariance =
      diforms::invariance_check([&form](const Eigen::VectorXcd& v) { return form.q(v); }, rep,
                                vectors);

  std::vector<std::pair<Eigen::VectorXcd, Eigen::VectorXcd>> pairs;
  for (int i = 0; i < 10; ++i) pairs.emplace_back(random_vec(), random_vec());
  double cross_max = 0.0;
  for (std::size_t i = 0; i < decomp.projections.size(); ++i)
    for (std::size_t j = i + 1; j < decomp.projections.size(); ++j)
      cross_max = std::max(cross_max,
                           diforms::cross_isotypic_vanish(form, decomp, {static_cast<int>(i)},
                                                          {static_cast<int>(j)}, pairs));

  const diforms::SpectralModel spec = diforms::decompose(form.isotypic_form);
  const diforms::DFinWitness witness{
      diforms::all_atoms(form.isotypic_layout.space()),
      diforms::BorelSetSpec::closed(spec.semibound().spectrum_min - 1.0,
                                    spec.semibound().spectrum_max + 1.0)};
  bool all_strong = true;
  double max_rel_error = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Section s = form.compress(random_vec(), decomp);
    const diforms::RepresentationReport r = diforms::verify_representation(spec, s, witness);
    all_strong = all_strong && r.verdict == diforms::RepresentationVerdict::strong;
    max_rel_error = std::max(max_rel_error, r.rel_error);
  }

  json doc = header("group", flags);
  doc["order"] = group.order();
  doc["class_count"] = group.conjugacy_classes().size();
  doc["ranks"] = decomp.ranks;
  doc["multiplicities"] = decomp.multiplicities;
  doc["decomposition_residual"] = decomp.max_residual;
  json coeffs = json::array();
  for (Complex c : coefficients) coeffs.push_back(complex_to_json(c));
  doc["coefficients"] = std::move(coeffs);
  doc["invariance_residual"] = invariance;
  doc["cross_term_max"] = cross_max;
  doc["spectrum_min"] = spec.semibound().spectrum_min;
  doc["spectrum_max"] = spec.semibound().spectrum_max;
  doc["representation_all_strong"] = all_strong;
  doc["representation_max_rel_error"] = max_rel_error;

  const bool all_pass = invariance <= 1e-10 && cross_max <= 1e-10 && all_strong &&
                        decomp.max_residual <= 1e-10;
  doc["all_pass"] = all_pass;
  emit(doc, flags);
  return all_pass ? 0 : 1;
}

}  // namespace

int run_app(int argc, char** argv) {
  CLI::App app{"Quadratic forms on direct-integral Hilbert spaces"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string sections_path;
  std::string suite;

  auto add_common = [&flags](CLI::App* cmd) {
    cmd->add_option("config", flags.config_path, "model config (JSON)")->required();
    cmd->add_option("--out", flags.out_path, "report output path (default stdout)");
    cmd->add_flag("--no-timestamp", flags.no_timestamp, "omit the timestamp field");
    cmd->add_option("--tolerance", flags.tolerance, "relative tolerance override");
    cmd->add_option("--seed", flags.seed, "sampling seed");
  };

  CLI::App* represent = app.add_subcommand("represent", "verify representability of sections");
  add_common(represent);
  represent->add_option("--sections", sections_path, "sections file (JSON)");
  CLI::Option* tol_flag = represent->get_option("--tolerance");

  CLI::App* check = app.add_subcommand("check", "run a property suite");
  add_common(check);
  check->add_option("--suite", suite, "one of oa, tails, closability, csb, norms")->required();

  CLI::App* group = app.add_subcommand("group", "isotypic decomposition and invariant forms");
  add_common(group);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return 0;
    }
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (represent->parsed())
      return cmd_represent(flags, sections_path, tol_flag->count() > 0);
    if (check->parsed()) return cmd_check(flags, suite);
    if (group->parsed()) return cmd_group(flags);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    // Broken form properties are verdict failures; anything else is a config
    // or usage problem.
    if (e.code() == Errc::not_invariant || e.code() == Errc::not_hermitian_coefficients)
      return 1;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
