#pragma once

#include <fstream>
#include <future>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tcircle/distortion.hpp"
#include "tcircle/lambda.hpp"
#include "tcircle/periodic.hpp"
#include "tcircle/report.hpp"
#include "tcircle/thompson.hpp"
#include "tcircle/verify.hpp"

namespace tcircle {

namespace cli_detail {

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::InvalidInput, "cannot read " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, path + ": " + e.what());
  }
}

inline MapPtr load_map(const std::string& path) {
  return std::make_shared<const CoveringMap>(map_from_json(read_json_file(path)));
}

inline ojson to_ojson(const nlohmann::json& j) { return ojson::parse(j.dump()); }

inline ojson map_descriptor(const CoveringMap& phi) {
  return ojson{{"family", phi.family()}, {"a", phi.sin_coefficients()}, {"b", phi.cos_coefficients()}};
}

struct Analysis {
  ojson json;
  Table points;
};

inline Analysis analyze_map(const CoveringMap& phi, int periods, int s_max, unsigned density_depth) {
  Analysis out;
  auto& j = out.json;
  j["map"] = map_descriptor(phi);
  const auto sm = smoothness_report(phi, 1e-12);
  j["smoothness"] = ojson{{"fixes_zero", sm.fixes_zero},
                          {"unit_derivative_at_zero", sm.unit_derivative_at_zero},
                          {"flat_second_at_zero", sm.flat_second_at_zero},
                          {"monotone", sm.monotone},
                          {"degree_two", sm.degree_two},
                          {"valid", sm.valid()}};
  const auto mr = minimality_test(phi, s_max, density_depth);
  j["classification"] = mr.minimal ? "minimal" : "exceptional";
  j["semi_decision"] = ojson{{"s_max", mr.s_max}, {"density_depth", mr.density_depth}};
  j["max_grid_gap"] = mr.max_grid_gap;
  ojson ivs = ojson::array();
  for (const auto& I : mr.witnesses) ivs.push_back({I.arc.left().value(), I.arc.right().value(), I.period});
  j["periodic_intervals"] = std::move(ivs);

  const auto pts = find_periodic_points(phi, periods);
  out.points = Table{{"location", "period", "multiplier", "class"}, {}};
  for (const auto& p : pts)
    out.points.rows.push_back({p.location.value(), p.period, p.multiplier, to_string(p.classification)});
  j["periodic_points"] = out.points.to_json();
  j["orbit_classes"] = orbit_representatives(phi, pts).size();
  ojson ne = ojson::array();
  for (const auto& p : nonexpandable_candidates(phi, std::max(periods, 1), 50)) ne.push_back(p.location.value());
  j["nonexpandable_candidates"] = std::move(ne);
  j["c0"] = estimate_C0(phi).c0;
  return out;
}

inline Table pieces_table(const ThompsonElement& g) {
  Table t{{"source_degree", "source_index", "target_degree", "target_index"}, {}};
  for (std::size_t j = 0; j < g.size(); ++j) {
    const auto& s = g.source[j];
    const auto& d = g.target[g.pairing[j]];
    t.rows.push_back({s.degree, s.index, d.degree, d.index});
  }
  return t;
}

inline void write_table_csv(const std::string& path, const Table& t) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidInput, "cannot write " + path);
  write_csv(f, t.to_json());
}

inline Side parse_side(const std::string& s) {
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  throw Error(ErrorCode::InvalidInput, "side must be left or right");
}

}  // namespace cli_detail

/// Runs the command line tool. Exit codes: 0 pass or ok, 1 fail,
/// 2 inconclusive, 3 usage or input error.
inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Thompson-like groups of circle coverings: analysis and lemma checks", "tcircle"};
  app.require_subcommand(1);

  std::string csv_path;
  std::uint64_t seed = 0;

  // analyze
  auto* analyze = app.add_subcommand("analyze", "smoothness, minimality and periodic table of maps");
  std::vector<std::string> analyze_maps;
  int periods = 2, analyze_smax = 6, jobs = 1;
  unsigned density_depth = 10;
  analyze->add_option("maps", analyze_maps, "map JSON files")->required();
  analyze->add_option("--periods", periods, "largest period in the periodic table")->capture_default_str();
  analyze->add_option("--s-max", analyze_smax, "largest period scanned for periodic intervals")->capture_default_str();
  analyze->add_option("--density-depth", density_depth, "depth of the backward orbit of 0")->capture_default_str();
  analyze->add_option("--jobs", jobs, "maps analysed concurrently")->capture_default_str();
  analyze->add_option("--csv", csv_path, "write the periodic table as CSV");

  // lambda
  auto* lambda_cmd = app.add_subcommand("lambda", "finite-depth approximation of the exceptional set");
  std::string lambda_map;
  int lambda_depth = 8, lambda_smax = 6;
  lambda_cmd->add_option("map", lambda_map, "map JSON file")->required();
  lambda_cmd->add_option("--depth", lambda_depth, "pullback depth")->capture_default_str();
  lambda_cmd->add_option("--s-max", lambda_smax, "largest period scanned for periodic intervals")->capture_default_str();
  lambda_cmd->add_option("--csv", csv_path, "write the gaps as CSV");

  // verify
  auto* verify = app.add_subcommand("verify", "run a lemma check: L3.2, L3.4, L3.5, STAR, LAMBDA_MEASURE");
  std::string lemma, verify_map, side = "right";
  std::optional<double> x0;
  std::vector<double> K_list{2.0, 4.0};
  std::optional<int> s_max;
  int v_lambda_depth = 8, n_max = 8, i_max = 10, k_max = 50;
  std::size_t budget = kPullbackBudget;
  std::vector<int> depths{0, 2, 4, 6, 8};
  unsigned star_n = 8;
  verify->add_option("lemma", lemma, "lemma id")->required()->check(
      CLI::IsMember({"L3.2", "L3.4", "L3.5", "STAR", "LAMBDA_MEASURE"}));
  verify->add_option("map", verify_map, "map JSON file")->required();
  verify->add_option("--x0", x0, "base point");
  verify->add_option("--side", side, "side of x0 (L3.5)")->capture_default_str();
  verify->add_option("--K", K_list, "multiplier thresholds (L3.5)");
  verify->add_option("--s-max", s_max, "largest period");
  verify->add_option("--lambda-depth", v_lambda_depth, "depth of the Lambda approximation (L3.5)")->capture_default_str();
  verify->add_option("--n-max", n_max, "last chain index (L3.2, L3.4)")->capture_default_str();
  verify->add_option("--i-max", i_max, "pullback depth for eps_n (L3.2)")->capture_default_str();
  verify->add_option("--budget", budget, "node budget (L3.2, L3.4)")->capture_default_str();
  verify->add_option("--depths", depths, "depths (LAMBDA_MEASURE)");
  verify->add_option("--n", star_n, "element degree (STAR)")->capture_default_str();
  verify->add_option("--k-max", k_max, "expansion horizon (STAR)")->capture_default_str();
  verify->add_option("--seed", seed, "seed recorded in the report")->capture_default_str();
  verify->add_option("--csv", csv_path, "write evidence tables as CSV");

  // witnesses
  auto* witnesses = app.add_subcommand("witnesses", "local power elements at nonexpandable points");
  std::string witness_map;
  int w_smax = 6, w_kmax = 50;
  unsigned w_n = 8;
  witnesses->add_option("map", witness_map, "map JSON file")->required();
  witnesses->add_option("--s-max", w_smax, "largest period")->capture_default_str();
  witnesses->add_option("--n", w_n, "element degree")->capture_default_str();
  witnesses->add_option("--k-max", w_kmax, "expansion horizon")->capture_default_str();
  witnesses->add_option("--seed", seed, "seed recorded in the report")->capture_default_str();
  witnesses->add_option("--csv", csv_path, "write evidence tables as CSV");

  // element
  auto* element = app.add_subcommand("element", "evaluate, compose or invert elements");
  element->require_subcommand(1);
  std::string elt_a, elt_b, elt_map;
  std::vector<double> at;
  bool do_reduce = false;
  auto* e_eval = element->add_subcommand("eval", "evaluate an element with slopes");
  e_eval->add_option("element", elt_a, "element JSON file")->required();
  e_eval->add_option("--at", at, "points")->required();
  auto* e_compose = element->add_subcommand("compose", "a after b");
  e_compose->add_option("a", elt_a, "element JSON file")->required();
  e_compose->add_option("b", elt_b, "element JSON file")->required();
  auto* e_invert = element->add_subcommand("invert", "inverse element");
  e_invert->add_option("element", elt_a, "element JSON file")->required();
  for (auto* sub : {e_eval, e_compose, e_invert}) {
    sub->add_option("--map", elt_map, "map JSON used when the element has none");
    sub->add_option("--csv", csv_path, "write the result as CSV");
  }
  for (auto* sub : {e_compose, e_invert}) sub->add_flag("--reduce", do_reduce, "merge sibling pieces");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 3;
  }

  try {
    if (analyze->parsed()) {
      if (jobs < 1) throw Error(ErrorCode::InvalidInput, "--jobs must be positive");
      std::vector<MapPtr> maps;
      for (const auto& p : analyze_maps) maps.push_back(load_map(p));
      std::vector<Analysis> results(maps.size());
      // Maps are independent; results are merged in input order.
      for (std::size_t start = 0; start < maps.size(); start += static_cast<std::size_t>(jobs)) {
        std::vector<std::future<Analysis>> batch;
        const std::size_t stop = std::min(maps.size(), start + static_cast<std::size_t>(jobs));
        for (std::size_t i = start; i < stop; ++i) {
          batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                     [&, i] { return analyze_map(*maps[i], periods, analyze_smax, density_depth); }));
        }
        for (std::size_t i = start; i < stop; ++i) results[i] = batch[i - start].get();
      }
      if (results.size() == 1) {
        write_json(out, results[0].json);
        if (!csv_path.empty()) write_table_csv(csv_path, results[0].points);
      } else {
        ojson all = ojson::array();
        Table merged{{"map", "location", "period", "multiplier", "class"}, {}};
        for (std::size_t i = 0; i < results.size(); ++i) {
          ojson entry = results[i].json;
          entry["source"] = analyze_maps[i];
          all.push_back(std::move(entry));
          for (auto row : results[i].points.rows) {
            row.insert(row.begin(), analyze_maps[i]);
            merged.rows.push_back(std::move(row));
          }
        }
        write_json(out, all);
        if (!csv_path.empty()) write_table_csv(csv_path, merged);
      }
      return 0;
    }

    if (lambda_cmd->parsed()) {
      const auto phi = load_map(lambda_map);
      const auto L = lambda_approx(*phi, lambda_depth, lambda_smax);
      ojson j;
      j["map"] = map_descriptor(*phi);
      j["depth"] = L.depth;
      j["s_max"] = lambda_smax;
      j["leb_estimate"] = L.leb_estimate;
      ojson ivs = ojson::array();
      for (const auto& I : L.intervals) ivs.push_back({I.arc.left().value(), I.arc.right().value(), I.period});
      j["periodic_intervals"] = std::move(ivs);
      Table gaps{{"left", "right", "birth"}, {}};
      for (const auto& g : L.gaps) gaps.rows.push_back({g.arc.left().value(), g.arc.right().value(), g.birth});
      j["gap_count"] = L.gaps.size();
      j["gaps"] = gaps.to_json();
      write_json(out, j);
      if (!csv_path.empty()) {
        std::ofstream f(csv_path);
        if (!f) throw Error(ErrorCode::InvalidInput, "cannot write " + csv_path);
        write_lambda_csv(f, L);
      }
      return 0;
    }

    if (verify->parsed() || witnesses->parsed()) {
      LemmaReport report;
      if (witnesses->parsed()) {
        StarOptions o;
        o.s_max = w_smax;
        o.n = w_n;
        o.k_max = w_kmax;
        o.seed = seed;
        report = star_witnesses(load_map(witness_map), o).report;
      } else {
        const auto phi = load_map(verify_map);
        if (lemma == "L3.5") {
          MultiplierGrowthOptions o;
          if (x0) o.x0 = CirclePoint(*x0);
          o.side = parse_side(side);
          o.K_list = K_list;
          o.s_max = s_max.value_or(10);
          o.lambda_depth = v_lambda_depth;
          o.seed = seed;
          report = verify_multiplier_growth(*phi, o);
        } else if (lemma == "L3.2" || lemma == "L3.4") {
          EpsilonOptions o;
          o.mode = lemma == "L3.2" ? EpsilonMode::nice_chain : EpsilonMode::gap_grid;
          o.n_max = n_max;
          o.i_max = i_max;
          o.node_budget = budget;
          if (x0) o.x0 = CirclePoint(*x0);
          o.s_max = s_max.value_or(6);
          o.seed = seed;
          report = epsilon_sequence_report(*phi, o);
        } else if (lemma == "STAR") {
          StarOptions o;
          o.s_max = s_max.value_or(6);
          o.n = star_n;
          o.k_max = k_max;
          o.seed = seed;
          report = star_witnesses(phi, o).report;
        } else {
          report = lambda_measure_trend(*phi, depths, s_max.value_or(6), seed);
        }
      }
      write_json(out, report.to_json());
      if (!csv_path.empty()) write_report_csv(csv_path, report);
      return exit_code(report.verdict);
    }

    if (element->parsed()) {
      MapPtr fallback = elt_map.empty() ? nullptr : load_map(elt_map);
      const auto ja = read_json_file(elt_a);
      const bool with_map = ja.contains("map");
      const auto a = element_from_json(ja, fallback);
      auto require_valid = [](const ThompsonElement& g, const std::string& name) {
        if (auto v = validate(g); !v.ok) throw Error(ErrorCode::InvalidElement, name + ": " + v.diagnostic);
      };
      require_valid(a, elt_a);
      if (e_eval->parsed()) {
        Table t{{"x", "g_x", "slope"}, {}};
        for (double x : at) {
          if (!(x >= 0.0 && x < 1.0)) throw Error(ErrorCode::OutOfDomain, "evaluation points must lie in [0,1)");
          const auto [y, s] = eval_and_slope(a, CirclePoint(x));
          t.rows.push_back({x, y.value(), s});
        }
        write_json(out, ojson{{"values", t.to_json()}});
        if (!csv_path.empty()) write_table_csv(csv_path, t);
        return 0;
      }
      ThompsonElement result = a;
      if (e_compose->parsed()) {
        const auto b = element_from_json(read_json_file(elt_b), a.map);
        require_valid(b, elt_b);
        result = compose(a, b);
      } else {
        result = invert(a);
      }
      if (do_reduce) result = reduce(result);
      write_json(out, to_ojson(element_to_json(result, with_map)));
      if (!csv_path.empty()) write_table_csv(csv_path, pieces_table(result));
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  err << app.help();
  return 3;
}

inline int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("tcircle");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tcircle
