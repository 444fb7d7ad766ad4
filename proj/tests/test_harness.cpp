#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "peeroc/harness.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace peeroc;

TEST_CASE("orders are log2 of successive error ratios")
{
  ConvergenceTable t;
  t.rows = {{20, 1.6e-3, 8e-3}, {40, 1e-4, 1e-3}, {80, 1e-4 / 16.0, std::nan("")}};
  CHECK(std::isnan(t.state_order(0)));
  CHECK(t.state_order(1) == doctest::Approx(4.0));
  CHECK(t.adjoint_order(1) == doctest::Approx(3.0));
  CHECK(t.state_order(2) == doctest::Approx(4.0));
  CHECK(std::isnan(t.adjoint_order(2)));
}

TEST_CASE("step lists must double")
{
  CHECK_NOTHROW(check_step_list({20, 40, 80}));
  CHECK_NOTHROW(check_step_list({10}));
  CHECK_THROWS_AS(check_step_list({}), std::invalid_argument);
  CHECK_THROWS_AS(check_step_list({2, 4}), std::invalid_argument);
  CHECK_THROWS_AS(check_step_list({20, 30}), std::invalid_argument);
  CHECK_THROWS_AS(check_step_list({40, 20}), std::invalid_argument);
}

TEST_CASE("method selection")
{
  CHECK(select_methods("all").size() == builtin_triplet_names().size());
  const auto two = select_methods("AP4o43bdf,AP3o32f");
  REQUIRE(two.size() == 2);
  CHECK(two[0].name == "AP4o43bdf");
  CHECK(two[1].name == "AP3o32f");
  CHECK_THROWS_AS(select_methods("bogus"), UnknownMethodError);
  CHECK_THROWS_AS(select_methods("AP4o43bdf,bogus"), UnknownMethodError);
  CHECK_THROWS_AS(select_methods("/nonexistent/triplet.json"), UnknownMethodError);

  const auto path = std::filesystem::temp_directory_path() / "peeroc_test_triplet.json";
  {
    std::ofstream os(path);
    os << triplet_to_text(load_triplet("AP4o43dig"));
  }
  const auto from_file = select_methods(path.string());
  std::filesystem::remove(path);
  REQUIRE(from_file.size() == 1);
  CHECK(from_file[0].name == "AP4o43dig");
}

TEST_CASE("sweep results do not depend on the thread count")
{
  const BvpProblem prob = wave();
  const ReferenceSource ref(prob);
  CHECK(ref.exact());
  const auto methods = select_methods("AP4o43dif,AP4o43sil,AP3o32f");
  const std::vector<int> steps{20, 40, 80};
  NewtonOptions opts;
  opts.initial_guess = InitialGuess::automatic;

  const auto one = convergence_sweep(prob, methods, steps, opts, ref, 1);
  const auto four = convergence_sweep(prob, methods, steps, opts, ref, 4);
  std::ostringstream a, b;
  write_convergence_csv(a, one);
  write_convergence_csv(b, four);
  CHECK(a.str() == b.str());

  REQUIRE(one.size() == 3);
  for (const auto& table : one) {
    CHECK(table.problem == "wave");
    REQUIRE(table.rows.size() == 3);
    for (const auto& row : table.rows) CHECK(row.converged);
  }
  const std::string text = a.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 9);
}

TEST_CASE("sweep over a shooting reference")
{
  const BvpProblem prob = rayleigh();
  const ReferenceSource ref(prob);
  CHECK_FALSE(ref.exact());
  REQUIRE(ref.shooting().has_value());
  const auto r = ref.sample(40);
  CHECK(r.times.size() == 41);
  CHECK(r.source == ReferenceTrajectory::Source::shooting_rk4);

  NewtonOptions opts;
  opts.initial_guess = InitialGuess::automatic;
  const auto tables = convergence_sweep(prob, select_methods("AP4o43sil"), {40, 80}, opts, ref);
  REQUIRE(tables.size() == 1);
  CHECK(tables[0].rows[1].state_error < tables[0].rows[0].state_error);
  CHECK(std::isfinite(tables[0].rows[1].cost));
}

TEST_CASE("JSON and SVG output")
{
  ConvergenceTable t;
  t.method = "AP4o43bdf";
  t.problem = "wave";
  t.rows = {{20, 1e-2, 2e-2, 3, 1e-13, true, 0.5}, {40, std::nan(""), std::nan(""), 50, 1.0, false, std::nan("")},
            {80, 1e-4, 1e-3, 2, 1e-14, true, 0.25}};

  std::ostringstream js;
  write_convergence_json(js, {t});
  const auto doc = nlohmann::json::parse(js.str());
  REQUIRE(doc.is_array());
  REQUIRE(doc.size() == 1);
  CHECK(doc[0]["method"] == "AP4o43bdf");
  CHECK(doc[0]["rows"].size() == 3);
  CHECK(doc[0]["rows"][1]["state_error"].is_null());

  std::ostringstream svg;
  write_convergence_svg(svg, {t}, "a <b> & c");
  const std::string text = svg.str();
  CHECK(text.rfind("<?xml", 0) == 0);
  CHECK(text.find("</svg>") != std::string::npos);
  CHECK(text.find("a &lt;b&gt; &amp; c") != std::string::npos);
  CHECK(text.find("<b>") == std::string::npos);
}

TEST_CASE("manifest")
{
  RunManifest m;
  m.argv = {"peeroc", "converge", "--problem", "wave"};
  m.command = "converge";
  m.methods = {"AP4o43bdf"};
  m.problem = "wave";
  m.steps = {20, 40};
  m.tolerance = 1e-12;
  m.initial_guess = "auto";
  m.jacobian = "analytic";
  m.outputs = {"convergence_wave.csv"};
  std::ostringstream a, b;
  write_manifest_json(a, m);
  write_manifest_json(b, m);
  CHECK(a.str() == b.str());
  const auto doc = nlohmann::json::parse(a.str());
  CHECK(doc["command"] == "converge");
  CHECK(doc["argv"].size() == 4);
  CHECK(doc["steps"][1] == 40);
  CHECK(doc["tolerance"] == 1e-12);
}

TEST_CASE("thread count from the environment")
{
  CHECK(sweep_threads() >= 1);
  CHECK(sweep_threads() <= 256);
}
