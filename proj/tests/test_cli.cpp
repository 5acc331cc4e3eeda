#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "funcineq/cli.hpp"

namespace fs = std::filesystem;
using funcineq::cli::kInputError;
using funcineq::cli::kOk;
using funcineq::cli::kViolation;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "funcineq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = funcineq::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("funcineq_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& body) const {
    const fs::path p = dir / name;
    std::ofstream(p) << body;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const char* kTwoPoint = R"({"points": ["a", "b"], "dist": [[0, 1], [1, 0]],
                            "weights": [0.5, 0.5], "edges": [[0, 1]]})";

}  // namespace

TEST_CASE("validate") {
  Scratch s;
  CHECK(run({"validate", "--space", s.write("two.json", kTwoPoint)}).code == kOk);

  const auto tri = run({"validate", "--space",
                        s.write("tri.json", R"({"points": ["x", "y", "z"],
                          "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]], "weights": [0.3, 0.3, 0.4]})")});
  CHECK(tri.code == kInputError);
  CHECK(tri.err.find("(1,2,3)") != std::string::npos);

  const auto mass = run({"validate", "--space",
                         s.write("mass.json", R"({"points": ["a", "b"], "dist": [[0, 1], [1, 0]],
                           "weights": [0.5, 0.6]})")});
  CHECK(mass.code == kInputError);

  const auto missing = run({"validate", "--space",
                            s.write("nodist.json", R"({"points": ["a"], "weights": [1]})")});
  CHECK(missing.code == kInputError);
  CHECK(missing.err.find("dist") != std::string::npos);

  CHECK(run({"validate", "--space", s.path("absent.json")}).code == kInputError);
  CHECK(run({"validate", "--space", s.write("bad.json", "{not json")}).code == kInputError);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == kInputError);
  CHECK(run({"frobnicate"}).code == kInputError);
  CHECK(run({"validate", "--space", "gaussian:4:0.1", "--bogus"}).code == kInputError);
  CHECK(run({"rh-constant", "--theorem", "poincare", "--lambda1", "0.25"}).code == kInputError);
  CHECK(run({"ic-check", "--space", "random:5:1", "--Phi", "quadratic:-1", "--field", "coord"}).code ==
        kInputError);
  CHECK(run({"rh-verify", "--space", "random:5:1", "--field", "coord", "--p-grid", "1,0.5",
             "--constant-from", "poincare,lambda1=1"})
            .code == kInputError);
}

TEST_CASE("rh-constant values") {
  auto r = run({"rh-constant", "--theorem", "poincare", "--lambda1", "0.25", "--L", "0.5", "--p", "1"});
  CHECK(r.code == kOk);
  CHECK(std::stod(r.out) == doctest::Approx(3.0));

  r = run({"rh-constant", "--theorem", "herbst", "--lambda-ls", "1", "--L", "1", "--p", "1"});
  CHECK(std::stod(r.out) == doctest::Approx(std::exp(0.5)));

  r = run({"rh-constant", "--theorem", "main", "--Psi", "quadratic:1", "--L", "1", "--p", "1",
           "--format", "json"});
  CHECK(r.code == kOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("schema") == 1);

  r = run({"rh-constant", "--theorem", "expnt", "--M", "1", "--lambda-exp", "1", "--L", "1", "--p", "0.5"});
  CHECK(r.code == kOk);
  CHECK(r.out.find("displayed 2.718") != std::string::npos);
  CHECK(r.out.find("thm_main 7.389") != std::string::npos);
}

TEST_CASE("legendre and transport") {
  auto r = run({"legendre", "--profile", "quadratic:1", "--s", "0.5,2", "--format", "json"});
  CHECK(r.code == kOk);
  CHECK(r.out.find("0.125") != std::string::npos);

  Scratch s;
  const std::string space = s.write("two.json", kTwoPoint);
  const std::string nu = s.write("nu.json", R"({"weights": [0.8, 0.2]})");
  r = run({"transport", "--space", space, "--nu", nu, "--format", "json"});
  CHECK(r.code == kOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("transport_cost").get<double>() == doctest::Approx(0.3));

  const std::string prof = s.write("q.json", R"({"kind": "quadratic", "params": {"lambda": 1}})");
  r = run({"transport", "--space", space, "--nu", nu, "--phi", prof, "--format", "json"});
  CHECK(nlohmann::json::parse(r.out).at("transport_cost").get<double>() == doctest::Approx(0.15));
}

TEST_CASE("checkers report violations with exit code 1") {
  // Points of the unit square: a range of at most sqrt(2) gives Phi*(l) <= l^2 / 4.
  auto ok = run({"ic-check", "--space", "random:8:2", "--phi", "identity", "--Phi", "quadratic:1",
                 "--field", "coord", "--lambda-grid", "0.1,0.5"});
  CHECK(ok.code == kOk);
  auto bad = run({"ic-check", "--space", "random:8:2", "--phi", "identity", "--Phi",
                  "quadratic:400", "--field", "coord", "--lambda-grid", "log:0.1:5:6"});
  CHECK(bad.code == kViolation);

  auto te = run({"te-check", "--space", "random:8:2", "--phi", "identity", "--Phi", "quadratic:400",
                 "--nu-family", "deltas", "--count", "3"});
  CHECK(te.code == kViolation);
  // The failing measure is written out in full.
  CHECK(te.out.find("\"weights\"") != std::string::npos);
}

TEST_CASE("rh-verify csv") {
  const auto r = run({"rh-verify", "--space", "gaussian:6:0.05", "--field", "exp-coord:0.5",
                      "--p-grid", "0.5,1", "--constant-from", "herbst,lambda_LS=1", "--tol", "1e-3",
                      "--format", "csv"});
  CHECK(r.code == kOk);
  CHECK(r.out.rfind("p,ratio_plus,ratio_minus,constant,margin,verdict", 0) == 0);
}

TEST_CASE("concentration profile") {
  const auto r = run({"concentration-profile", "--space", "gaussian:8:0.002", "--field", "coord",
                      "--t-grid", "1", "--Phi", "quadratic:1", "--format", "csv"});
  CHECK(r.code == kOk);
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header == "t,tail,bound");
  const double tail = std::stod(row.substr(row.find(',') + 1));
  CHECK(std::abs(tail - 0.158655) <= 1e-3);
  CHECK(std::stod(row.substr(row.rfind(',') + 1)) == doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("reports are deterministic and written atomically") {
  Scratch s;
  const std::vector<std::string> args = {"te-check", "--space", "random:9:4", "--phi", "quadratic:1",
                                         "--Phi", "identity", "--dirichlet", "4", "--seed", "11"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", s.path("a.json")});
  b.insert(b.end(), {"--out", s.path("b.json")});
  CHECK(run(a).code == kOk);
  CHECK(run(b).code == kOk);
  CHECK(slurp(s.path("a.json")) == slurp(s.path("b.json")));
  CHECK_FALSE(fs::exists(s.path("a.json.tmp")));
  CHECK(nlohmann::json::parse(slurp(s.path("a.json"))).at("schema") == 1);
}

TEST_CASE("suite preset") {
  CHECK(run({"suite", "--preset", "exponential-line"}).code == kOk);
  CHECK(run({"suite", "--preset", "nonsense"}).code == kInputError);
}
