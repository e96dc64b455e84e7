#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "grazing/io.hpp"

using grazing::Json;

namespace {

struct RunResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const std::string& work_dir() {
  static const std::string dir = [] {
    char tmpl[] = "/tmp/grazing_cli_XXXXXX";
    const char* d = mkdtemp(tmpl);
    REQUIRE(d != nullptr);
    return std::string(d);
  }();
  return dir;
}

RunResult run(const std::string& args) {
  const std::string so = work_dir() + "/stdout.txt";
  const std::string se = work_dir() + "/stderr.txt";
  const std::string cmd = std::string(GRAZING_BIN) + " " + args + " >" + so +
                          " 2>" + se;
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(so);
  r.err = slurp(se);
  return r;
}

std::string path_of(const std::string& name) { return work_dir() + "/" + name; }

// Every later test reuses these artifacts; generated once.
const std::string& family_json() {
  static const std::string p = [] {
    const std::string f = path_of("family.json");
    const RunResult r = run("family --sigma-l 0.2 --sigma-r 1.75 --out " + f);
    REQUIRE(r.code == 0);
    return f;
  }();
  return p;
}

const std::string& ode_json() {
  static const std::string p = [] {
    const std::string f = path_of("ode.json");
    const RunResult r = run("fit-ode " + family_json() + " --out " + f);
    REQUIRE(r.code == 0);
    return f;
  }();
  return p;
}

}  // namespace

TEST_CASE("family reports the closed-form parameters") {
  const Json j = grazing::load_json(family_json());
  CHECK(j.at("tau_L").get<double>() ==
        doctest::Approx(-331.0 / 715.0).epsilon(1e-14));
  CHECK(j.at("sigma_L").get<double>() == 0.2);
  CHECK(j.at("delta_L").get<double>() ==
        doctest::Approx(31.0 / 385.0).epsilon(1e-14));
  CHECK(j.at("tau_R").get<double>() == -2.75);
  CHECK(j.at("sigma_R").get<double>() == 1.75);
  CHECK(j.at("delta_R").get<double>() == 0.0);
}

TEST_CASE("family distinguishes domain membership through the exit code") {
  CHECK(run("family --sigma-l 0.2 --sigma-r 0.9").code == 2);
  CHECK(run("family --sigma-l 1.0 --sigma-r 2.0").code == 0);
  const RunResult out_of = run("family --sigma-l 0.2 --sigma-r 0.9");
  CHECK(out_of.err.find("in domain: no") != std::string::npos);
}

TEST_CASE("argument errors exit with the validation code") {
  CHECK(run("family --sigma-l 0.2").code == 2);      // missing required
  CHECK(run("no-such-command").code == 2);           // unknown subcommand
  CHECK(run("").code == 2);                          // subcommand required
  CHECK(run("solve --word-x Q --word-y LR --sigma-l 0.2 --sigma-r 1.2 "
            "--guess 0,0,0")
            .code == 2);                             // bad word letter
}

TEST_CASE("family output is deterministic") {
  const RunResult a = run("family --sigma-l 0.2 --sigma-r 1.75");
  const RunResult b = run("family --sigma-l 0.2 --sigma-r 1.75");
  CHECK(a.code == 0);
  CHECK(!a.out.empty());
  CHECK(a.out == b.out);
}

TEST_CASE("verify accepts the constructed parameters and rejects a broken set") {
  const std::string rep = path_of("verify.json");
  const RunResult ok = run("verify " + family_json() + " --out " + rep);
  CHECK(ok.code == 0);
  CHECK(ok.err.find("overall: pass") != std::string::npos);
  const Json j = grazing::load_json(rep);
  CHECK(j.at("overall").get<bool>());
  CHECK(j.at("k_min").get<int>() == 1);
  CHECK(j.at("conditions").contains("iv_d"));

  Json broken = grazing::load_json(family_json());
  broken["delta_R"] = 0.1;
  const std::string bad = path_of("broken.json");
  grazing::save_json(bad, broken);
  const RunResult fail = run("verify " + bad);
  CHECK(fail.code == 1);
  CHECK(fail.err.find("overall: fail") != std::string::npos);
}

TEST_CASE("solve reaches the published point from the nearby guess") {
  const std::string out = path_of("solved20.json");
  const RunResult r =
      run("solve --word-x RLLLR --word-y LLLR --sigma-l 0.95 --sigma-r 1.15 "
          "--guess 1.19,-0.57,0.10 --out " + out);
  CHECK(r.code == 0);
  const Json j = grazing::load_json(out);
  CHECK(j.at("tau_L").get<double>() ==
        doctest::Approx(1.1634777991).epsilon(1e-8));
  CHECK(j.at("delta_L").get<double>() ==
        doctest::Approx(0.0608806824).epsilon(1e-7));
  CHECK(j.at("tau_R").get<double>() ==
        doctest::Approx(-0.6037872000).epsilon(1e-7));
}

TEST_CASE("solve flags a converged but unverifiable root") {
  const RunResult r =
      run("solve --word-x RLRLRLR --word-y LR --sigma-l 0.2 --sigma-r 1.2 "
          "--guess -0.62,-3.10,0.22");
  CHECK(r.code == 1);
  CHECK(r.err.find("not verified") != std::string::npos);
}

TEST_CASE("graze reports the tangency amplitude and the leading-order data") {
  const std::string out = path_of("graze.json");
  const RunResult r = run("graze --ode " + ode_json() + " --out " + out);
  CHECK(r.code == 0);
  const Json j = grazing::load_json(out);
  CHECK(j.at("gamma_graz").get<double>() == doctest::Approx(0.9120).epsilon(6e-4));
  CHECK(j.at("leading_order").at("det_O_L").get<double>() ==
        doctest::Approx(-5.4366).epsilon(2e-4));
  CHECK(j.at("leading_order").at("rho_b").get<double>() ==
        doctest::Approx(1.7351).epsilon(2e-4));
}

TEST_CASE("phase writes a trajectory table with the regime column") {
  const std::string out = path_of("traj.csv");
  const RunResult r = run("phase --ode " + ode_json() +
                          " --gamma-offset 1e-3 --returns 2 --out " + out);
  CHECK(r.code == 0);
  std::ifstream in(out);
  std::string header;
  while (std::getline(in, header) && !header.empty() && header[0] == '#') {
  }
  CHECK(header == "t,X,Y,Z,regime");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows > 100);
}

TEST_CASE("continue validates the window against the word") {
  const RunResult l_up = run("continue --ode " + ode_json() +
                             " --word L --gamma-min -0.01 --gamma-max 0.01");
  CHECK(l_up.code == 2);
  const RunResult r_down = run("continue --ode " + ode_json() +
                               " --word RLR --gamma-min -0.001 --gamma-max 0.01");
  CHECK(r_down.code == 2);
  const RunResult inverted = run("continue --ode " + ode_json() +
                                 " --word R --gamma-min 0.01 --gamma-max 0.001");
  CHECK(inverted.code == 2);
}

TEST_CASE("continue walks a short single-loop branch") {
  const std::string out = path_of("branch_R.csv");
  const RunResult r =
      run("continue --ode " + ode_json() +
          " --word R --gamma-min 5e-4 --gamma-max 2e-3 --step 5e-4 --out " +
          out);
  CHECK(r.code == 0);
  std::ifstream in(out);
  int data_rows = 0;
  for (std::string line; std::getline(in, line);)
    if (line.find(",R,") != std::string::npos) ++data_rows;
  CHECK(data_rows >= 3);
}

TEST_CASE("missing and malformed inputs exit with the i/o code") {
  CHECK(run("verify " + path_of("does_not_exist.json")).code == 3);
  CHECK(run("fit-ode " + path_of("does_not_exist.json")).code == 3);
  const std::string bad = path_of("malformed.json");
  std::ofstream(bad) << "{oops";
  CHECK(run("verify " + bad).code == 3);
  // structurally wrong content is also an i/o failure, not a crash
  const std::string wrong = path_of("wrong_shape.json");
  std::ofstream(wrong) << "{\"tau_L\": 1.0}";
  CHECK(run("verify " + wrong).code == 3);
}

TEST_CASE("pipeline --dry-run prints the plan without writing files") {
  const std::string dir = path_of("dry");
  const RunResult r = run("pipeline --sigma-l 0.2 --sigma-r 1.75 --dry-run "
                          "--out-dir " + dir);
  CHECK(r.code == 0);
  for (const char* stage : {"family", "verify", "fit-ode", "graze", "diagram"})
    CHECK(r.out.find(stage) != std::string::npos);
  CHECK(!std::ifstream(dir + "/params.json").good());
}

TEST_CASE("pipeline surfaces a stage failure with the stage name") {
  const std::string dir = path_of("bad_pipe");
  const RunResult r = run("pipeline --sigma-l 0.2 --sigma-r 3.5 --out-dir " +
                          dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("fit-ode") != std::string::npos);
  // earlier stages completed and left their outputs
  CHECK(std::ifstream(dir + "/params.json").good());
  CHECK(std::ifstream(dir + "/verify.json").good());
}
