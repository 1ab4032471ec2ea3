// Integration checks for the command-line front end: exit codes, output
// files, and worker-count determinism, driven through a real subprocess.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  std::cout << (ok ? "ok   " : "FAIL ") << what << "\n";
  if (!ok) ++failures;
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& cmd) {
  const std::string log = "/tmp/pdens_cli_log.txt";
  const int rc = std::system((cmd + " > " + log + " 2>&1").c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream in(log);
  std::ostringstream text;
  text << in.rdbuf();
  r.output = text.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

const char* kConfig = R"([field]
s = 2
a0 = constant 0
a1 = sine_mode 0.1 1 2
a2 = sine_mode 0.1 2 2
ell_bar = constant 1
ell0 = constant 1
ell1 = sine_mode 0.2 1 2
ell2 = sine_mode 0.2 2 2

[qoi]
kind = mean_value

[mesh]
dimension = 1
cells = 8

[qmc]
n = 127
shifts = 4
seed = 21

[grid]
points = 9
mode = both

[study]
axis = mesh
levels = 4 8 16
reference = 64
estimator = qmc

[mc]
samples = 2000
)";

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_tests <path-to-pdens-binary>\n";
    return 2;
  }
  const std::string bin = argv[1];
  const std::string dir = "/tmp/pdens_cli_tests";
  if (std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str()) != 0) {
    std::cerr << "cannot prepare scratch directory " << dir << "\n";
    return 2;
  }
  const std::string cfg = dir + "/run.cfg";
  {
    std::ofstream out(cfg);
    out << kConfig;
  }

  {
    const RunResult r =
        run(bin + " estimate --config " + cfg + " --out " + dir + "/a_");
    check(r.exit_code == 0, "estimate exits 0");
    const std::string curve = slurp(dir + "/a_curve.csv");
    check(contains(curve, "t,F,F_stderr,f,f_stderr"), "curve.csv has the schema header");
    int rows = 0;
    for (char c : curve) rows += c == '\n';
    check(rows == 10, "curve.csv has one row per grid point");
    const std::string meta = slurp(dir + "/a_meta.txt");
    check(contains(meta, "[field]") && contains(meta, "t_min ="),
          "meta.txt carries the resolved config");
  }

  {
    const RunResult r = run(bin + " estimate --config " + dir + "/missing.cfg");
    check(r.exit_code == 2, "missing config exits 2");
  }

  {
    std::ofstream out(dir + "/bad.cfg");
    out << kConfig << "\n[mesh]\nshape = L\n";
    out.close();
    const RunResult r = run(bin + " estimate --config " + dir + "/bad.cfg");
    check(r.exit_code == 2, "unknown key exits 2");
    check(contains(r.output, "mesh.shape"), "diagnostic names the field");
  }

  {
    const RunResult r = run(bin + " estimate --config " + cfg +
                            " --set qmc.n=128 --out " + dir + "/np_");
    check(r.exit_code == 2, "non-prime N exits 2");
  }

  {
    const RunResult r = run(bin + " validate --config " + cfg);
    check(r.exit_code == 0, "validate exits 0");
    int passes = 0;
    size_t pos = 0;
    while ((pos = r.output.find("PASS", pos)) != std::string::npos) {
      ++passes;
      pos += 4;
    }
    check(passes == 3, "validate prints three PASS lines");
  }

  {
    const RunResult r1 = run(bin + " estimate --config " + cfg +
                             " --workers 1 --out " + dir + "/w1_");
    const RunResult r2 = run(bin + " estimate --config " + cfg +
                             " --workers 2 --out " + dir + "/w2_");
    check(r1.exit_code == 0 && r2.exit_code == 0, "determinism runs exit 0");
    check(slurp(dir + "/w1_curve.csv") == slurp(dir + "/w2_curve.csv"),
          "curve.csv is bitwise identical across worker counts");
  }

  {
    // meta.txt is itself a valid resolved config: rerunning from it must
    // reproduce the curve bit for bit
    const RunResult r = run(bin + " estimate --config " + dir +
                            "/a_meta.txt --out " + dir + "/m_");
    check(r.exit_code == 0, "meta.txt reparses as a config");
    check(slurp(dir + "/m_curve.csv") == slurp(dir + "/a_curve.csv"),
          "rerun from meta.txt reproduces curve.csv exactly");
  }

  {
    const RunResult r1 = run(bin + " estimate --config " + cfg +
                             " --set qmc.genvec_out=" + dir + "/gen.txt --out " +
                             dir + "/g1_");
    const RunResult r2 = run(bin + " estimate --config " + cfg +
                             " --set qmc.genvec_in=" + dir + "/gen.txt --out " +
                             dir + "/g2_");
    check(r1.exit_code == 0 && r2.exit_code == 0, "generating-vector runs exit 0");
    check(slurp(dir + "/g1_curve.csv") == slurp(dir + "/g2_curve.csv"),
          "imported generating vector reproduces the run");
    std::ifstream gen(dir + "/gen.txt");
    uint64_t n = 0;
    int dim = 0;
    gen >> n >> dim;
    check(n == 127 && dim == 4, "generating-vector file header is 'N dim'");
  }

  {
    const RunResult r = run(bin + " study-h --config " + cfg + " --out " + dir +
                            "/s_ --workers 2");
    check(r.exit_code == 0, "study-h exits 0");
    const std::string study = slurp(dir + "/s_study_cdf.csv");
    check(contains(study, "level,value,error,stderr,slope_running"),
          "study csv has the schema header");
    int rows = 0;
    for (char c : study) rows += c == '\n';
    check(rows == 4, "study csv has one row per level");
    check(contains(r.output, "fitted cdf slope"), "study prints the fitted slope");
  }

  {
    const RunResult r = run(bin + " estimate --config " + cfg + " --set bogus");
    check(r.exit_code == 2, "malformed override exits 2");
  }

  if (failures == 0) {
    std::cout << "all cli checks passed\n";
    return 0;
  }
  std::cout << failures << " cli check(s) failed\n";
  return 1;
}
