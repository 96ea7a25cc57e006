#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bck/cli.hpp"

namespace fs = std::filesystem;
using namespace bck;

namespace {

const fs::path scenario_dir = BCK_SCENARIO_DIR;

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("bck_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_file(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    fs::path out_dir(const std::string& name) const {
        const fs::path p = dir_ / name;
        fs::create_directories(p);
        return p;
    }

    static CliRun invoke(std::vector<std::string> args) {
        args.insert(args.begin(), "bck");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        CliRun r;
        r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        r.out = out.str();
        r.err = err.str();
        return r;
    }

    static std::string read(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }

    static std::vector<std::string> lines(const std::string& text) {
        std::vector<std::string> v;
        std::istringstream in(text);
        for (std::string l; std::getline(in, l);) v.push_back(l);
        return v;
    }

    fs::path dir_;
};

/// Driven benchmark on a shorter window, for the repeated runs below.
std::string driven_text(double omega = 1.0, double t1 = 10.0) {
    std::ostringstream s;
    s << "[scenario]\nt0 = 0\nt1 = " << format_number(t1) << "\n"
      << "[omega]\ntype = constant\nvalue = " << format_number(omega) << "\n"
      << "[damping]\ntype = constant\nvalue = 0.1\n"
      << "[force]\ntype = sinusoid\namplitude = 0.5\nfrequency = 0.9\nphase = 0\n"
      << "[grid]\nqmin = -14\nqmax = 14\nnpoints = 1024\n"
      << "[integrator]\nrtol = 1e-12\natol = 1e-14\n";
    return s.str();
}

std::string value_of(const std::vector<std::string>& summary, const std::string& key) {
    for (const auto& l : summary) {
        if (l.rfind(key + "=", 0) == 0) return l.substr(key.size() + 1);
    }
    return {};
}

}  // namespace

TEST_F(CliTest, VerifyDrivenScenarioPasses) {
    const auto r = invoke({"verify", "--scenario", (scenario_dir / "driven_underdamped.ini").string(), "--out",
                        dir_.string()});
    EXPECT_EQ(r.code, cli::exit_code::ok) << r.err;
    const auto summary = lines(r.out);
    EXPECT_LT(std::stod(value_of(summary, "omega_drift")), 1e-9);
    EXPECT_NEAR(std::stod(value_of(summary, "omega")), 2 * std::sqrt(0.99), 1e-10);
    EXPECT_EQ(summary.back().rfind("wrote ", 0), 0u);
    const auto csv = lines(read(dir_ / "invariants_report.csv"));
    ASSERT_EQ(csv.size(), 514u);
    EXPECT_EQ(csv.front(), "t,re_I,im_I,IQ,Omega,C,ermakov_residual");
}

TEST_F(CliTest, NegativeFrequencyActsLikePositive) {
    const auto pos = write_file("pos.ini", driven_text(1.0));
    const auto neg = write_file("neg.ini", driven_text(-1.0));
    const auto out = out_dir("o");
    const auto a = invoke({"verify", "--scenario", pos.string(), "--out", out.string()});
    const auto b = invoke({"verify", "--scenario", neg.string(), "--out", out.string()});
    EXPECT_EQ(a.code, cli::exit_code::ok);
    EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, MalformedFileIsInvalidInput) {
    const auto bad = write_file("bad.ini", "[scenario]\nt0 = 0\nt1 = ten\n");
    const auto r = invoke({"verify", "--scenario", bad.string(), "--out", dir_.string()});
    EXPECT_EQ(r.code, cli::exit_code::invalid_input);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST_F(CliTest, ArgumentErrorsAreInvalidInput) {
    EXPECT_EQ(invoke({}).code, cli::exit_code::invalid_input);
    EXPECT_EQ(invoke({"verify"}).code, cli::exit_code::invalid_input);
    EXPECT_EQ(invoke({"verify", "--scenario", (dir_ / "missing.ini").string()}).code, cli::exit_code::invalid_input);
    EXPECT_EQ(invoke({"frobnicate"}).code, cli::exit_code::invalid_input);
    const auto sc = write_file("d.ini", driven_text());
    EXPECT_EQ(invoke({"wavefunction", "--scenario", sc.string(), "--phase", "other"}).code, cli::exit_code::invalid_input);
    EXPECT_EQ(invoke({"spectrum", "--scenario", sc.string(), "--nmax", "-1", "--out", dir_.string()}).code,
              cli::exit_code::invalid_input);
    EXPECT_EQ(invoke({"sweep", "--scenario", sc.string(), "--parameter", "mass", "--from", "1", "--to", "2", "--out",
                   dir_.string()})
                  .code,
              cli::exit_code::invalid_input);
}

TEST_F(CliTest, MissingOutputDirectoryIsCreated) {
    const auto sc = write_file("d.ini", driven_text());
    const auto nested = dir_ / "no" / "such";
    EXPECT_EQ(invoke({"spectrum", "--scenario", sc.string(), "--out", nested.string(), "--quiet"}).code,
              cli::exit_code::ok);
    EXPECT_TRUE(fs::exists(nested / "spectrum.csv"));
    // a regular file where the directory should be
    const auto blocker = write_file("blocker", "x");
    EXPECT_EQ(invoke({"spectrum", "--scenario", sc.string(), "--out", (blocker / "sub").string()}).code,
              cli::exit_code::invalid_input);
}

TEST_F(CliTest, ToleranceFailure) {
    const auto sc = write_file("d.ini", driven_text());
    const auto r = invoke({"verify", "--scenario", sc.string(), "--out", dir_.string(), "--tolerance", "1e-30", "--quiet"});
    EXPECT_EQ(r.code, cli::exit_code::tolerance);
    // failures are reported even under --quiet
    EXPECT_NE(r.err.find("status=fail"), std::string::npos);
}

TEST_F(CliTest, SolverFailure) {
    const auto sc = write_file("real.ini",
                               "[scenario]\nt0 = 0\nt1 = 5\n[omega]\ntype = constant\nvalue = 1\n[beta0]\nre = 1\nim = 0\ndre = 0\ndim = 0\n");
    const auto r = invoke({"verify", "--scenario", sc.string(), "--out", dir_.string()});
    EXPECT_EQ(r.code, cli::exit_code::solver);
    EXPECT_NE(r.err.find("DegenerateSolutions"), std::string::npos);
}

TEST_F(CliTest, SpectrumValues) {
    const auto r = invoke({"spectrum", "--scenario", (scenario_dir / "driven_underdamped.ini").string(), "--nmax", "3",
                        "--out", dir_.string(), "--quiet"});
    ASSERT_EQ(r.code, cli::exit_code::ok) << r.err;
    EXPECT_TRUE(r.out.empty());
    const auto csv = lines(read(dir_ / "spectrum.csv"));
    ASSERT_EQ(csv.size(), 5u);
    EXPECT_EQ(csv[0], "n,eigenvalue");
    for (int n = 0; n <= 3; ++n) {
        const auto comma = csv[n + 1].find(',');
        EXPECT_EQ(csv[n + 1].substr(0, comma), std::to_string(n));
        const double v = std::stod(csv[n + 1].substr(comma + 1));
        EXPECT_NEAR(v, 2 * std::sqrt(0.99) * (n + 0.5), 1e-10);
    }

    const auto sho = invoke({"spectrum", "--scenario", (scenario_dir / "sho.ini").string(), "--nmax", "0", "--out",
                          dir_.string()});
    ASSERT_EQ(sho.code, cli::exit_code::ok);
    const auto row = lines(read(dir_ / "spectrum.csv"))[1];
    EXPECT_NEAR(std::stod(row.substr(2)), 1.0, 1e-10);
}

TEST_F(CliTest, SpectrumOfFrequencyRamp) {
    const auto r = invoke({"spectrum", "--scenario", (scenario_dir / "frequency_ramp.ini").string(), "--nmax", "2",
                        "--out", dir_.string()});
    ASSERT_EQ(r.code, cli::exit_code::ok) << r.err;
    EXPECT_LT(std::stod(value_of(lines(r.out), "omega_drift")), 1e-9);
}

TEST_F(CliTest, WavefunctionFooter) {
    const auto r = invoke({"wavefunction", "--scenario", (scenario_dir / "sho.ini").string(), "-n", "0", "-t", "0",
                        "--out", dir_.string()});
    ASSERT_EQ(r.code, cli::exit_code::ok) << r.err;
    const auto csv = lines(read(dir_ / "wavefunction.csv"));
    ASSERT_EQ(csv.size(), 1026u);
    EXPECT_EQ(csv.front(), "q,re_psi,im_psi,abs2");
    EXPECT_EQ(csv.back().rfind("# mean_q=0, mean_p=0,", 0), 0u) << csv.back();
    EXPECT_NE(csv.back().find("product=0.25"), std::string::npos) << csv.back();
}

TEST_F(CliTest, WavefunctionMatchesLibrary) {
    const auto path = scenario_dir / "driven_underdamped.ini";
    const auto r = invoke({"wavefunction", "--scenario", path.string(), "-n", "2", "-t", "1.5", "--phase",
                        "eigenfunction", "--out", dir_.string()});
    ASSERT_EQ(r.code, cli::exit_code::ok) << r.err;
    const Scenario s = load_scenario(path);
    const auto w = eval_psin(2, s, make_frame(s, integrate_beta(s), 1.5), Phase::Eigenfunction);
    std::ostringstream expected;
    write_wavefunction_csv(expected, w);
    const std::string file = read(dir_ / "wavefunction.csv");
    EXPECT_EQ(file.substr(0, expected.str().size()), expected.str());
}

TEST_F(CliTest, NarrowGridSuggestsWidth) {
    std::string text = driven_text();
    text.replace(text.find("qmin = -14"), 10, "qmin = -3");
    text.replace(text.find("qmax = 14"), 9, "qmax = 3");
    const auto sc = write_file("narrow.ini", text);
    const auto r = invoke({"wavefunction", "--scenario", sc.string(), "-n", "2", "-t", "1", "--out", dir_.string()});
    EXPECT_EQ(r.code, cli::exit_code::grid_too_narrow);
    EXPECT_NE(r.err.find("suggested qmax="), std::string::npos) << r.err;
}

TEST_F(CliTest, PropagateHarmonicGroundState) {
    const auto r = invoke({"propagate", "--scenario", (scenario_dir / "sho.ini").string(), "-n", "0", "--periods", "1",
                        "--dt", "1e-3", "--min-overlap", "0.999999", "--out", dir_.string()});
    EXPECT_EQ(r.code, cli::exit_code::ok) << r.err;
    const auto csv = lines(read(dir_ / "propagation.csv"));
    EXPECT_EQ(csv.front(), "t,norm,overlap,fidelity_defect");
    EXPECT_GT(csv.size(), 100u);
}

TEST_F(CliTest, PropagateDrivenTwoPeriods) {
    const auto r = invoke({"propagate", "--scenario", (scenario_dir / "driven_underdamped.ini").string(), "-n", "1",
                        "--periods", "2", "--dt", "1e-3", "--out", dir_.string()});
    EXPECT_EQ(r.code, cli::exit_code::ok) << r.err;
}

TEST_F(CliTest, PropagateCoarseStepFails) {
    // a stationary state keeps its overlap under any step, so the failure path needs the driven case
    const auto r = invoke({"propagate", "--scenario", (scenario_dir / "driven_underdamped.ini").string(), "-n", "1",
                        "--periods", "1", "--dt", "0.5", "--out", dir_.string()});
    EXPECT_EQ(r.code, cli::exit_code::tolerance);
    EXPECT_NE(r.err.find("min_overlap="), std::string::npos);
    EXPECT_NE(r.err.find("note: dt exceeds"), std::string::npos);
}

TEST_F(CliTest, SweepDampingMatchesFormula) {
    const auto sc = write_file("d.ini", driven_text());
    const auto r = invoke({"sweep", "--scenario", sc.string(), "--parameter", "g", "--from", "0", "--to", "0.3",
                        "--steps", "4", "--out", dir_.string()});
    ASSERT_EQ(r.code, cli::exit_code::ok) << r.err;
    const auto csv = lines(read(dir_ / "sweep.csv"));
    ASSERT_EQ(csv.size(), 5u);
    EXPECT_EQ(csv[0], "g,status,Omega,IQ_drift,uncertainty_t1");
    for (int k = 0; k < 4; ++k) {
        std::istringstream row(csv[k + 1]);
        std::string g, status, omega;
        std::getline(row, g, ',');
        std::getline(row, status, ',');
        std::getline(row, omega, ',');
        EXPECT_EQ(status, "ok");
        const double gv = std::stod(g);
        EXPECT_NEAR(gv, 0.1 * k, 1e-15);
        EXPECT_NEAR(std::stod(omega), 2 * std::sqrt(1 - gv * gv), 1e-10);
    }
}

TEST_F(CliTest, ZeroLengthSweepEqualsVerify) {
    const auto sc = write_file("d.ini", driven_text());
    const auto sw = invoke({"sweep", "--scenario", sc.string(), "--parameter", "F0", "--from", "0.5", "--to", "0.5",
                         "--steps", "7", "--out", dir_.string()});
    ASSERT_EQ(sw.code, cli::exit_code::ok) << sw.err;
    const auto csv = lines(read(dir_ / "sweep.csv"));
    ASSERT_EQ(csv.size(), 2u);
    const auto v = invoke({"verify", "--scenario", sc.string(), "--out", dir_.string()});
    const auto summary = lines(v.out);
    EXPECT_EQ(csv[1], "0.5,ok," + value_of(summary, "omega") + "," + value_of(summary, "max_drift_IQ") + "," +
                          value_of(summary, "uncertainty_product_t1"));
}

TEST_F(CliTest, SweepRowsEqualSingleRuns) {
    const auto sc = write_file("d.ini", driven_text());
    ASSERT_EQ(invoke({"sweep", "--scenario", sc.string(), "--parameter", "alpha", "--from", "0.5", "--to", "1.5",
                   "--steps", "3", "--out", dir_.string()})
                  .code,
              cli::exit_code::ok);
    const auto csv = lines(read(dir_ / "sweep.csv"));
    const Scenario base = load_scenario(sc);
    for (int k = 0; k < 3; ++k) {
        const double alpha = 0.5 + 0.5 * k;
        const auto single = write_file("single.ini", serialize_scenario(cli::with_parameter(base, "alpha", alpha)));
        const auto v = invoke({"verify", "--scenario", single.string(), "--out", dir_.string()});
        const auto summary = lines(v.out);
        EXPECT_EQ(csv[k + 1], format_number(alpha) + ",ok," + value_of(summary, "omega") + "," +
                                  value_of(summary, "max_drift_IQ") + "," + value_of(summary, "uncertainty_product_t1"));
    }
}

TEST_F(CliTest, OverdampedRowsFail) {
    const auto sc = write_file("d.ini", driven_text());
    const auto r = invoke({"sweep", "--scenario", sc.string(), "--parameter", "g", "--from", "0.5", "--to", "1.5",
                        "--steps", "3", "--out", dir_.string()});
    EXPECT_EQ(r.code, cli::exit_code::tolerance);
    const auto csv = lines(read(dir_ / "sweep.csv"));
    ASSERT_EQ(csv.size(), 4u);
    EXPECT_EQ(csv[1].substr(0, 7), "0.5,ok,");
    EXPECT_EQ(csv[2], "1,failed:InvalidIC,,,");
    EXPECT_EQ(csv[3], "1.5,failed:InvalidIC,,,");
}

TEST_F(CliTest, OutputsAreDeterministic) {
    const auto sc = write_file("d.ini", driven_text());
    const auto a = out_dir("a"), b = out_dir("b");
    for (const auto& o : {a, b}) {
        ASSERT_EQ(invoke({"verify", "--scenario", sc.string(), "--out", o.string(), "--quiet"}).code, 0);
        ASSERT_EQ(invoke({"sweep", "--scenario", sc.string(), "--parameter", "g", "--from", "0", "--to", "0.2", "--steps",
                       "3", "--out", o.string(), "--quiet"})
                      .code,
                  0);
    }
    EXPECT_EQ(read(a / "invariants_report.csv"), read(b / "invariants_report.csv"));
    EXPECT_EQ(read(a / "sweep.csv"), read(b / "sweep.csv"));
}
