#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "tempo/checkpoint.hpp"
#include "tempo/config.hpp"
#include "tempo/errors.hpp"
#include "tempo/plot.hpp"

namespace fs = std::filesystem;
using namespace tempo;

namespace {

struct Run {
    int code = -1;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tempo_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Run run(const std::string& args, const fs::path& dir) {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(TEMPO_CLI_PATH) + " " + args + " >" + (dir / "stdout.txt").string() +
                            " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    r.err = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

const char* kTiny =
    "lookback=32\nhorizon=8\npatch_len=8\nstride=4\nperiod=8\npool_size=8\ntop_k=2\nprompt_len=2\n"
    "backbone.layers=1\nbackbone.heads=2\nbackbone.embed_dim=16\nepochs=1\nbatch=8\nwindow_stride=4\n";

} // namespace

TEST_CASE("config defaults, typed errors and precedence") {
    config::RunConfig a;
    config::apply_text(a, "");
    CHECK(config::render(a) == config::render(config::RunConfig{}));
    CHECK(a.model.lambda_dec == 0.01);
    config::RunConfig b;
    try {
        config::apply_text(b, "lambda_dec=banana");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("lambda_dec") != std::string::npos);
    }
    CHECK_THROWS_AS(config::set_key(b, "nonsense", "1"), ConfigError);
    config::apply_text(b, "# comment\nseed=4\nepochs=2\n");
    CHECK(b.model.seed == 4);
    CHECK(b.model.backbone.seed == 4);
    config::set_key(b, "embed.per_component", "true");
    CHECK(b.model.embed_per_component);
    config::set_key(b, "epochs", "7");
    CHECK(b.model.epochs == 7);
    CHECK(config::config_hash(a) != config::config_hash(b));
    CHECK(config::config_hash(a).size() == 16);
}

TEST_CASE("cli precedence: file < flag < --set") {
    const auto d = scratch("prec");
    std::ofstream(d / "c.cfg") << kTiny << "synth_length=300\nsynth_period=8\nseed=1\n";
    const auto synth = d / "s.csv";
    REQUIRE(run("synth --config " + (d / "c.cfg").string() + " --data " + synth.string() + " --seed 2 --set seed=3",
                d).code == 0);
    const auto out = d / "out";
    REQUIRE(run("decompose --config " + (d / "c.cfg").string() + " --data " + synth.string() + " --seed 2 --set seed=3 --out " +
                    out.string(),
                d).code == 0);
    const auto resolved = slurp(out / "resolved.cfg");
    CHECK(resolved.find("seed=3\n") != std::string::npos);
    CHECK(resolved.find("lookback=32\n") != std::string::npos);
    CHECK(fs::exists(out / "decomposition.csv"));
    CHECK(fs::exists(out / "plots" / "decomposition.svg"));
}

TEST_CASE("cli exit codes") {
    const auto d = scratch("codes");
    CHECK(run("theory-check --suite dft --out " + (d / "th").string(), d).code == 0);
    CHECK(fs::exists(d / "th" / "theory.json"));
    const auto bad = run("train --set lambda_dec=banana --out " + (d / "x").string(), d);
    CHECK(bad.code == 1);
    CHECK(bad.err.rfind("error config:", 0) == 0);
    CHECK(run("bogus", d).code == 1);
    CHECK(run("eval --out " + (d / "y").string(), d).code == 1);

    std::ofstream(d / "c.cfg") << kTiny << "synth_length=300\nsynth_period=8\n";
    const auto a = d / "a.csv";
    REQUIRE(run("synth --config " + (d / "c.cfg").string() + " --data " + a.string(), d).code == 0);
    const auto leak = run("zero-shot --config " + (d / "c.cfg").string() + " --sources " + a.string() + " --target " +
                              a.string() + " --out " + (d / "z").string(),
                          d);
    CHECK(leak.code == 2);
    CHECK(leak.err.find("leakage") != std::string::npos);
    CHECK(lines(leak.err) == 1);

    std::ofstream(d / "bad.csv") << "x\n1\nfoo\n";
    CHECK(run("decompose --data " + (d / "bad.csv").string() + " --out " + (d / "w").string(), d).code == 2);
}

TEST_CASE("cli train, eval and ablate") {
    const auto d = scratch("run");
    std::ofstream(d / "c.cfg") << kTiny << "synth_length=400\nsynth_period=8\nsynth_slope=0.01\n";
    const auto cfg = " --config " + (d / "c.cfg").string();
    const auto data = d / "s.csv";
    REQUIRE(run("synth" + cfg + " --data " + data.string(), d).code == 0);
    const auto tr = d / "train";
    REQUIRE(run("train" + cfg + " --data " + data.string() + " --out " + tr.string(), d).code == 0);
    for (const char* f : {"metrics.json", "predictions.csv", "selections.csv", "checkpoint", "resolved.cfg"})
        CHECK(fs::exists(tr / f));
    CHECK(slurp(tr / "predictions.csv").rfind("origin_t,channel,h,y_true,y_hat,y_T,y_S,y_R", 0) == 0);
    const auto ev = d / "eval";
    REQUIRE(run("eval" + cfg + " --data " + data.string() + " --ckpt " + (tr / "checkpoint").string() + " --out " +
                    ev.string(),
                d).code == 0);
    // evaluating the saved checkpoint reproduces the training run's test predictions
    CHECK(slurp(ev / "predictions.csv") == slurp(tr / "predictions.csv"));

    REQUIRE(run("prompt-stats --run " + tr.string(), d).code == 0);
    const auto hist = slurp(tr / "prompt_stats.csv");
    CHECK(hist.rfind("index,count,component\n", 0) == 0);
    CHECK(lines(hist) == 1 + 3 * 8);

    const auto ab = d / "ablate";
    REQUIRE(run("ablate" + cfg + " --data " + data.string() + " --out " + ab.string(), d).code == 0);
    const auto table = slurp(ab / "ablation.csv");
    CHECK(lines(table) == 5);
    CHECK(table.find("\nfull,") != std::string::npos);
    const auto one = d / "ablate1";
    REQUIRE(run("ablate" + cfg + " --data " + data.string() + " --flags no_dec --out " + one.string(), d).code == 0);
    CHECK(lines(slurp(one / "ablation.csv")) == 3);
}

TEST_CASE("checkpoint round trip") {
    auto c = fixtures::tiny_config();
    auto mp = model::init_model(c);
    fixtures::perturb(mp, 11);
    const auto d = scratch("ckpt");
    checkpoint::save(mp, d / "m.ckpt");
    auto back = checkpoint::load(d / "m.ckpt");
    REQUIRE(back.store.size() == mp.store.size());
    for (std::size_t i = 0; i < mp.store.size(); ++i) CHECK(back.store.all()[i].value == mp.store.all()[i].value);
    const auto s = fixtures::samples(c, 2);
    CHECK(model::forward_tempo(back, s[0]).y_hat == model::forward_tempo(mp, s[0]).y_hat);
    std::ofstream(d / "bad.ckpt") << "TEMPO-CKPT-1\nconfig 0\nparams 1\nbogus 0 1 1 1\n0\n";
    CHECK_THROWS(checkpoint::load(d / "bad.ckpt"));
}

TEST_CASE("plots are deterministic and labelled") {
    const std::vector<plot::Series> s{{"actual", {1, 2, 3}, 0}, {"forecast", {1.5, 2.5}, 1}};
    const auto d = scratch("plot");
    plot::emit_plot(s, d / "a.svg", "t");
    plot::emit_plot(s, d / "b.svg", "t");
    const auto svg = slurp(d / "a.svg");
    CHECK(svg == slurp(d / "b.svg"));
    std::size_t legends = 0;
    for (std::size_t p = svg.find("class=\"legend\""); p != std::string::npos; p = svg.find("class=\"legend\"", p + 1))
        ++legends;
    CHECK(legends == 2);
    CHECK(slurp(d / "a.csv") == plot::render_csv(s));
    CHECK(lines(slurp(d / "a.csv")) == 6);
    CHECK_THROWS_AS(plot::emit_plot({}, d / "c.svg"), ValidationError);
    CHECK_THROWS_AS(plot::emit_plot({{"e", {}, 0}}, d / "c.svg"), ValidationError);
}

TEST_CASE("cli decompose with --in, --k and opt-in interpolation") {
    const auto d = scratch("interp");
    std::ofstream(d / "gap.csv", std::ios::trunc) << "x,y\n1,0\n2,1\n,0\n4,1\n5,0\n6,1\n7,0\n8,1\n";
    const auto base = "decompose --in " + (d / "gap.csv").string() + " --period 2 --k 1 --out ";
    const auto strict = run(base + (d / "a").string(), d);
    CHECK(strict.code == 2);
    REQUIRE(run(base + (d / "b").string() + " --interp linear", d).code == 0);
    const auto csv = slurp(d / "b" / "decomposition.csv");
    CHECK(csv.find("\n2,x,3,") != std::string::npos);
    CHECK(slurp(d / "b" / "resolved.cfg").find("trend_k=1\n") != std::string::npos);
    CHECK(run(base + (d / "c").string() + " --interp cubic", d).code == 1);
}
