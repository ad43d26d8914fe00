// End-to-end exercises of the command-line tool. argv[1] is the binary path.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

int failures = 0;

#define REQUIRE(cond, msg)                                                      \
    do {                                                                        \
        if (!(cond)) {                                                          \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg \
                      << "\n";                                                  \
            ++failures;                                                         \
        }                                                                       \
    } while (0)

std::string g_binary;
fs::path g_tmp;

int run(const std::string& args, std::string* output = nullptr) {
    const fs::path log = g_tmp / "cmd.log";
    const std::string cmd = g_binary + " " + args + " >" + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (output) {
        std::ifstream in(log);
        std::stringstream ss;
        ss << in.rdbuf();
        *output = ss.str();
    }
    if (rc == -1) return -1;
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& s) {
    int n = 0;
    for (const char c : s) {
        if (c == '\n') ++n;
    }
    return n;
}

// Minimal XML well-formedness check: balanced tags, quoted attributes.
bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        std::size_t close = i + 1;
        bool in_quote = false;
        while (close < text.size() && (text[close] != '>' || in_quote)) {
            if (text[close] == '"') in_quote = !in_quote;
            ++close;
        }
        if (close >= text.size()) return false;
        std::string tag = text.substr(i + 1, close - i - 1);
        i = close + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?' || tag[0] == '!') continue;
        const bool closing = tag[0] == '/';
        const bool self_closing = tag.back() == '/';
        if (closing) tag = tag.substr(1);
        if (self_closing) tag.pop_back();
        std::string name;
        for (const char c : tag) {
            if (c == ' ' || c == '\t' || c == '\n') break;
            name.push_back(c);
        }
        if (name.empty()) return false;
        if (closing) {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!self_closing) {
            stack.push_back(name);
        }
    }
    return stack.empty();
}

int count_occurrences(const std::string& text, const std::string& needle) {
    int n = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_tests <pedpred-binary>\n";
        return 2;
    }
    g_binary = argv[1];
    g_tmp = fs::temp_directory_path() / "pedpred_cli_tests";
    fs::remove_all(g_tmp);
    fs::create_directories(g_tmp);

    const std::string out_a = (g_tmp / "a").string();
    const std::string out_b = (g_tmp / "b").string();

    // ---- synth ----
    const fs::path synth_file = g_tmp / "synthA.txt";
    REQUIRE(run("synth --name synthA --out " + synth_file.string() + " --out-dir " + out_a +
                " --scenes 12 --peds-min 1 --peds-max 2 --synth-seed 3") == 0,
            "synth exits 0");
    REQUIRE(fs::exists(synth_file), "synth wrote the dataset file");

    // ---- ingest ----
    std::string out;
    REQUIRE(run("ingest --data synthA=" + synth_file.string() + " --out-dir " + out_a, &out) == 0,
            "ingest exits 0");
    REQUIRE(out.find("synthA") != std::string::npos, "ingest reports the dataset");
    REQUIRE(fs::exists(fs::path(out_a) / "synthA.normalized.txt"), "ingest wrote the cache");

    {
        // comment lines are skipped
        const fs::path with_comments = g_tmp / "comments.txt";
        std::ofstream f(with_comments);
        f << "# a comment\n0 1 0.0 0.0\n1 1 0.1 0.0\n";
        f.close();
        REQUIRE(run("ingest --data c=" + with_comments.string() + " --out-dir " + out_a, &out) == 0,
                "ingest skips comments");
    }
    {
        const fs::path bad = g_tmp / "bad.txt";
        std::ofstream f(bad);
        f << "0 1 0.0 0.0\nnot numbers here\n";
        f.close();
        const int rc = run("ingest --data bad=" + bad.string() + " --out-dir " + out_a, &out);
        REQUIRE(rc == 2, "malformed dataset exits 2");
        REQUIRE(out.find(":2") != std::string::npos, "error names the line number");
    }

    // ---- usage errors ----
    REQUIRE(run("definitely-not-a-command") == 1, "unknown subcommand exits 1");
    REQUIRE(run("plot") == 1, "missing required options exit 1");

    // ---- train ----
    const std::string train_flags = " --data synthA=" + synth_file.string() +
                                    " --epochs 3 --d 8 --z-dim 4 --batch-size 4 --seed 5";
    REQUIRE(run("train --out-dir " + out_a + train_flags) == 0, "train exits 0");
    REQUIRE(fs::exists(fs::path(out_a) / "checkpoint.json"), "checkpoint written");
    const std::string loss_a = slurp(fs::path(out_a) / "loss.csv");
    REQUIRE(count_lines(loss_a) == 4, "loss.csv has header + 3 epochs");

    REQUIRE(run("train --out-dir " + out_b + train_flags) == 0, "second train exits 0");
    REQUIRE(slurp(fs::path(out_b) / "loss.csv") == loss_a, "equal seeds give byte-identical loss CSVs");

    // resume continues the epoch counter
    REQUIRE(run("train --out-dir " + out_b + " --resume " + (fs::path(out_a) / "checkpoint.json").string() +
                " --data synthA=" + synth_file.string() + " --epochs 5 --d 8 --z-dim 4 --batch-size 4 --seed 5") == 0,
            "resumed train exits 0");
    REQUIRE(count_lines(slurp(fs::path(out_b) / "loss.csv")) == 6, "resumed loss.csv has 5 epochs");

    // ---- predict ----
    const std::string ck = (fs::path(out_a) / "checkpoint.json").string();
    REQUIRE(run("predict --checkpoint " + ck + " --target " + synth_file.string() + " --out-dir " + out_a +
                " --n-samples 2 --n-experts 5 --k-candidates 2 --seed 5") == 0,
            "predict exits 0");
    const fs::path preds = fs::path(out_a) / "predictions_synthA.json";
    REQUIRE(fs::exists(preds), "predictions written");

    REQUIRE(run("predict --checkpoint " + (g_tmp / "nope.json").string() + " --target " + synth_file.string() +
                " --out-dir " + out_a) == 2,
            "missing checkpoint exits 2");

    {
        // repeated predictions with the same seed are byte-identical
        const std::string c = (g_tmp / "c").string();
        REQUIRE(run("predict --checkpoint " + ck + " --target " + synth_file.string() + " --out-dir " + c +
                    " --n-samples 2 --n-experts 5 --k-candidates 2 --seed 5") == 0,
                "predict rerun exits 0");
        REQUIRE(slurp(fs::path(c) / "predictions_synthA.json") == slurp(preds),
                "predict is deterministic given the seed");
    }

    // ---- plot ----
    const fs::path svg = g_tmp / "w0.svg";
    REQUIRE(run("plot --predictions " + preds.string() + " --window synthA#0 --out " + svg.string() +
                " --out-dir " + out_a) == 0,
            "plot exits 0");
    const std::string svg_text = slurp(svg);
    REQUIRE(xml_well_formed(svg_text), "svg is well-formed xml");
    REQUIRE(count_occurrences(svg_text, "<polyline") >= 2, "svg has solid and dashed polylines");
    REQUIRE(count_occurrences(svg_text, "stroke-dasharray") >= 1, "svg has dashed prediction lines");
    REQUIRE(count_occurrences(svg_text, "<polygon") >= 1, "svg has star endpoints");
    REQUIRE(count_occurrences(svg_text, "<circle") >= 9, "svg has observed dots and endpoint markers");

    REQUIRE(run("plot --predictions " + preds.string() + " --window synthA#999 --out " +
                (g_tmp / "none.svg").string() + " --out-dir " + out_a) == 2,
            "unknown window id exits 2");
    REQUIRE(!fs::exists(g_tmp / "none.svg"), "no file written for unknown window");

    {
        // empty prediction set: error, no output file
        const fs::path empty_preds = g_tmp / "empty.json";
        std::ofstream f(empty_preds);
        f << R"({"dataset":"x","windows":[{"id":"x#0","t_obs":8,"t_end":20,"pedestrians":[1],)"
          << R"("gt":[[[0,0]]],"goals":[[0,0]],"samples":[]}]})";
        f.close();
        REQUIRE(run("plot --predictions " + empty_preds.string() + " --window x#0 --out " +
                    (g_tmp / "empty.svg").string() + " --out-dir " + out_a) == 2,
                "empty sample set exits 2");
        REQUIRE(!fs::exists(g_tmp / "empty.svg"), "no svg written for empty samples");
    }

    // ---- eval (single checkpoint smoke) ----
    REQUIRE(run("eval --checkpoint " + ck + " --data synthA=" + synth_file.string() + " --out-dir " + out_a +
                " --n-samples 2 --n-experts 5 --k-candidates 2 --seed 5 --epochs 1") == 0,
            "eval with checkpoint exits 0");
    REQUIRE(fs::exists(fs::path(out_a) / "report.json"), "eval wrote report.json");
    REQUIRE(fs::exists(fs::path(out_a) / "report.txt"), "eval wrote report.txt");

    // thread cap must not change numbers
    const std::string eval_flags = " --data synthA=" + synth_file.string() +
                                   " --n-samples 2 --n-experts 5 --k-candidates 2 --seed 5";
    REQUIRE(run("eval --checkpoint " + ck + " --out-dir " + out_a + eval_flags + " --threads 1") == 0,
            "eval threads=1");
    const std::string report_t1 = slurp(fs::path(out_a) / "report.json");
    REQUIRE(run("eval --checkpoint " + ck + " --out-dir " + out_a + eval_flags + " --threads 4") == 0,
            "eval threads=4");
    REQUIRE(slurp(fs::path(out_a) / "report.json") == report_t1, "thread count does not change the report");

    // ---- env overrides ----
    {
        const fs::path env_dir = g_tmp / "env_out";
        const std::string cmd = "PEDPRED_OUT_DIR=" + env_dir.string() + " " + g_binary +
                                " synth --name envsynth --scenes 2 >/dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        REQUIRE(WEXITSTATUS(rc) == 0, "synth with env out dir exits 0");
        REQUIRE(fs::exists(env_dir / "envsynth.txt"), "PEDPRED_OUT_DIR is honored");

        const std::string cmd2 = "PEDPRED_THREADS=1 " + g_binary + " eval --checkpoint " + ck + eval_flags +
                                 " --out-dir " + out_a + " >/dev/null 2>&1";
        REQUIRE(WEXITSTATUS(std::system(cmd2.c_str())) == 0, "PEDPRED_THREADS accepted");
        REQUIRE(slurp(fs::path(out_a) / "report.json") == report_t1, "PEDPRED_THREADS=1 matches --threads 1");
    }

    // ---- config file handling ----
    {
        const fs::path good_cfg = g_tmp / "good.json";
        std::ofstream f(good_cfg);
        f << R"({"datasets":[{"name":"synthA","path":")" << synth_file.string()
          << R"("}],"out_dir":")" << (g_tmp / "cfg_out").string()
          << R"(","seed":5,"train":{"epochs":2},"model":{"d":8,"z_dim":4},"eval":{"n_samples":2}})";
        f.close();
        REQUIRE(run("train --config " + good_cfg.string()) == 0, "config-driven train exits 0");
        REQUIRE(fs::exists(g_tmp / "cfg_out" / "checkpoint.json"), "config out_dir honored");

        const fs::path bad_cfg = g_tmp / "bad_cfg.json";
        std::ofstream g(bad_cfg);
        g << R"({"no_such_key": 1})";
        g.close();
        REQUIRE(run("train --config " + bad_cfg.string(), &out) == 1, "unknown config key exits 1");
        REQUIRE(out.find("no_such_key") != std::string::npos, "unknown key named in the error");
    }

    // ---- ablate ----
    {
        const fs::path synth_b = g_tmp / "synthB.txt";
        REQUIRE(run("synth --name synthB --out " + synth_b.string() + " --out-dir " + out_a +
                    " --scenes 6 --synth-seed 8") == 0,
                "second synth set for ablation");
        REQUIRE(run("ablate --data synthA=" + synth_file.string() + " --data synthB=" + synth_b.string() +
                    " --out-dir " + out_a +
                    " --epochs 1 --d 8 --z-dim 4 --n-samples 1 --n-experts 5 --k-candidates 2 --seed 5",
                    &out) == 0,
                "ablate exits 0");
        REQUIRE(fs::exists(fs::path(out_a) / "ablation.json"), "ablation.json written");
        REQUIRE(out.find("A+B+C") != std::string::npos, "ablation table lists the full row");
    }

    // ---- numeric failure exit code ----
    {
        const int rc = run("train --out-dir " + (g_tmp / "nan_out").string() + " --data synthA=" +
                               synth_file.string() + " --epochs 50 --d 8 --z-dim 4 --lr 1e150 --seed 5",
                           &out);
        REQUIRE(rc == 3, "diverged training exits 3");
    }

    if (failures == 0) {
        std::cout << "[PASS] cli integration tests\n";
        return 0;
    }
    std::cerr << failures << " cli test(s) failed\n";
    return 1;
}
