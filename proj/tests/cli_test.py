"""End-to-end checks of the emdsparse command-line tool."""

import csv
import io
import math
import os
import subprocess
import sys
import tempfile
import unittest

CLI = os.environ.get("EMDSPARSE_CLI", "emdsparse")

HEADER = (
    "scheme,delta,k,eps,seed,rows_used,emd_error,emd_error_raw,best_k_sparse_emd,ratio,ratio_flag,inner_l1,"
    "inner_l1_inverted,embed_l1,chain_ok,c_measured,c_prime,claim_ok,success,wall_ms,error"
)


def cli(*args, check=True):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, check=check)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def nearest_rank(values, p):
    values = sorted(values)
    rank = max(1, min(len(values), math.ceil(p * len(values))))
    return values[rank - 1]


class GenTest(unittest.TestCase):
    def test_same_seed_gives_identical_bytes(self):
        with tempfile.TemporaryDirectory() as d:
            a, b = os.path.join(d, "a"), os.path.join(d, "b")
            cli("gen", "--kind", "uniform_noise", "--delta", 16, "--seed", 5, "--out", a)
            cli("gen", "--kind", "uniform_noise", "--delta", 16, "--seed", 5, "--out", b)
            with open(a, "rb") as fa, open(b, "rb") as fb:
                self.assertEqual(fa.read(), fb.read())

    def test_zero_spread_is_k_sparse(self):
        out = cli("gen", "--kind", "clusters", "--delta", 16, "--k", 3, "--spread", 0).stdout.split()
        self.assertEqual(out[:2], ["EMDIMG", "16"])
        values = [float(v) for v in out[2:]]
        self.assertLessEqual(sum(v != 0 for v in values), 3)
        self.assertEqual(sum(values), 1000)

    def test_bad_delta_fails(self):
        self.assertNotEqual(cli("gen", "--delta", 12, check=False).returncode, 0)


class RoundTripTest(unittest.TestCase):
    def test_sketch_recover_oracle(self):
        with tempfile.TemporaryDirectory() as d:
            img, skt, rec = (os.path.join(d, n) for n in ("x.img", "x.skt", "r.img"))
            cli("gen", "--kind", "clusters", "--delta", 16, "--k", 2, "--spread", 0, "--seed", 3, "--out", img)
            cli("sketch", "--in", img, "--scheme", "pyramid_dense", "--k", 2, "--out", skt)
            cli("recover", "--in", skt, "--sparsify", "--out", rec)
            emd = float(cli("oracle-emd", img, rec).stdout)
            self.assertLessEqual(emd, 1e-6 * 16 * 1000)

    def test_transform_root_is_scaled_mass(self):
        with tempfile.TemporaryDirectory() as d:
            img = os.path.join(d, "x.img")
            cli("gen", "--delta", 8, "--mass", 50, "--out", img)
            out = cli("transform", "--in", img).stdout.split()
            self.assertEqual(out[:3], ["EMDPYR", "v1", "8"])
            self.assertEqual(float(out[3]), 8 * 50)
            self.assertEqual(len(out) - 3, (4 * 64 - 1) // 3)

    def test_missing_file_is_an_error(self):
        r = cli("oracle-emd", "/nonexistent/a", "/nonexistent/b", check=False)
        self.assertNotEqual(r.returncode, 0)


class RunTest(unittest.TestCase):
    def test_single_exact_trial(self):
        out = cli("run", "--scheme", "pyramid_dense", "--delta", 8, "--k", 1, "--kind", "clusters", "--spread", 0).stdout
        self.assertEqual(out.splitlines()[0], HEADER)
        table = rows(out)
        self.assertEqual(len(table), 1)
        self.assertEqual(table[0]["ratio_flag"], "exact")
        self.assertEqual(table[0]["success"], "1")

    def test_sweep_is_deterministic_per_seed(self):
        args = ("run", "--scheme", "pyramid_tree_cosamp", "--delta", 16, "--k", 2, "--trials", 50)
        a = rows(cli(*args, "--threads", 4).stdout)
        b = rows(cli(*args, "--threads", 1).stdout)
        self.assertEqual(len(a), 50)
        self.assertEqual([int(r["seed"]) for r in a], list(range(50)))
        for ra, rb in zip(a, b):
            ra.pop("wall_ms")
            rb.pop("wall_ms")
            self.assertEqual(ra, rb)

    def test_aggregate_matches_rows(self):
        args = ("run", "--scheme", "all", "--delta", 16, "--k", 2, "--trials", 8, "--seed", 11)
        table = rows(cli(*args).stdout)
        agg = rows(cli(*args, "--aggregate").stdout)
        self.assertEqual(len(agg), 4)
        for line in agg:
            mine = [float(r["ratio"]) for r in table if r["scheme"] == line["scheme"] and r["ratio_flag"] == "measured"]
            self.assertEqual(int(line["trials"]), 8)
            self.assertAlmostEqual(float(line["median_ratio"]), nearest_rank(mine, 0.5), places=6)
            self.assertAlmostEqual(float(line["p90_ratio"]), nearest_rank(mine, 0.9), places=6)

    def test_config_file(self):
        with tempfile.TemporaryDirectory() as d:
            cfg = os.path.join(d, "run.toml")
            with open(cfg, "w") as f:
                f.write('[run]\nscheme = "pyramid_randomized"\ndelta = 16\nk = 2\ntrials = 2\n')
            table = rows(cli("run", "--config", cfg).stdout)
            self.assertEqual([r["scheme"] for r in table], ["pyramid_randomized"] * 2)

    def test_bad_config_exits_nonzero(self):
        r = cli("run", "--scheme", "pyramid_dense", "--delta", 8, "--k", 40, check=False)
        self.assertNotEqual(r.returncode, 0)
        self.assertIn("k must lie", r.stderr)


if __name__ == "__main__":
    if len(sys.argv) > 1:
        CLI = sys.argv.pop(1)
    unittest.main()
