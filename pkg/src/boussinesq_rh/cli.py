"""Command line front end: scatter, asymptote, verify, oracle.

All commands read one JSON config; each has its own section and an output
path that ``--out`` overrides.  Outputs are written to a temporary file and
renamed into place, so a failed run leaves nothing behind.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

import argparse
import json
import math
import os
import re
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .asymptotics import SectorAsymptotics
from .phase import DEFAULT_TAU_MAX
from .scattering import (SpectralData, arc_grid, bump_profile, computed_spectral, family_data, make_grid,
                         synthetic_spectral, table_data)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SUITE_CHOICES = ("all", "scattering", "parametrix", "deform", "model-rh", "pde")


class ConfigError(ValueError):
    def __init__(self, msg, line=None):
        super().__init__(msg)
        self.line = line


# ---------------------------------------------------------------- config


def _line_of(text, key):
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


class RunConfig:
    """Validated view of a config file."""

    def __init__(self, raw, text="", path="<config>"):
        self.raw, self.text, self.path = raw, text, path
        if not isinstance(raw, dict):
            raise ConfigError("top level must be a JSON object", 1)
        self.tau_max = self._num("tau_max", DEFAULT_TAU_MAX, lo=0, hi=1, strict_hi=True)
        self.arc_points = int(self._num("arc_points", 512, lo=32))
        self.tolerances = raw.get("tolerances", {})
        if not isinstance(self.tolerances, dict):
            self._fail("tolerances", "must be an object")
        self.outputs = raw.get("outputs", {})
        if not isinstance(self.outputs, dict):
            self._fail("outputs", "must be an object")

    def _fail(self, key, msg):
        line = _line_of(self.text, key)
        raise ConfigError(f"{key}: {msg}", line)

    def _num(self, key, default, lo=None, hi=None, strict_hi=False, section=None):
        src = self.raw if section is None else section
        v = src.get(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self._fail(key, f"expected a number, got {v!r}")
        if lo is not None and v < lo:
            self._fail(key, f"must be >= {lo}, got {v}")
        if hi is not None and (v >= hi if strict_hi else v > hi):
            self._fail(key, f"must be {'<' if strict_hi else '<='} {hi}, got {v}")
        return v

    def grid(self, key, lo=None):
        spec = self.raw.get(key)
        if spec is None:
            self._fail(key, "missing")
        if isinstance(spec, list):
            vals = np.asarray(spec, dtype=float)
        elif isinstance(spec, dict):
            try:
                start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
            except (KeyError, TypeError, ValueError):
                self._fail(key, "range form needs numeric start, stop, num")
            if spec.get("spacing", "linear") == "log":
                if start <= 0:
                    self._fail(key, "log spacing needs start > 0")
                vals = np.geomspace(start, stop, num)
            else:
                vals = np.linspace(start, stop, num)
        else:
            self._fail(key, "must be a list or a {start, stop, num} object")
        if vals.size == 0 or not np.all(np.isfinite(vals)):
            self._fail(key, "must be non-empty and finite")
        if lo is not None and np.min(vals) < lo:
            self._fail(key, f"minimum must be >= {lo}")
        return vals

    def initial_data(self):
        spec = self.raw.get("initial_data")
        if not isinstance(spec, dict):
            self._fail("initial_data", "missing or not an object")
        if "table" in spec:
            return self._table_data(spec["table"])
        g = spec.get("grid", {})
        try:
            grid = make_grid(float(g.get("x_min", -30.0)), float(g.get("x_max", 30.0)), int(g.get("n", 4096)))
            return family_data(spec.get("u0"), spec.get("u1"), grid)
        except (TypeError, ValueError, KeyError) as exc:
            self._fail("initial_data", str(exc))

    def _table_data(self, path):
        """custom-table initial data: CSV with columns x, u0, u1 and one header row."""
        if not isinstance(path, str):
            self._fail("table", "must be a path string")
        path = os.path.join(os.path.dirname(os.path.abspath(self.path)), path)
        try:
            arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
            return table_data(arr[:, 0], arr[:, 1], arr[:, 2])
        except (OSError, ValueError, IndexError) as exc:
            self._fail("table", str(exc))

    def spectral(self):
        """SpectralData from spectral_input (CSV), synthetic profile or initial_data, in that order."""
        if "spectral_input" in self.raw:
            path = self.raw["spectral_input"]
            if not isinstance(path, str):
                self._fail("spectral_input", "must be a path string")
            path = os.path.join(os.path.dirname(os.path.abspath(self.path)), path)
            if not os.path.exists(path):
                self._fail("spectral_input", f"file not found: {path}")
            return SpectralData.from_csv(path)
        if "synthetic" in self.raw:
            params = self.raw["synthetic"]
            if not isinstance(params, dict):
                self._fail("synthetic", "must be an object")
            try:
                return synthetic_spectral(bump_profile(**params), arc_grid(self.arc_points))
            except (TypeError, ValueError) as exc:
                self._fail("synthetic", str(exc))
        return computed_spectral(self.initial_data(), arc_grid(self.arc_points))

    def section(self, name):
        sec = self.raw.get(name, {})
        if not isinstance(sec, dict):
            self._fail(name, "must be an object")
        return sec

    def output(self, command, override, default):
        return override or self.outputs.get(command) or default


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    return RunConfig(raw, text, path)


# ---------------------------------------------------------------- output


def _atomic_write(path, writer):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _fmt(v):
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def write_table(path, header, rows):
    def w(tmp):
        with open(tmp, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")

    _atomic_write(path, w)


# ---------------------------------------------------------------- commands


def cmd_scatter(cfg, out, threads):
    if "initial_data" in cfg.raw:
        spec = computed_spectral(cfg.initial_data(), arc_grid(cfg.arc_points))
    else:
        spec = cfg.spectral()
    path = cfg.output("scatter", out, "spectral.csv")
    _atomic_write(path, spec.to_csv)
    return EXIT_OK


ASYMPTOTE_HEADER = ["x", "tau", "t", "A", "nu", "alpha", "alpha_unwrapped", "u_leading", "route_mismatch", "warning"]


def _tau_rows(spec, tau, xs, tau_max, tol):
    sa = SectorAsymptotics(spec, tau, tau_max)
    rows = []
    for x in xs:
        res = sa.result(x, check_routes=True)
        warn = ""
        if np.isfinite(res.route_mismatch) and res.route_mismatch > tol:
            warn = f"arg d0 routes differ by {res.route_mismatch:.3e}"
        rows.append([res.x, res.tau, res.t, res.A, sa.nu, res.alpha, res.alpha_unwrapped, res.u_leading, res.route_mismatch, warn])
    return rows


def cmd_asymptote(cfg, out, threads):
    xs = cfg.grid("x_grid", lo=2.0)
    taus = cfg.grid("tau_grid")
    tol = float(cfg.tolerances.get("route_mismatch", 1e-6))
    spec = cfg.spectral()
    good = []
    for tau in taus:
        if tau < 0 or tau > cfg.tau_max:
            print(f"skipping tau = {tau:g}: outside the sector [0, {cfg.tau_max:g}]", file=sys.stderr)
        else:
            good.append(float(tau))
    job = lambda tau: _tau_rows(spec, tau, xs, cfg.tau_max, tol)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            blocks = list(pool.map(job, good))
    else:
        blocks = [job(tau) for tau in good]
    rows = [row for block in blocks for row in block]
    write_table(cfg.output("asymptote", out, "asymptotics.csv"), ASYMPTOTE_HEADER, rows)
    return EXIT_OK


def cmd_verify(cfg, out, threads, suite):
    from . import verify

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = verify.run_suite(suite, pool)
    else:
        results = verify.run_suite(suite)
    rep = verify.report(results)
    text = json.dumps(rep, indent=2, sort_keys=True)
    path = out or (cfg.outputs.get("verify") if cfg else None)
    if path:
        def w(tmp):
            with open(tmp, "w") as fh:
                fh.write(text + "\n")

        _atomic_write(path, w)
    else:
        print(text)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_oracle(cfg, out, threads):
    from .pde import BlowupError, PeriodicGrid, evolve, write_snapshots

    sec = cfg.section("oracle")
    t_end = cfg._num("t_end", 1.0, section=sec)
    dt = cfg._num("dt", 1e-2, lo=1e-8, section=sec)
    xi_max = cfg._num("xi_max", 0.8, lo=1e-6, hi=0.9, section=sec)
    length = cfg._num("length", 240.0, lo=1.0, section=sec)
    n = int(cfg._num("n", 2048, lo=16, section=sec))
    times = sec.get("snapshot_times", [])
    if not isinstance(times, list):
        cfg._fail("snapshot_times", "must be a list")
    data = cfg.initial_data()
    path = cfg.output("oracle", out, "oracle.csv")
    try:
        state = evolve(data, t_end, dt, xi_max, PeriodicGrid(length, n), snapshot_times=times)
    except BlowupError as exc:
        print(f"blowup: {exc}", file=sys.stderr)
        write_table(path + ".spectrum.csv", ["xi", "abs_u_hat"], zip(exc.xi, exc.spectrum))
        return EXIT_FAIL
    except ValueError as exc:
        raise ConfigError(f"oracle: {exc}", _line_of(cfg.text, "oracle")) from None
    _atomic_write(path, lambda tmp: write_snapshots(tmp, state))
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser():
    p = argparse.ArgumentParser(prog="boussinesq-rh", description="Long-time asymptotics pipeline and verification suites.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("scatter", "asymptote", "verify", "oracle"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=(name != "verify"))
        sp.add_argument("--out")
        sp.add_argument("--threads", type=int, default=1)
        if name == "verify":
            sp.add_argument("--suite", default="all", choices=SUITE_CHOICES)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        cfg = load_config(args.config) if args.config else None
        if args.command == "verify":
            return cmd_verify(cfg, args.out, args.threads, args.suite)
        cmd = {"scatter": cmd_scatter, "asymptote": cmd_asymptote, "oracle": cmd_oracle}[args.command]
        return cmd(cfg, args.out, args.threads)
    except ConfigError as exc:
        where = f"{args.config}:{exc.line}: " if exc.line else f"{args.config}: "
        print(f"config error: {where}{exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
