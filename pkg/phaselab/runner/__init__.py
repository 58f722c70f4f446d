"""
Run scenario configs end to end.

A run validates its config, creates a run directory, executes the
scenario (tables land on disk as they are produced), exports metrics and
finally writes the manifest. A failed run keeps its partial outputs but
never gets a manifest.
"""
import json
import logging
import time
from multiprocessing import Pool
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from phaselab import __version__
from phaselab.config import RuntimeSettings
from phaselab.errors import EXIT_INVALID, EXIT_OK, ConfigurationError, ErrorReporter, PhaselabError
from phaselab.models.scenarios import load_scenario, scenario_echo
from phaselab.runner.metrics import METRICS_FILENAME, RunMetrics
from phaselab.runner.outputs import RunDirectory, utc_timestamp
from phaselab.runner.scenarios import EXECUTORS, RunContext

logger = logging.getLogger(__name__)

NUMERIC_FAILURES = (PhaselabError, ArithmeticError, ValueError, np.linalg.LinAlgError)


def run_scenario_file(path: Union[str, Path], settings: RuntimeSettings) -> int:
    """Execute one config file; returns the process exit code."""
    reporter = ErrorReporter(debug_mode=settings.log_level == "DEBUG")
    try:
        scenario = load_scenario(path)
    except ConfigurationError as e:
        return reporter.report(e, str(path))

    try:
        run_dir = RunDirectory.create(settings.out_dir, scenario.name)
    except OSError as e:
        logger.error(f"{path}: cannot create run directory under {settings.out_dir}: {e}")
        return EXIT_INVALID

    metrics = RunMetrics()
    started = utc_timestamp()
    clock = time.perf_counter()
    logger.info(json.dumps({"event": "run.start", "scenario": scenario.name, "kind": scenario.kind,
                            "run_dir": str(run_dir.path)}))
    context = RunContext(run_dir, metrics, settings, emit_svg=scenario.output.emit_svg)
    try:
        headline = EXECUTORS[scenario.kind](scenario, context)
    except NUMERIC_FAILURES as e:
        metrics.record_outcome(scenario.kind, "failed", time.perf_counter() - clock)
        metrics.export(run_dir.path)
        logger.error(json.dumps({"event": "run.failed", "scenario": scenario.name,
                                 "run_dir": str(run_dir.path), "error": type(e).__name__}))
        return reporter.report(e, str(path))

    metrics.record_outcome(scenario.kind, "ok", time.perf_counter() - clock)
    metrics.record_headline(headline)
    metrics.export(run_dir.path)
    run_dir.attach(METRICS_FILENAME, "metrics")
    run_dir.finalize(scenario_echo(scenario), __version__, started, headline)
    logger.info(json.dumps({"event": "run.finish", "scenario": scenario.name,
                            "run_dir": str(run_dir.path),
                            "seconds": round(time.perf_counter() - clock, 3)}))
    return EXIT_OK


def _run_one(args) -> int:
    path, settings = args
    return run_scenario_file(path, settings)


def run_many(paths: Sequence[Union[str, Path]], settings: RuntimeSettings, jobs: int = 1) -> int:
    """Run several configs, `jobs` at a time; the worst exit code wins."""
    work = [(str(p), settings) for p in paths]
    if jobs <= 1 or len(work) <= 1:
        codes: List[int] = [_run_one(item) for item in work]
    else:
        with Pool(processes=min(jobs, len(work))) as pool:
            codes = pool.map(_run_one, work)
    return max(codes, default=EXIT_OK)
