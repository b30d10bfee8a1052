"""
Result files of runs, campaigns, sweeps and probes.

Per run: <stem>_rounds.csv (round log), <stem>_summary.json, and the plot
data <stem>_cost_curve.csv and <stem>_target_pulls_curve.csv with columns
t, value. Per campaign: campaign_<hash>_summary.json and seed-averaged
curves.

External dependencies: pandas
"""

import json
import logging
import os

import pandas as pd

from src.utils.common import ensure_directory_exists, json_default, write_json_file

logger = logging.getLogger(__name__)

CURVES = {"cost": "cum_cost", "target_pulls": "cum_target_pulls"}


def dumps(data):
    """Canonical JSON text: sorted keys, indent 2, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, default=json_default) + "\n"


def run_stem(result):
    seed = result.seed if isinstance(result.seed, int) else "-".join(str(s) for s in result.seed)
    return f"run_{result.config_hash}_seed{seed}"


def write_run_outputs(result, out_dir):
    """
    Writes the round log, summary and plot data of one run.

    Returns:
        dict: File paths by kind.
    """
    out_dir = ensure_directory_exists(out_dir)
    stem = os.path.join(out_dir, run_stem(result))
    frame = result.log_frame()
    paths = {"rounds": f"{stem}_rounds.csv", "summary": f"{stem}_summary.json"}
    frame.to_csv(paths["rounds"], index=False)
    write_json_file(paths["summary"], result.summary)
    for name, column in CURVES.items():
        paths[name] = f"{stem}_{name}_curve.csv"
        frame[["round", column]].rename(columns={"round": "t", column: "value"}).to_csv(paths[name], index=False)
    return paths


def averaged_curve(results, column):
    """Seed-averaged (t, value) curve of a cumulative ledger column."""
    frames = [r.log_frame()[["round", column]] for r in results]
    stacked = pd.concat(frames, ignore_index=True)
    curve = stacked.groupby("round", sort=True)[column].mean().reset_index()
    return curve.rename(columns={"round": "t", column: "value"})


def write_campaign_outputs(results, out_dir):
    """
    Writes every run's files plus the campaign summary and averaged curves.

    Returns:
        dict: Campaign-level file paths by kind.
    """
    out_dir = ensure_directory_exists(out_dir)
    for result in results:
        write_run_outputs(result, out_dir)
    stem = os.path.join(out_dir, f"campaign_{results[0].config_hash}")
    paths = {"summary": write_json_file(f"{stem}_summary.json", [r.summary for r in results])}
    for name, column in CURVES.items():
        paths[name] = f"{stem}_{name}_curve.csv"
        averaged_curve(results, column).to_csv(paths[name], index=False)
    logger.info(f"Wrote {len(results)} runs to {out_dir}")
    return paths


def write_table(frame, path):
    """Writes a sweep or probe table as CSV."""
    ensure_directory_exists(os.path.dirname(os.path.abspath(path)))
    frame.to_csv(path, index=False)
    return path


def list_run_summaries(out_dir):
    """Campaign summary files in out_dir, newest first."""
    if not os.path.isdir(out_dir):
        return []
    names = [n for n in os.listdir(out_dir) if n.startswith("campaign_") and n.endswith("_summary.json")]
    paths = [os.path.join(out_dir, n) for n in names]
    return sorted(paths, key=os.path.getmtime, reverse=True)
