"""
Console tables for campaign results.

Usage:
    print(summary_table([r.summary for r in results]))

External dependencies: tabulate
"""

from tabulate import tabulate

SUMMARY_COLUMNS = [
    ("seed", "Seed"),
    ("target_pulls", "Target pulls"),
    ("target_pull_fraction", "Target frac"),
    ("total_cost", "Cost"),
    ("asserted_attackable", "Asserted"),
    ("true_attackable", "Attackable"),
    ("epsilon_star", "eps*"),
    ("bound_violations", "Bound viol."),
]


def format_value(value):
    """
    Renders one cell.

    Args:
        value: Cell value.

    Returns:
        str: Floats with 4 decimals, None as '-'.
    """
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def summary_table(summaries, columns=SUMMARY_COLUMNS):
    """GitHub-style table with one row per run summary."""
    headers = [label for _, label in columns]
    rows = [[format_value(s.get(key)) for key, _ in columns] for s in summaries]
    return tabulate(rows, headers=headers, tablefmt="github")


def frame_table(frame):
    """GitHub-style table of a DataFrame, without its index."""
    rows = [[format_value(v.item() if hasattr(v, "item") else v) for v in row] for row in frame.itertuples(index=False)]
    return tabulate(rows, headers=list(frame.columns), tablefmt="github")
