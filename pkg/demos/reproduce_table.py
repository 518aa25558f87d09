"""
Reproducing the table of examples
=================================

Runs every example channel through the estimators and prints the CSV that the
``reproduce-table1`` subcommand writes. The ancilla rows for two depolarizing
qubits are the slow part; pass ``--fast`` to skip them.
"""

import sys

from qwcomplexity import OptimizerConfig
from qwcomplexity.bench import reproduce_table1, table_csv

fast = "--fast" in sys.argv
rows = reproduce_table1(OptimizerConfig(restarts=8, local_steps=40), fast=fast)
print(table_csv(rows), end="")
print(f"{sum(r.passed for r in rows)}/{len(rows)} rows pass")
