"""expdb: a miniature open experiment-database platform.

Datasets are ingested and profiled, machine-readable tasks with
deterministic cross-validation splits are generated, and submitted runs
are evaluated server-side, stored, and made queryable via leaderboards,
per-flow overviews, parameter-impact tables and challenges, all behind
a REST API and a command-line client.
"""

__version__ = "0.1.0"
