"""
Plugging in an external classifier
==================================

Any model can be scored through the adapter contract.  A subprocess adapter
gets the path of a PNG and must print one label; an HTTP adapter POSTs the
PNG bytes and reads the label from the response body.  Here the toy
classifier plays the external model through its command-line entry point.

For a real model, point ``command`` at a script that loads the network once
per call (or use the HTTP mode against a long-lived server) and prints the
top-1 class id.
"""

import sys

from esia.evaluation import ExperimentConfig, SubprocessAdapter, run_experiment
from esia.fixtures import strip_fixture_corpus

adapter = SubprocessAdapter([sys.executable, "-m", "esia.toy_classifier", "{path}"],
                            labels=["red", "green", "blue"], timeout=30)
config = ExperimentConfig(n_levels=(0, 6), base_seed=7, max_in_flight=4)
result = run_experiment(strip_fixture_corpus(), config, adapter)
print(result.report_json())
