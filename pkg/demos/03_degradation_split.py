"""
Splitting the accuracy drop
===========================

Run the fixture corpus through clean / pixel-loss / color-strip / mitigated
conditions, classify every frame with the toy dominant-channel classifier,
and split the accuracy drop at each level into

    f = acc_clean - acc_loss     (pixel loss)
    g = acc_loss  - acc_strip    (color strips)
"""

from esia.evaluation import TOY_LABELS, ExperimentConfig, FunctionAdapter, dominant_channel, run_experiment
from esia.fixtures import STRIP_FIXTURE_LEVELS, STRIP_FIXTURE_SEED, strip_fixture_corpus

corpus = strip_fixture_corpus()
config = ExperimentConfig(n_levels=STRIP_FIXTURE_LEVELS, base_seed=STRIP_FIXTURE_SEED)
result = run_experiment(corpus, config, FunctionAdapter(dominant_channel, TOY_LABELS))

print(f"{'level':<8}{'clean':>7}{'loss':>7}{'strip':>7}{'mitig.':>8}{'f':>7}{'g':>7}{'share':>7}")
for level, r in result.reports.items():
    share = "-" if r.strip_share is None else f"{float(r.strip_share):.2f}"
    print(f"{level:<8}{float(r.acc_clean):>7.3f}{float(r.acc_loss):>7.3f}{float(r.acc_strip):>7.3f}"
          f"{float(r.acc_mitigated):>8.3f}{float(r.f_value):>7.3f}{float(r.g_value):>7.3f}{share:>7}")
print("pooled strip share:", result.pooled_strip_share)

# The same numbers as JSON, as `esia eval` writes them:
# print(result.report_json())
