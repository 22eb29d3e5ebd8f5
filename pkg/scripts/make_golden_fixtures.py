"""Regenerate tests/fixtures/normality_golden.json from reference implementations.

Uses scipy.stats.shapiro and statsmodels' normal_ad. Run once; the committed
JSON (samples included) is what the test suite reads, so the suite never
imports either reference.
"""
import json
from pathlib import Path

import numpy as np
from scipy import stats
from statsmodels.stats.diagnostic import normal_ad

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "normality_golden.json"
SEED = 20170106


def main():
    rng = np.random.default_rng(SEED)
    cases = []
    for n in (50, 200):
        for name, draw in (
            ("normal", lambda n: rng.standard_normal(n)),
            ("exponential", lambda n: rng.exponential(1.0, n)),
            ("uniform", lambda n: rng.uniform(0.0, 1.0, n)),
        ):
            cases.append((f"{name}_{n}", draw(n)))
    cases.append(("normal_100", rng.standard_normal(100)))

    fixtures = []
    for name, x in cases:
        x = np.round(x, 12)
        sw = stats.shapiro(x)
        a2, ad_p = normal_ad(x)
        n = len(x)
        fixtures.append({
            "name": name,
            "sample": x.tolist(),
            "shapiro_w": float(sw.statistic),
            "shapiro_p": float(sw.pvalue),
            "ad_a2": float(a2),
            "ad_a2_corrected": float(a2 * (1 + 0.75 / n + 2.25 / n**2)),
            "ad_p": float(ad_p),
        })
    doc = {
        "generator": "scipy.stats.shapiro %s; statsmodels normal_ad" % __import__("scipy").__version__,
        "seed": SEED,
        "fixtures": fixtures,
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(doc, indent=1) + "\n")
    for f in fixtures:
        print(f"{f['name']:<16} W={f['shapiro_w']:.5f} p={f['shapiro_p']:.4g}  A2*={f['ad_a2_corrected']:.4f} p={f['ad_p']:.4g}")


if __name__ == "__main__":
    main()
