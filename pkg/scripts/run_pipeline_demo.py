"""Fit, validate and rank on a synthetic dataset through the CLI entry point."""
import sys
import tempfile
from pathlib import Path

from sectorcast.cli import main
from sectorcast.dataset import write_csv
from sectorcast.synthetic import make_dataset


def run(*argv):
    print("$ sectorcast " + " ".join(argv))
    code = main(list(argv))
    if code:
        sys.exit(code)


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="sectorcast_"))
    data_path = out / "synthetic.csv"
    out.mkdir(parents=True, exist_ok=True)
    write_csv(make_dataset(156, seed=1)[0], data_path)

    model = str(out / "model.json")
    run("fit", "--input", str(data_path), "--out", str(out))
    run("validate", "--model", model, "--input", str(data_path), "--out", str(out))
    run("rank", "--model", model, "--input", str(data_path), "--out", str(out))
    run("validate", "--pairs", "published", "--out", str(out / "published"))
    run("rank", "--model", "published", "--method", "coef_share", "--out", str(out / "published"))
    print(f"outputs in {out}")
