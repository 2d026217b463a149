"""Optional plotting helper shared by the demos."""

from pathlib import Path

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:  # demos still print their numbers
    plt = None

HERE = Path(__file__).resolve().parent


def save(fig, name):
    path = HERE / "figures" / name
    path.parent.mkdir(exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    print(f"figure -> {path}")
