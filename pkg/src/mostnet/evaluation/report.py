"""Per-pair quality report over generated and reference sketches."""
import csv
import logging
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from rich.table import Table

from ..data.loader import list_images
from ..data.png import read_png
from ..errors import DatasetError, ReportError
from .ssim import mean_l1, ssim

LOGGER = logging.getLogger(__name__)

PathLike = Union[str, Path]
CSV_HEADER = ("name", "ssim", "l1")


class MetricReport:
    """SSIM and mean L1 of matched image pairs."""

    def __init__(
        self: "MetricReport",
        names: Sequence[str],
        ssim_values: Sequence[float],
        l1_values: Sequence[float],
    ) -> None:
        """Initialize an instance of MetricReport.

        Parameters
        ----------
        names : sequence of str
        ssim_values, l1_values : sequence of float
            One value per name.
        """
        if not len(names) == len(ssim_values) == len(l1_values):
            raise ValueError(
                f"Got {len(names)} names, {len(ssim_values)} SSIM and {len(l1_values)} L1 values"
            )
        self._names = list(names)
        self._ssim = np.array(ssim_values, dtype=float)
        self._l1 = np.array(l1_values, dtype=float)

    @property
    def names(self: "MetricReport") -> list:
        return self._names

    @property
    def ssim(self: "MetricReport") -> np.ndarray:
        return self._ssim

    @property
    def l1(self: "MetricReport") -> np.ndarray:
        return self._l1

    @property
    def count(self: "MetricReport") -> int:
        return len(self._names)

    @property
    def mean_ssim(self: "MetricReport") -> float:
        return float(self._ssim.mean()) if self.count else float("nan")

    @property
    def mean_l1(self: "MetricReport") -> float:
        return float(self._l1.mean()) if self.count else float("nan")

    def report(self: "MetricReport") -> str:
        """Generate a report with dataset means.

        Returns
        -------
        str
            Multiline text report.
        """
        rows = (
            ("Pairs", f"{self.count}"),
            ("Mean SSIM", f"{self.mean_ssim:0.4f}"),
            ("Mean L1", f"{self.mean_l1:0.4f}"),
        )
        return "\n".join((" ".join(columns) for columns in rows))

    def table(self: "MetricReport") -> Table:
        table = Table(title="Sketch quality", show_header=True, header_style="bold magenta")
        table.add_column("name")
        table.add_column("SSIM", justify="right")
        table.add_column("L1", justify="right")

        for name, s, e in zip(self._names, self._ssim, self._l1):
            table.add_row(name, f"{s:0.4f}", f"{e:0.4f}")

        table.add_section()
        table.add_row("mean", f"{self.mean_ssim:0.4f}", f"{self.mean_l1:0.4f}", style="bold")
        return table

    def to_csv(self: "MetricReport", path: PathLike) -> None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, mode="w", encoding="utf-8", newline="") as file:
                writer = csv.writer(file)
                writer.writerow(CSV_HEADER)
                for name, s, e in zip(self._names, self._ssim, self._l1):
                    writer.writerow((name, repr(float(s)), repr(float(e))))
        except OSError as error:
            raise ReportError(f"Cannot write {path}: {error}") from error


def evaluate_pairs(
    names: Sequence[str],
    generated: Sequence[np.ndarray],
    reference: Sequence[np.ndarray],
) -> MetricReport:
    return MetricReport(
        names,
        [ssim(g, r) for g, r in zip(generated, reference)],
        [mean_l1(g, r) for g, r in zip(generated, reference)],
    )


def evaluate_dirs(generated_dir: PathLike, reference_dir: PathLike) -> MetricReport:
    """Compare generated sketches with references of the same file name.

    Parameters
    ----------
    generated_dir, reference_dir : str or Path

    Returns
    -------
    MetricReport
        Over matched names in lexicographic order, unmatched files are logged and excluded.
    """
    generated = list_images(generated_dir)
    reference = list_images(reference_dir)

    for stem in sorted(set(generated) ^ set(reference)):
        path = generated.get(stem, reference.get(stem))
        LOGGER.warning("File %s has no counterpart, excluded from the report", path)

    names = sorted(set(generated) & set(reference))
    if not names:
        raise DatasetError(f"No common file names in {generated_dir} and {reference_dir}")

    return evaluate_pairs(
        names,
        [read_png(generated[name], channels=1) for name in names],
        [read_png(reference[name], channels=1) for name in names],
    )
