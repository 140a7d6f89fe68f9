import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from structlog import get_logger  # noqa: E402

logger = get_logger()

COLUMNS = ("N", "h", "status", "degree_f", "degree_g", "degree_lambda", "is_unit", "used_square", "note")
STATUS_COLORS = {"pass": "k", "exception": "b", "integer": "g", "fail": "r", "inconclusive": "orange", "error": "m"}


class CampaignCollector:
    """Per-N campaign records, written as ``campaign_records.csv`` with a summary figure."""

    def __init__(self, outdir: Path, conjecture: int) -> None:
        self.records: dict[int, dict] = {}
        self.conjecture = conjecture
        outdir = Path(outdir)
        outdir.mkdir(exist_ok=True, parents=True)
        self.outdir = outdir

    def collect(self, record: dict) -> None:
        logger.info("Collecting record", N=record["N"], h=record.get("h"), status=record["status"])
        self.records[int(record["N"])] = record

    @property
    def csv_file(self) -> Path:
        return self.outdir / "campaign_records.csv"

    @property
    def figure(self) -> Path:
        return self.outdir / "campaign.png"

    def summary(self) -> dict:
        counts: dict[str, int] = {}
        for record in self.records.values():
            counts[record["status"]] = counts.get(record["status"], 0) + 1
        return {
            "conjecture": self.conjecture,
            "count": len(self.records),
            "by_status": dict(sorted(counts.items())),
            "flagged": sorted(N for N, r in self.records.items() if r["status"] != "pass"),
            "exceptions": sorted(N for N, r in self.records.items() if r["status"] == "exception"),
        }

    def _save_csv(self) -> None:
        with open(self.csv_file, "w", newline="") as file:
            writer = csv.writer(file)
            writer.writerow(COLUMNS)
            for N in sorted(self.records):
                record = self.records[N]
                writer.writerow(["" if record.get(c) is None else record.get(c) for c in COLUMNS])

    def _plot(self) -> None:
        if not self.records:
            return
        Ns = np.array(sorted(self.records))
        hs = np.array([self.records[N].get("h") or 0 for N in Ns])
        statuses = [self.records[N]["status"] for N in Ns]
        fig, axs = plt.subplots(1, 2, figsize=(15, 5))
        for status, color in STATUS_COLORS.items():
            mask = np.array([s == status for s in statuses])
            if mask.any():
                axs[0].scatter(Ns[mask], hs[mask], s=10, c=color, label=status)
        axs[0].set_xlabel("N")
        axs[0].set_ylabel("h(-N)")
        axs[0].legend()

        if self.conjecture == 2:
            degrees = np.array([self.records[N].get("degree_g") or 0 for N in Ns])
            axs[1].set_ylabel("degree of the minimal polynomial of g")
        else:
            degrees = np.array([self.records[N].get("degree_lambda") or 0 for N in Ns])
            axs[1].set_ylabel("degree of the minimal polynomial of lambda")
        axs[1].plot(hs, hs, "k-", alpha=0.3, label="degree = h")
        axs[1].scatter(hs, degrees, s=10, c="r", label="found")
        axs[1].set_xlabel("h(-N)")
        axs[1].legend()
        fig.savefig(self.figure)
        plt.close(fig)

    def save(self) -> None:
        self._save_csv()
        self._plot()
        logger.info("Saved campaign outputs", csv=str(self.csv_file), figure=str(self.figure))
