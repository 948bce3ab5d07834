"""CSV and JSON export of effect estimates."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Tuple

import pandas as pd

from .dag import DagEffectEstimate
from .estimators import EffectReport

logger = logging.getLogger(__name__)

EFFECT_COLUMNS = ("unit_id", "D", "Y", "mu0", "mu1", "mu0_c", "mu1_c", "tau_i", "tau_i_c", "K_N", "residual")


def effect_frame(report: EffectReport) -> pd.DataFrame:
    frame = pd.DataFrame(
        {
            "unit_id": report.unit_ids,
            "D": report.D,
            "Y": report.Y,
            "mu0": report.mu0,
            "mu1": report.mu1,
            "mu0_c": report.mu0_c,
            "mu1_c": report.mu1_c,
            "tau_i": report.tau_i,
            "tau_i_c": report.tau_i_c,
            "K_N": report.counts,
            "residual": report.residuals,
        }
    )
    return frame.loc[:, list(EFFECT_COLUMNS)]


def effect_summary(report: EffectReport) -> Dict[str, Any]:
    return {
        "n": report.n,
        "ate": report.ate,
        "ate_c": report.ate_c,
        "ate_c_closed_form": report.ate_c_closed,
        "arms": {"0": int((report.D == 0).sum()), "1": int((report.D == 1).sum())},
        "settings": report.settings,
    }


def dag_effect_summary(estimate: DagEffectEstimate) -> Dict[str, Any]:
    return {
        "k": estimate.k,
        "j": estimate.j,
        "x1": estimate.x1,
        "x0": estimate.x0,
        "tau_hat": estimate.tau_hat,
        "std_error": estimate.std_error,
        "n": int(estimate.contrasts.shape[0]),
        "conditioning": list(estimate.layout),
    }


def _write_json(payload: Dict[str, Any], path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_effect_report(report: EffectReport, out_dir: Path, stem: str = "effects") -> Tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.json"
    effect_frame(report).to_csv(csv_path, index=False)
    _write_json(effect_summary(report), json_path)
    logger.info("Wrote %s and %s", csv_path, json_path)
    return csv_path, json_path


def write_dag_effect(estimate: DagEffectEstimate, out_dir: Path, stem: str = "dag_effect") -> Tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.json"
    pd.DataFrame({"unit_id": estimate.unit_ids, "contrast": estimate.contrasts}).to_csv(csv_path, index=False)
    _write_json(dag_effect_summary(estimate), json_path)
    logger.info("Wrote %s and %s", csv_path, json_path)
    return csv_path, json_path
