from __future__ import annotations

import logging
import sys
from dataclasses import dataclass
from logging import getLogger as get_logger
from pathlib import Path
from typing import Dict, Optional

import hydra
from hydra.core.config_store import ConfigStore
from hydra.core.hydra_config import HydraConfig
from omegaconf import DictConfig, OmegaConf
from simple_parsing.helpers import field
from simple_parsing.helpers.serialization.serializable import Serializable

from stacklab.config.experiment import FORMATS, Experiment, emit_report, run_experiment
from stacklab.utils.utils import print_config, setup_logging

logger = get_logger(__name__)


@dataclass
class Options(Serializable):
    """All the options required for a run. This dataclass acts as a schema for the Hydra configs.

    For more info, see https://hydra.cc/docs/tutorials/structured_config/schema/
    """

    # The experiment to run (see `stacklab.config.experiment.Experiment` for the fields).
    # Presets live under `conf/experiment`.
    experiment: Dict = field(default_factory=dict)  # type: ignore

    # Format of the report.
    out: str = "json"

    # Name of the report file written in the run directory. Nothing is written when empty.
    report_file: Optional[str] = "report"

    # Wether to run in debug mode or not.
    debug: bool = False

    verbose: bool = False

    # Name for the experiment.
    name: str = ""


cs = ConfigStore.instance()
cs.store(name="base_options", node=Options)

# Verdict codes of the runs of this process. `hydra.main` drops the return value of `main`.
exit_codes: list[int] = []


@hydra.main(
    config_path="conf",
    config_name="config",
    version_base=None,
)
def main(config: DictConfig | Options) -> int:
    if isinstance(config, DictConfig):
        print_config(config)
    run = ExperimentRun.from_options(config)
    code = run.run()
    exit_codes.append(code)
    return code


@dataclass
class ExperimentRun:
    """Created from the Options that are parsed from Hydra. Can be used to run the experiment."""

    experiment: Experiment
    options: Options

    @classmethod
    def from_options(cls, options: DictConfig | Options) -> ExperimentRun:
        if isinstance(options, DictConfig):
            converted_options = OmegaConf.to_object(options)
            assert isinstance(converted_options, Options)
            options = converted_options
        if options.out not in FORMATS:
            raise ValueError(f"out must be one of {FORMATS}, got {options.out!r}")
        setup_logging(options.verbose)
        if options.debug:
            logging.getLogger("stacklab").setLevel(logging.INFO)
        experiment = Experiment.from_mapping(dict(options.experiment), location="experiment")
        return cls(experiment=experiment, options=options)

    def run(self) -> int:
        """Runs the experiment, writes the report, and returns 0 if its verdict passed, else 1."""
        report = run_experiment(self.experiment, progress=self.options.verbose)
        text = emit_report(report, self.options.out)
        print(text, end="")
        output_dir = _output_dir()
        if self.options.report_file and output_dir is not None:
            path = output_dir / f"{self.options.report_file}.{self.options.out}"
            path.write_text(text)
            logger.info(f"Report saved at {path}")
        passed = getattr(report, "passed", True)
        if not passed:
            logger.warning(f"Verdict failure for experiment {self.options.name or self.experiment.mode}")
        return 0 if passed else 1


def _output_dir() -> Path | None:
    if not HydraConfig.initialized():
        return None
    return Path(HydraConfig.get().runtime.output_dir)


if __name__ == "__main__":
    main()
    # 1 if any run (of a multirun too) had a failing verdict.
    sys.exit(max(exit_codes, default=0))
