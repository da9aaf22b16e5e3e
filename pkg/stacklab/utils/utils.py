from __future__ import annotations

import logging
from logging import getLogger as get_logger
from typing import Sequence

import rich
import rich.console
import rich.syntax
import rich.tree
from omegaconf import DictConfig, OmegaConf
from rich.logging import RichHandler

logger = get_logger(__name__)


def setup_logging(verbose: bool = False) -> None:
    """Sends the package's logs to stderr through rich. `verbose` lowers the level to DEBUG."""
    package_logger = logging.getLogger("stacklab")
    package_logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    if not any(isinstance(h, RichHandler) for h in package_logger.handlers):
        handler = RichHandler(
            console=rich.console.Console(stderr=True), show_path=False, markup=False
        )
        package_logger.addHandler(handler)


def print_config(
    config: DictConfig,
    print_order: Sequence[str] = ("experiment", "out"),
    resolve: bool = True,
    log_file: str | None = None,
) -> None:
    """Prints content of DictConfig using Rich library and its tree structure.

    TAKEN FROM https://github.com/ashleve/lightning-hydra-template/blob/6a92395ed6afd573fa44dd3a054a603acbdcac06/src/utils/__init__.py#L56

    Args:
        config (DictConfig): Configuration composed by Hydra.
        print_order (Sequence[str], optional): Determines in what order config components are printed.
        resolve (bool, optional): Whether to resolve reference fields of DictConfig.
        log_file (str, optional): Also write the tree to this file.
    """

    style = "dim"
    tree = rich.tree.Tree("CONFIG", style=style, guide_style=style)

    queue = []

    for field_name in print_order:
        queue.append(field_name) if field_name in config else logger.info(
            f"Field '{field_name}' not found in config"
        )

    for field_name in config:
        if field_name not in queue:
            queue.append(field_name)

    for field_name in queue:
        branch = tree.add(str(field_name), style=style, guide_style=style)

        config_group = config[field_name]
        if isinstance(config_group, DictConfig):
            branch_content = OmegaConf.to_yaml(config_group, resolve=resolve)
        else:
            branch_content = str(config_group)

        branch.add(rich.syntax.Syntax(branch_content, "yaml"))

    rich.print(tree)

    if log_file:
        with open(log_file, "w") as file:
            rich.print(tree, file=file)
