import json
import os
from glob import glob
from importlib import metadata
from typing import Any, List, Optional, Union

import numpy as np
import pandas as pd

from .classes import MilpInstance

SEED_ENV = "CUTSEL_SEED"
CSV_FLOAT_FORMAT = "%.17g"
CORPUS_MANIFEST = "manifest.json"


def package_version() -> str:
    try:
        return metadata.version("adaptive_cutsel")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def resolve_seed(seed: Optional[int] = None) -> int:
    """
    Picks the global seed: the explicit argument, else $CUTSEL_SEED, else 0.

    :param seed: explicit seed
    :type seed: int

    :return: the seed
    :rtype: int
    """
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV, "")
    if env.strip() != "":
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{SEED_ENV}={env!r} is not an integer.")
    return 0


def add_file_extension(filename: str, extension: str) -> str:
    """
    Adds file extension to needed file

    :param filename: The path to the file
    :type filename: str
    :param extension: The wanted extension(i.e. .json, .csv, etc)
    :type extension: str

    :return: The filename
    :rtype: str
    """
    if not filename.endswith(extension):
        filename += extension
    return filename


def check_file_exists(filename: Optional[str], logger: Any) -> Union[bool, str]:
    """
    Checks if file exists

    :param filename: The file that will be searched
    :type filename: str
    :param logger: Output logger
    :type logger: logging.Logger

    :return: the error message if the file exists, False otherwise
    :rtype: Union[bool, str]
    """
    if filename is None or filename == "":
        return False
    if os.path.exists(filename):
        err = (
            "The output filename "
            + filename
            + ", corresponds to an "
            + "existing file, interrupting execution to avoid overwrite."
        )
        print(err)
        logger.info(err)
        return err
    return False


def output_paths(prefix: Optional[str], suffixes: dict) -> dict:
    """
    Output file names derived from one prefix, e.g. {"table": ".csv"} gives
    {"table": prefix + ".csv"}. Without a prefix nothing is written.
    """
    if prefix is None or prefix == "":
        return {key: "" for key in suffixes}
    return {key: prefix + suffix for key, suffix in suffixes.items()}


def _ensure_dir(path: str, logger: Any) -> None:
    dirname = os.path.dirname(path)
    if dirname != "" and not os.path.exists(dirname):
        os.makedirs(dirname, exist_ok=True)
        logger.info(f"Created directory {dirname}")


def save_csv(df: pd.DataFrame, output: str, logger: Any) -> str:
    output = add_file_extension(output, ".csv")
    _ensure_dir(output, logger)
    df.to_csv(output, index=False, float_format=CSV_FLOAT_FORMAT, encoding="utf-8")
    logger.info(f"Table saved to {output}")
    return output


def save_json(obj: Any, output: str, logger: Any) -> str:
    output = add_file_extension(output, ".json")
    _ensure_dir(output, logger)
    with open(output, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2)
    logger.info(f"JSON saved to {output}")
    return output


def _bound(v: float) -> Optional[float]:
    return None if not np.isfinite(v) else float(v)


def instance_to_dict(inst: MilpInstance) -> dict:
    return {
        "name": inst.name,
        "n": inst.n,
        "m": inst.m,
        "c": [float(v) for v in inst.c],
        "A": [[i, j, v] for i, j, v in inst.A],
        "b": [float(v) for v in inst.b],
        "lower": [_bound(v) for v in inst.lower],
        "upper": [_bound(v) for v in inst.upper],
        "vtype": list(inst.vtype),
        "ctype": list(inst.ctype),
    }


def instance_from_dict(data: dict) -> MilpInstance:
    """
    Builds an instance from its JSON document; null bounds are infinite.

    :param data: the parsed JSON document
    :type data: dict

    :return: the instance
    :rtype: MilpInstance
    """
    missing = {"name", "n", "m", "c", "A", "b", "lower", "upper", "vtype", "ctype"} - set(data)
    if missing:
        raise ValueError(f"Instance document misses fields {sorted(missing)}.")
    return MilpInstance(
        name=str(data["name"]),
        n=int(data["n"]),
        m=int(data["m"]),
        c=data["c"],
        A=[tuple(t) for t in data["A"]],
        b=data["b"],
        lower=[-np.inf if v is None else v for v in data["lower"]],
        upper=[np.inf if v is None else v for v in data["upper"]],
        vtype=data["vtype"],
        ctype=data["ctype"],
    )


def load_instance(inst: Union[MilpInstance, str]) -> MilpInstance:
    """
    Loader for instances, either already built or a path to a .json file
    """
    if isinstance(inst, MilpInstance):
        return inst
    with open(inst, encoding="utf-8") as f:
        return instance_from_dict(json.load(f))


def save_instance(inst: MilpInstance, output: str, logger: Any) -> str:
    return save_json(instance_to_dict(inst), output, logger)


def list_instances(source: Union[str, List[str]]) -> List[str]:
    """
    Expands a corpus directory into its sorted .json files, skipping the
    corpus manifest; lists of paths are expanded item by item.
    """
    if isinstance(source, str):
        if os.path.isdir(source):
            files = sorted(glob(os.path.join(source, "*.json")))
            return [f for f in files if os.path.basename(f) != CORPUS_MANIFEST]
        return [source]
    paths: List[str] = []
    for item in source:
        paths.extend(list_instances(item))
    return paths


def parse_grid(spec: str) -> List[float]:
    """
    Parses "start:step:end" (end included) or a comma separated list.

    :param spec: the grid specification
    :type spec: str

    :return: sorted distinct values
    :rtype: list
    """
    text = str(spec).strip()
    if text == "":
        raise ValueError("Empty grid specification.")
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, step, end = parts
            if step <= 0 or end < start:
                raise ValueError
            count = int(round((end - start) / step))
            if abs(start + count * step - end) > 1e-9 * max(1.0, abs(end)):
                raise ValueError
            values = [round(start + k * step, 12) for k in range(count + 1)]
        else:
            values = [float(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise ValueError(f"Cannot parse grid specification {spec!r}.")
    if not values:
        raise ValueError(f"Cannot parse grid specification {spec!r}.")
    return sorted(set(values))
