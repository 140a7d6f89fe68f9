import json
import os
import tempfile
from pathlib import Path

from structlog import get_logger

from errors import CheckpointError, DomainError

logger = get_logger()

FIXTURES_ENV = "CLASSINV_FIXTURES_DIR"


def fixtures_dir() -> Path:
    """The shipped ``fixtures/`` directory, unless CLASSINV_FIXTURES_DIR points elsewhere."""
    override = os.environ.get(FIXTURES_ENV)
    if override:
        return Path(override)
    return Path(__file__).resolve().parent / "fixtures"


def load_json(json_file_path) -> dict:
    json_file_path = Path(json_file_path)
    try:
        with json_file_path.open("r") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise DomainError("JSON file not found", path=str(json_file_path)) from e
    except json.JSONDecodeError as e:
        raise DomainError("JSON file is malformed", path=str(json_file_path), error=str(e)) from e
    logger.debug("Loaded JSON file", path=str(json_file_path))
    return data


def load_fixture(name: str) -> dict:
    """Load ``<fixtures dir>/<name>.json``."""
    return load_json(fixtures_dir() / f"{name}.json")


def write_json_atomic(json_file_path, data: dict) -> None:
    """Write to a temporary file in the same directory, then rename over the target."""
    json_file_path = Path(json_file_path)
    json_file_path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=json_file_path.parent, prefix=f".{json_file_path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            json.dump(data, f, indent=4, sort_keys=True)
        os.replace(tmp, json_file_path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def load_checkpoint(json_file_path, conjecture: int, start: int, stop: int) -> dict:
    """Records of an earlier run of the same campaign, or an empty record set if there is no file."""
    json_file_path = Path(json_file_path)
    if not json_file_path.exists():
        return {"conjecture": conjecture, "range": [start, stop], "records": {}}
    try:
        with json_file_path.open("r") as f:
            data = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CheckpointError("checkpoint is not valid JSON", path=str(json_file_path), error=str(e)) from e
    if not isinstance(data, dict) or not isinstance(data.get("records"), dict):
        raise CheckpointError("checkpoint has no record section", path=str(json_file_path))
    if data.get("conjecture") != conjecture or data.get("range") != [start, stop]:
        raise CheckpointError(
            "checkpoint belongs to a different campaign",
            path=str(json_file_path),
            conjecture=data.get("conjecture"),
            range=data.get("range"),
        )
    for key, record in data["records"].items():
        if not key.isdigit() or not isinstance(record, dict) or "status" not in record:
            raise CheckpointError("checkpoint record is corrupt", path=str(json_file_path), key=key)
    logger.info("Resuming from checkpoint", path=str(json_file_path), done=len(data["records"]))
    return data


def add_or_update_field(json_file_path, section: str, field_name: str, field_values, overwrite: bool = False) -> None:
    """
    Add or update a field in a section of a JSON file, rewriting the file atomically.

    :param json_file_path: Path to the JSON file
    :param section: Section of the JSON where the field should be added or updated (e.g., "records")
    :param field_name: The name of the field to add or update. If empty, updates the section itself.
    :param field_values: A dictionary of values to add or update for the field or section
    :param overwrite: If True, overwrite the entire field or section. If False, update keys that exist in field_values
    """
    json_file_path = Path(json_file_path)
    data = load_json(json_file_path) if json_file_path.exists() else {}

    if section not in data:
        logger.debug("Section not found in JSON, creating it", section=section)
        data[section] = {}

    if field_name == "":
        if overwrite:
            data[section] = field_values
        else:
            data[section].update(field_values)
    elif overwrite or field_name not in data[section]:
        data[section][field_name] = field_values
    else:
        data[section][field_name].update(field_values)

    write_json_atomic(json_file_path, data)
    logger.debug("Updated JSON file", path=str(json_file_path), field_name=field_name or "entire section")
