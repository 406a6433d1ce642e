"""
Validation utilities for foamkh inputs and configuration.
"""
import os
from typing import Dict, List, Tuple

import yaml
from pydantic import ValidationError

from core.corpus import CorpusEntry
from core.diagram import FaceSelectionError, PdParseError, build_diagram, parse_pd
from core.logger import logger
from core.settings import LOG_LEVELS, OUTPUT_FORMATS, VERIFY_LEVELS


def validate_pd_text(text: str) -> Tuple[bool, List[str]]:
    """
    Validate a PD code (text or JSON form).

    Args:
        text: PD code as given on the command line or in a file

    Returns:
        Tuple of (is_valid, list_of_errors)
    """
    try:
        pd = parse_pd(text)
        build_diagram(pd, pd.outer_face)
    except PdParseError as e:
        return False, list(e.errors)
    except FaceSelectionError as e:
        return False, [str(e)]
    return True, []


def validate_movie_script(text: str, initial=None) -> Tuple[bool, List[str]]:
    """
    Check that every line of a movie script parses; sites are only checked when the movie runs.

    Returns:
        Tuple of (is_valid, list_of_errors)
    """
    from core.moves import MovieError, parse_movie

    errors = []
    try:
        parse_movie(text, initial)
    except MovieError as e:
        errors.append(str(e))
    except PdParseError as e:
        errors.extend(e.errors)
    return len(errors) == 0, errors


def validate_corpus_config(config: Dict) -> Tuple[bool, List[str]]:
    """
    Validate the parsed corpus file.

    Args:
        config: Dictionary with a 'diagrams' list

    Returns:
        Tuple of (is_valid, list_of_errors)
    """
    errors = []

    if not isinstance(config, dict):
        errors.append("Corpus must be a dictionary with a 'diagrams' list")
        return False, errors

    entries = config.get("diagrams")
    if not isinstance(entries, list) or len(entries) == 0:
        errors.append("At least one diagram must be listed under 'diagrams'")
        return False, errors

    seen = set()
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            errors.append(f"Entry {i} must be a dictionary")
            continue
        name = entry.get("name", f"#{i}")
        if name in seen:
            errors.append(f"Diagram '{name}' is listed twice")
        seen.add(name)
        try:
            parsed = CorpusEntry(**entry)
        except ValidationError as e:
            for error in e.errors():
                field = '.'.join(str(loc) for loc in error['loc'])
                prefix = f"Diagram '{name}': {field} - " if field else f"Diagram '{name}': "
                errors.append(prefix + error['msg'])
            continue
        if parsed.pd is not None:
            _, pd_errors = validate_pd_text(parsed.pd)
            errors.extend(f"Diagram '{name}': {msg}" for msg in pd_errors)

    return len(errors) == 0, errors


def validate_corpus_yaml(yaml_path: str) -> Tuple[bool, List[str]]:
    """
    Validate a corpus YAML file.

    Returns:
        Tuple of (is_valid, list_of_errors)
    """
    if not os.path.exists(yaml_path):
        return False, [f"corpus file not found: {yaml_path}"]
    try:
        with open(yaml_path, 'r', encoding='utf-8') as f:
            config = yaml.safe_load(f)
    except yaml.YAMLError as e:
        return False, [f"Invalid YAML syntax: {str(e)}"]
    if config is None:
        return False, ["corpus file is empty"]
    ok, errors = validate_corpus_config(config)
    if not ok:
        logger.warning(f"Corpus {yaml_path} has {len(errors)} problem(s)")
    return ok, errors


def validate_env_file(env_path: str) -> Tuple[bool, List[str]]:
    """
    Validate the FOAMKH_* values of a .env file.

    Args:
        env_path: Path to .env file

    Returns:
        Tuple of (is_valid, list_of_errors)
    """
    errors = []

    if not os.path.exists(env_path):
        errors.append(f".env file not found: {env_path}")
        return False, errors

    from dotenv import dotenv_values
    env_values = dotenv_values(env_path)

    level = env_values.get('FOAMKH_LOG_LEVEL')
    if level and level.upper() not in LOG_LEVELS:
        errors.append(f"Invalid FOAMKH_LOG_LEVEL: {level}. Must be one of {LOG_LEVELS}")

    fmt = env_values.get('FOAMKH_FORMAT')
    if fmt and fmt.lower() not in OUTPUT_FORMATS:
        errors.append(f"Invalid FOAMKH_FORMAT: {fmt}. Must be one of {OUTPUT_FORMATS}")

    verify_level = env_values.get('FOAMKH_LEVEL')
    if verify_level and verify_level.lower() not in VERIFY_LEVELS:
        errors.append(f"Invalid FOAMKH_LEVEL: {verify_level}. Must be one of {VERIFY_LEVELS}")

    threads = env_values.get('FOAMKH_THREADS')
    if threads is not None:
        if not threads.isdigit() or int(threads) < 1:
            errors.append(f"Invalid FOAMKH_THREADS: {threads}. Must be a positive integer")

    return len(errors) == 0, errors
