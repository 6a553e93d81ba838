"""Command router - validates arguments, runs handlers and wraps results in reports"""
import logging
import time
from typing import Any, Dict

from pydantic import ValidationError

from gconvex.commands import tools  # noqa: F401  (registers handlers)
from gconvex.commands.registry import command_registry
from gconvex.exceptions import InvalidArgument
from gconvex.schemas import Report

logger = logging.getLogger(__name__)


async def process_command(name: str, arguments: Dict[str, Any]) -> Report:
    """
    Command processing pipeline

    Flow:
    1. Look up the command
    2. Validate arguments against its request model
    3. Execute the handler and time it
    4. Wrap the payload in a Report
    """
    # Step 1: Look up the command
    if not command_registry.has_command(name):
        raise InvalidArgument(f"Unknown command: {name}")
    spec = command_registry.get_spec(name)

    # Step 2: Validate arguments
    try:
        request = spec.model.model_validate(arguments)
    except ValidationError as e:
        raise InvalidArgument(f"Invalid arguments for {name}: {e}")
    validated = request.model_dump()
    logger.info(f"⚡ Executing: {name} with args: {validated}")

    # Step 3: Execute
    started = time.perf_counter()
    result = await command_registry.execute(name, validated)
    elapsed = time.perf_counter() - started
    logger.info(f"✅ {name} finished in {elapsed:.3f}s")

    # Step 4: Report
    return Report(
        command=name,
        input={k: v for k, v in validated.items() if v is not None},
        result=result,
        timing={"seconds": elapsed},
        seed=result.get("seed", validated.get("seed")),
    )
