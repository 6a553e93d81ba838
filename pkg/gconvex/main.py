"""FastAPI application entry point"""
import logging
from contextlib import asynccontextmanager
from typing import Any, Dict, Optional

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from gconvex import __version__
from gconvex.commands.registry import command_registry
from gconvex.commands.router import process_command
from gconvex.config import get_settings
from gconvex.exceptions import GConvexError, InputError, NoConstructor, PoleError
from gconvex.schemas import ErrorReport, HealthResponse, Report

settings = get_settings()
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info(f"🚀 Registered commands: {len(command_registry.get_command_specs())}")
    yield
    logger.info("Shutting down...")


# Create FastAPI app
app = FastAPI(
    title="G-Convexity Toolkit",
    description="Decide geodesic convexity of polynomials and check Levi-Civita connections",
    version=__version__,
    lifespan=lifespan,
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.get("/")
async def root():
    """Root endpoint"""
    return {
        "message": "G-Convexity Toolkit API",
        "version": __version__,
        "endpoints": {
            "commands": "/commands",
            "run": "/commands/{name}",
            "schema": "/schema",
            "health": "/health",
        },
    }


@app.get("/health", response_model=HealthResponse)
async def health_check() -> HealthResponse:
    return HealthResponse(
        status="healthy",
        version=__version__,
        registered_commands=len(command_registry.get_command_specs()),
    )


@app.get("/commands")
async def list_commands():
    commands = command_registry.get_command_specs()
    return {"count": len(commands), "commands": commands}


@app.get("/schema")
async def report_schema():
    return {
        "report": Report.model_json_schema(),
        "error": ErrorReport.model_json_schema(),
    }


@app.post("/commands/{name}", response_model=Report)
async def run_command(name: str, arguments: Optional[Dict[str, Any]] = Body(None)) -> Report:
    if not command_registry.has_command(name):
        raise HTTPException(status_code=404, detail=f"Unknown command: {name}")
    try:
        return await process_command(name, arguments or {})
    except GConvexError as e:
        if isinstance(e, InputError):
            status = 400
        elif isinstance(e, (NoConstructor, PoleError)):
            status = 422
        else:
            status = 500
        raise HTTPException(status_code=status, detail=e.to_dict())
    except Exception as e:
        logger.exception(f"❌ {name} failed")
        raise HTTPException(status_code=500, detail=str(e))


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(
        "gconvex.main:app",
        host=settings.api_host,
        port=settings.api_port,
        reload=True,
    )
