"""HTTP face of the simulator: run scenarios, fetch vectors, compute primitives."""

from fastapi import FastAPI, HTTPException, Query

from .. import __version__
from ..core import compute_thr, current_epoch
from ..sim import (
    SCENARIOS,
    ConfigParseError,
    ConfigValidationError,
    InvalidDistributionError,
    InvalidTopologyError,
    SimReport,
    build_sim,
    diff_reports,
    from_data,
    reports_equal,
    run,
)
from ..vectors import generate_vectors
from .models import (
    DiffRequest,
    DiffResponse,
    EpochResponse,
    HealthResponse,
    RunRequest,
    RunResponse,
    ScenarioListResponse,
    ThrResponse,
    VectorsResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="rlnsim", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/scenarios", response_model=ScenarioListResponse)
    def scenarios() -> ScenarioListResponse:
        return ScenarioListResponse(scenarios=sorted(SCENARIOS))

    @app.post("/run", response_model=RunResponse)
    def run_simulation(request: RunRequest) -> RunResponse:
        data = dict(request.config)
        if request.seed is not None:
            data["seed"] = request.seed
        try:
            config = from_data(data)
            sim = build_sim(config)
        except ConfigValidationError as exc:
            raise HTTPException(
                status_code=422, detail={"key": exc.key, "message": exc.message}
            )
        except ConfigParseError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except (InvalidTopologyError, InvalidDistributionError) as exc:
            raise HTTPException(
                status_code=422, detail={"key": "topology", "message": str(exc)}
            )
        until = config.duration if request.until is None else request.until
        report = run(sim, until)
        return RunResponse(
            report=report.data,
            machine_text=report.to_machine_text(),
            human_text=report.to_human_text(),
        )

    @app.get("/vectors", response_model=VectorsResponse)
    def vectors() -> VectorsResponse:
        return VectorsResponse(**generate_vectors())

    @app.get("/epoch", response_model=EpochResponse)
    def epoch(unix_time: float = Query(...), T: int = Query(..., ge=1)) -> EpochResponse:
        return EpochResponse(unix_time=unix_time, T=T, epoch=current_epoch(unix_time, T))

    @app.get("/thr", response_model=ThrResponse)
    def thr(
        network_delay: float = Query(..., ge=0),
        clock_asynchrony: float = Query(..., ge=0),
        T: int = Query(..., ge=1),
    ) -> ThrResponse:
        return ThrResponse(
            network_delay=network_delay,
            clock_asynchrony=clock_asynchrony,
            T=T,
            thr=compute_thr(network_delay, clock_asynchrony, T),
        )

    @app.post("/report-diff", response_model=DiffResponse)
    def report_diff(request: DiffRequest) -> DiffResponse:
        first = SimReport(data=request.first)
        second = SimReport(data=request.second)
        return DiffResponse(
            equal=reports_equal(first, second),
            differences=diff_reports(first, second),
        )

    return app
