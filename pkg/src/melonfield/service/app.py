"""FastAPI service exposing the laboratory as typed endpoints.

Every endpoint is a pure function of its request body, so identical
requests produce identical responses; all randomness is seeded through
the request.  Domain failures map to structured 400/409 errors with a
machine-readable ``code``.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import SCHEMA_VERSION, __version__
from ..errors import (
    DivergenceError,
    DomainError,
    MelonfieldError,
    QuadratureError,
    SignProblemError,
)
from ..model import ModelParams, alpha_lo, g2_lo, log_z_saddle, semicircle_law
from ..saddle import SolverConfig, compare_to_nlo, hermite_roots, nlo_reduced_solve, solve_newton
from ..sd import (
    MONTE_CARLO,
    QUADRATURE,
    ShiftedModel,
    factorization_check,
    sd_residual_exact,
    sd_residual_leading,
)
from ..series import catalan_oracle, fixed_point_check, g2_series, planar_moment_solve, tutte_series
from . import schemas


def _domain_error(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail={"code": "domain_error", "message": str(exc)})


def create_app() -> FastAPI:
    app = FastAPI(
        title="melonfield",
        version=__version__,
        description="Saddle points, series and Schwinger-Dyson checks for the "
        "D-color coupled matrix model",
    )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__, "schema": SCHEMA_VERSION}

    @app.post("/lo", response_model=schemas.LoResponse)
    def lo(request: schemas.LoRequest) -> schemas.LoResponse:
        rows = []
        for d in request.colors:
            for lam in request.couplings:
                try:
                    if lam == 0.0:
                        # documented limits: alpha -> 0, g2 -> 2; log Z diverges
                        rows.append(
                            schemas.LoRow(
                                colors=d, coupling=lam, alpha_im=0.0, log_z=None, g2=2.0
                            )
                        )
                        continue
                    params = ModelParams(colors=d, size=1, coupling=lam)
                    rows.append(
                        schemas.LoRow(
                            colors=d,
                            coupling=lam,
                            alpha_im=alpha_lo(d, lam).imag,
                            log_z=log_z_saddle(params),
                            g2=g2_lo(d, lam),
                        )
                    )
                except DomainError as exc:
                    raise _domain_error(exc)
        return schemas.LoResponse(schema_version=SCHEMA_VERSION, config=request, rows=rows)

    @app.post("/saddle", response_model=schemas.SaddleResponse)
    def saddle(request: schemas.SaddleRequest) -> schemas.SaddleResponse:
        m = request.model
        try:
            params = ModelParams(colors=m.colors, size=m.size, coupling=m.coupling)
            config = SolverConfig(
                tolerance=request.solver.tolerance,
                max_iterations=request.solver.max_iterations,
                damping=request.solver.damping,
                mode=request.solver.mode,
                seed=request.solver.seed,
            )
            solution = solve_newton(params, config)
        except DivergenceError as exc:
            raise HTTPException(
                status_code=409,
                detail={
                    "code": "solver_divergence",
                    "message": str(exc),
                    "residual_norm": exc.residual_norm,
                },
            )
        except DomainError as exc:
            raise _domain_error(exc)

        law = semicircle_law(params.colors, params.coupling)
        if solution.converged:
            comparison = compare_to_nlo(solution, params)
            rescaled = np.asarray(comparison.rescaled).real
            comp_schema = schemas.ComparisonSchema(
                max_deviation=comparison.max_deviation,
                ks_distance=comparison.ks_distance,
            )
        else:
            alpha = alpha_lo(params.colors, params.coupling)
            nu = math.sqrt(float(params.size) ** (params.colors - 2))
            rescaled = (nu * (np.asarray(solution.spectrum.values[0]) - alpha)).real
            comp_schema = schemas.ComparisonSchema(max_deviation=math.nan, ks_distance=None)

        margin = 1.05 * law.half_width
        edges = np.linspace(-margin, margin, request.histogram_bins + 1)
        counts, _ = np.histogram(rescaled, bins=edges)
        widths = np.diff(edges)
        total = max(len(rescaled), 1)
        centers = 0.5 * (edges[:-1] + edges[1:])
        histogram = schemas.HistogramSchema(
            bin_edges=[float(e) for e in edges],
            counts=[int(c) for c in counts],
            empirical_density=[float(v) for v in counts / (total * widths)],
            law_density=[float(v) for v in law.density(centers)],
        )
        ks_text = (
            "n/a" if comp_schema.ks_distance is None else f"{comp_schema.ks_distance:.6f}"
        )
        summary = (
            f"converged={solution.converged} iterations={solution.iterations} "
            f"residual={solution.residual_norm:.3e} ks={ks_text}"
        )
        return schemas.SaddleResponse(
            schema_version=SCHEMA_VERSION,
            config=request,
            params=m,
            spectrum=[
                [schemas.ComplexNumber(re=v.real, im=v.imag) for v in color]
                for color in solution.spectrum.values
            ],
            residual_norm=solution.residual_norm,
            iterations=solution.iterations,
            converged=solution.converged,
            law=schemas.LawSchema(scale=law.scale, half_width=law.half_width),
            comparison=comp_schema,
            histogram=histogram,
            summary=summary,
        )

    @app.post("/series", response_model=schemas.SeriesResponse)
    def series(request: schemas.SeriesRequest) -> schemas.SeriesResponse:
        try:
            per = []
            for d in request.colors:
                g2s = g2_series(d, request.order)
                cat = catalan_oracle(d, request.order)
                per.append(
                    schemas.SeriesPerColors(
                        colors=d,
                        g2_series=schemas.SeriesSchema(**g2s.to_json_dict()),
                        catalan_oracle=schemas.SeriesSchema(**cat.to_json_dict()),
                        equal=g2s.coefficients == cat.coefficients,
                        fixed_point=fixed_point_check(g2s, d) if request.order >= 1 else True,
                    )
                )
            tutte = tutte_series(request.order)
            planar = planar_moment_solve(request.order)
        except (DomainError, MelonfieldError) as exc:
            raise _domain_error(exc)
        return schemas.SeriesResponse(
            schema_version=SCHEMA_VERSION,
            config=request,
            per_colors=per,
            tutte_series=schemas.SeriesSchema(**tutte.to_json_dict()),
            planar_m2=schemas.SeriesSchema(**planar.to_json_dict()),
            tutte_equals_planar=tutte.coefficients == planar.coefficients,
        )

    @app.post("/sd", response_model=schemas.SdResponse)
    def sd(request: schemas.SdRequest) -> schemas.SdResponse:
        m = request.model
        estimator = QUADRATURE if request.estimator == "quadrature" else MONTE_CARLO
        warnings: list[str] = []
        try:
            params = ModelParams(colors=m.colors, size=m.size, coupling=m.coupling)
            model = ShiftedModel(params)
            colors = request.colors if request.colors is not None else list(range(m.colors))
            for c in colors:
                if not 0 <= c < m.colors:
                    raise DomainError(f"color {c} outside 0..{m.colors - 1}")
            common = dict(
                chains=request.mc.chains,
                steps=request.mc.steps,
                seed=request.mc.seed,
                measure_every=request.mc.measure_every,
                threads=request.threads,
            )
            reports = []
            leading = []
            for c in colors:
                for k in request.ks:
                    try:
                        entry = sd_residual_exact(
                            model, c, k, estimator=estimator,
                            tolerance=request.quadrature.tolerance, **common,
                        )
                    except SignProblemError as exc:
                        warnings.append(f"sign problem at color {c}, k={k}: {exc}")
                        continue
                    reports.append(schemas.SdEntrySchema(**entry.to_json_dict()))
                    if request.include_leading:
                        lead = sd_residual_leading(
                            model, c, k, estimator=estimator,
                            tolerance=request.quadrature.tolerance, **common,
                        )
                        leading.append(schemas.SdEntrySchema(**lead.to_json_dict()))
            fact_schema = None
            if request.factorization is not None:
                fact = factorization_check(
                    model, request.factorization.s, request.factorization.t, **common
                )
                fact_schema = schemas.FactorizationSchema(
                    s=fact.s,
                    t=fact.t,
                    connected_re=fact.connected.real,
                    connected_im=fact.connected.imag,
                    normalized_abs=abs(fact.normalized),
                    scale=fact.scale,
                    std_error=fact.std_error,
                    phase_mean=fact.phase_mean,
                )
        except SignProblemError as exc:
            warnings.append(str(exc))
            fact_schema = None
        except (QuadratureError,) as exc:
            raise HTTPException(
                status_code=409,
                detail={"code": "estimator_failure", "message": str(exc)},
            )
        except DomainError as exc:
            raise _domain_error(exc)
        alpha = model.alpha
        return schemas.SdResponse(
            schema_version=SCHEMA_VERSION,
            config=request,
            alpha=schemas.ComplexNumber(re=alpha.real, im=alpha.imag),
            reports=reports,
            leading_reports=leading,
            factorization=fact_schema,
            warnings=warnings,
        )

    @app.post("/hermite", response_model=schemas.HermiteResponse)
    def hermite(request: schemas.HermiteRequest) -> schemas.HermiteResponse:
        try:
            roots = hermite_roots(request.size)
            nlo = None
            if request.model is not None:
                params = ModelParams(
                    colors=request.model.colors,
                    size=request.size,
                    coupling=request.model.coupling,
                )
                law = semicircle_law(params.colors, params.coupling)
                reduced = nlo_reduced_solve(params)
                nlo = schemas.NLOSchema(
                    values=[float(v) for v in reduced.values],
                    law=schemas.LawSchema(scale=law.scale, half_width=law.half_width),
                )
        except DomainError as exc:
            raise _domain_error(exc)
        return schemas.HermiteResponse(
            schema_version=SCHEMA_VERSION,
            config=request,
            size=request.size,
            roots=[float(r) for r in roots],
            nlo=nlo,
        )

    return app


app = create_app()
