"""HTTP service wrapping the core toolkit.

Thin by design: every endpoint decodes its payloads, calls one core
function, and re-encodes. Domain errors map to a 400 with the error class
name so clients can distinguish format from shape problems.
"""

from __future__ import annotations

import base64
import binascii

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ToposegError, FormatError
from ..io import decode_map, decode_mask, encode_tensor
from ..losses import SMOOTH, LossParams, total_loss
from ..matching import betti_match
from ..metrics import evaluate_pair
from ..persistence import superlevel_barcode
from .schemas import (
    BarcodeRequest,
    BarcodeResponse,
    ConstantsResponse,
    HealthResponse,
    LossRequest,
    LossResponse,
    MatchRequest,
    MatchResponse,
    MetricsRequest,
    MetricsResponse,
)

app = FastAPI(title="toposeg", version=__version__)


def _b64(field: str, text: str) -> bytes:
    try:
        return base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise FormatError(f"{field} is not valid base64: {exc}") from exc


@app.exception_handler(ToposegError)
async def _domain_error(_request: Request, exc: ToposegError) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


@app.get("/api/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/api/constants", response_model=ConstantsResponse)
def constants() -> ConstantsResponse:
    defaults = LossParams()
    return ConstantsResponse(
        version=__version__,
        smooth=SMOOTH,
        lambda_d=defaults.lambda_d,
        lambda_cl=defaults.lambda_cl,
        lambda_per=defaults.lambda_per,
        warmup_epochs=defaults.warmup_epochs,
        skel_iters=defaults.skel_iters,
        tlm_magic="TLM1",
        pgm_maxval=255,
    )


@app.post("/api/barcode", response_model=BarcodeResponse)
def barcode(req: BarcodeRequest) -> BarcodeResponse:
    likelihood = decode_map(_b64("map_tlm", req.map_tlm))
    bc = superlevel_barcode(likelihood.channel(req.category))
    return BarcodeResponse(bars=bc.to_obj())


@app.post("/api/match", response_model=MatchResponse)
def match(req: MatchRequest) -> MatchResponse:
    likelihood = decode_map(_b64("pred_tlm", req.pred_tlm))
    mask = decode_mask(_b64("mask_pgm", req.mask_pgm), categories=likelihood.categories)
    m = betti_match(likelihood.channel(req.category), mask, req.category)
    return MatchResponse(**m.to_obj())


@app.post("/api/loss", response_model=LossResponse, response_model_exclude_none=False)
def loss(req: LossRequest) -> LossResponse:
    likelihood = decode_map(_b64("pred_tlm", req.pred_tlm))
    mask = decode_mask(_b64("mask_pgm", req.mask_pgm), categories=likelihood.categories)
    params = LossParams(
        lambda_d=req.lambda_d,
        lambda_cl=req.lambda_cl,
        lambda_per=req.lambda_per,
        epoch=req.epoch,
        warmup_epochs=req.warmup,
        skel_iters=req.skel_iters,
    )
    report, grad = total_loss(likelihood, mask, params)
    grad_b64 = None
    if req.want_grad:
        grad_b64 = base64.b64encode(encode_tensor(grad)).decode("ascii")
    fd = None
    if req.check_fd:
        from ..cli import _sample_fd

        fd = _sample_fd(likelihood, mask, params, req.check_fd)
    return LossResponse(report=report.to_obj(), grad_tlm=grad_b64, fd=fd)


@app.post("/api/metrics", response_model=MetricsResponse)
def metrics(req: MetricsRequest) -> MetricsResponse:
    pred = decode_mask(_b64("pred_pgm", req.pred_pgm), categories=req.categories)
    gt = decode_mask(_b64("gt_pgm", req.gt_pgm), categories=req.categories)
    if req.categories is None:
        top = max(pred.categories, gt.categories)
        pred = type(pred)(pred.data, categories=top)
        gt = type(gt)(gt.data, categories=top)
    cells = evaluate_pair(pred, gt)
    defined = [m.assd for m in cells if m.assd_defined]
    mean_assd = sum(defined) / len(defined) if defined else None
    means = {
        "dsc": sum(m.dsc for m in cells) / len(cells),
        "iou": sum(m.iou for m in cells) / len(cells),
        "assd": mean_assd,
        "assd_excluded": sum(1 for m in cells if not m.assd_defined),
    }
    per_category = [
        {
            "dsc": m.dsc,
            "iou": m.iou,
            "assd": m.assd if m.assd_defined else None,
            "assd_defined": m.assd_defined,
        }
        for m in cells
    ]
    return MetricsResponse(categories=pred.categories, per_category=per_category, means=means)
