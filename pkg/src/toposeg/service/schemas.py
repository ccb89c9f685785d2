"""Request and response models for the HTTP service.

Binary payloads (TLM tensors, PGM masks) travel base64-encoded in JSON
fields named after their container: ``*_tlm`` and ``*_pgm``.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class BarObj(BaseModel):
    birth: float
    death: float
    birth_pixel: list[int]
    death_pixel: list[int] | None
    essential: bool


class HealthResponse(BaseModel):
    status: str
    version: str


class ConstantsResponse(BaseModel):
    version: str
    smooth: float
    lambda_d: float
    lambda_cl: float
    lambda_per: float
    warmup_epochs: int
    skel_iters: int
    tlm_magic: str
    pgm_maxval: int


class BarcodeRequest(BaseModel):
    map_tlm: str = Field(description="base64 TLM likelihood map")
    category: int = 1


class BarcodeResponse(BaseModel):
    bars: list[BarObj]


class MatchRequest(BaseModel):
    pred_tlm: str
    mask_pgm: str
    category: int = 1


class MatchResponse(BaseModel):
    matched: list[list[BarObj]]
    unmatched_pred: list[BarObj]
    unmatched_gt: list[BarObj]


class LossRequest(BaseModel):
    pred_tlm: str
    mask_pgm: str
    lambda_d: float = 0.4
    lambda_cl: float = 0.4
    lambda_per: float = 0.2
    epoch: int | None = None
    warmup: int = 10
    skel_iters: int = 10
    want_grad: bool = False
    check_fd: int = 0


class LossReportObj(BaseModel):
    dice: float
    cl: float
    per: float
    per_matched_by_category: list[float]
    per_unmatched_by_category: list[float]
    total: float
    weights_used: list[float]


class FdObj(BaseModel):
    requested: int
    accepted: int
    rejected: int
    max_rel_err: float
    tolerance: float


class LossResponse(BaseModel):
    report: LossReportObj
    grad_tlm: str | None
    fd: FdObj | None


class MetricsRequest(BaseModel):
    pred_pgm: str
    gt_pgm: str
    categories: int | None = None


class CategoryMetricsObj(BaseModel):
    dsc: float
    iou: float
    assd: float | None
    assd_defined: bool


class MeansObj(BaseModel):
    dsc: float
    iou: float
    assd: float | None
    assd_excluded: int


class MetricsResponse(BaseModel):
    categories: int
    per_category: list[CategoryMetricsObj]
    means: MeansObj


class ErrorResponse(BaseModel):
    error: str
    detail: str
