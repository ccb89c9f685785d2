/**
 * HTTP client for the toposeg service. Buffers are validated locally
 * (dtype, shape, contiguity) before anything is encoded or sent; domain
 * errors reported by the service surface as ServiceError with the server's
 * error class name.
 */

import { Buffer } from 'node:buffer'

import { BufferView, checkLikelihood, checkMask, checkSameGrid } from './buffers.js'
import { ArgumentError, ServiceError } from './errors.js'
import { encodeMask } from './pgm.js'
import { decodeTensor, encodeTensor } from './tlm.js'

export interface BarObj {
  birth: number
  death: number
  birth_pixel: [number, number]
  death_pixel: [number, number] | null
  essential: boolean
}

export interface MatchResult {
  matched: [BarObj, BarObj][]
  unmatched_pred: BarObj[]
  unmatched_gt: BarObj[]
}

export interface LossReport {
  dice: number
  cl: number
  per: number
  per_matched_by_category: number[]
  per_unmatched_by_category: number[]
  total: number
  weights_used: [number, number, number]
}

export interface FdSummary {
  requested: number
  accepted: number
  rejected: number
  max_rel_err: number
  tolerance: number
}

export interface LossOptions {
  lambdaD?: number
  lambdaCl?: number
  lambdaPer?: number
  /** training epoch for the warmup ramp; omitted means warmup complete */
  epoch?: number
  warmup?: number
  skelIters?: number
  /** verify the gradient at this many random tie-free pixels */
  checkFd?: number
}

export interface LossResult {
  report: LossReport
  /** newly allocated, row-major (categories, height, width) */
  grad: Float32Array
  gradShape: [number, number, number]
  fd: FdSummary | null
}

export interface CategoryMetricsObj {
  dsc: number
  iou: number
  assd: number | null
  assd_defined: boolean
}

export interface MetricsResult {
  categories: number
  per_category: CategoryMetricsObj[]
  means: { dsc: number; iou: number; assd: number | null; assd_excluded: number }
}

export interface ServiceConstants {
  version: string
  smooth: number
  lambda_d: number
  lambda_cl: number
  lambda_per: number
  warmup_epochs: number
  skel_iters: number
  tlm_magic: string
  pgm_maxval: number
}

const b64 = (bytes: Uint8Array) => Buffer.from(bytes).toString('base64')

function checkCount(field: string, value: number, least: number): void {
  if (!Number.isInteger(value) || value < least) {
    throw new ArgumentError(field, `expected an integer >= ${least}, got ${value}`)
  }
}

export class ToposegClient {
  readonly baseUrl: string
  private readonly fetchFn: typeof fetch

  constructor(baseUrl: string, opts: { fetch?: typeof fetch } = {}) {
    this.baseUrl = baseUrl.replace(/\/+$/, '')
    this.fetchFn = opts.fetch ?? fetch
  }

  async health(): Promise<{ status: string; version: string }> {
    return this.request('GET', '/api/health')
  }

  async constants(): Promise<ServiceConstants> {
    return this.request('GET', '/api/constants')
  }

  /** Diagnostic: the 0-dimensional persistence barcode of one category. */
  async barcode(map: BufferView, category = 1): Promise<BarObj[]> {
    checkLikelihood('map', map)
    checkCount('category', category, 1)
    const payload = encodeTensor(map.shape as [number, number, number], map.data)
    const res = await this.request<{ bars: BarObj[] }>('POST', '/api/barcode', {
      map_tlm: b64(payload),
      category,
    })
    return res.bars
  }

  /** Diagnostic: the induced matching between prediction and ground-truth bars. */
  async match(pred: BufferView, mask: BufferView, category = 1): Promise<MatchResult> {
    checkLikelihood('pred', pred)
    checkMask('mask', mask)
    checkSameGrid('mask', mask, pred.shape[1], pred.shape[2])
    checkCount('category', category, 1)
    return this.request('POST', '/api/match', {
      pred_tlm: b64(encodeTensor(pred.shape as [number, number, number], pred.data)),
      mask_pgm: b64(encodeMask(mask.shape as [number, number], mask.data)),
      category,
    })
  }

  /**
   * Full loss report plus the gradient of the total with respect to every
   * likelihood value. Matches the batch CLI bit for bit on equal inputs.
   */
  async lossWithGrad(pred: BufferView, gt: BufferView, options: LossOptions = {}): Promise<LossResult> {
    checkLikelihood('pred', pred)
    checkMask('gt', gt)
    checkSameGrid('gt', gt, pred.shape[1], pred.shape[2])
    const body: Record<string, unknown> = {
      pred_tlm: b64(encodeTensor(pred.shape as [number, number, number], pred.data)),
      mask_pgm: b64(encodeMask(gt.shape as [number, number], gt.data)),
      want_grad: true,
    }
    if (options.lambdaD !== undefined) body.lambda_d = options.lambdaD
    if (options.lambdaCl !== undefined) body.lambda_cl = options.lambdaCl
    if (options.lambdaPer !== undefined) body.lambda_per = options.lambdaPer
    if (options.epoch !== undefined) body.epoch = options.epoch
    if (options.warmup !== undefined) body.warmup = options.warmup
    if (options.skelIters !== undefined) body.skel_iters = options.skelIters
    if (options.checkFd !== undefined) body.check_fd = options.checkFd
    const res = await this.request<{ report: LossReport; grad_tlm: string | null; fd: FdSummary | null }>(
      'POST',
      '/api/loss',
      body,
    )
    if (res.grad_tlm === null) {
      throw new ServiceError(200, 'FormatError', 'service response is missing the gradient tensor')
    }
    const grad = decodeTensor(new Uint8Array(Buffer.from(res.grad_tlm, 'base64')))
    return { report: res.report, grad: grad.data, gradShape: grad.shape, fd: res.fd }
  }

  /** Per-category dsc / iou / assd for one mask pair at a fixed category count. */
  async evaluate(predMask: BufferView, gtMask: BufferView, categories: number): Promise<MetricsResult> {
    checkMask('pred_mask', predMask)
    checkMask('gt_mask', gtMask)
    checkSameGrid('gt_mask', gtMask, predMask.shape[0], predMask.shape[1])
    checkCount('categories', categories, 1)
    return this.request('POST', '/api/metrics', {
      pred_pgm: b64(encodeMask(predMask.shape as [number, number], predMask.data)),
      gt_pgm: b64(encodeMask(gtMask.shape as [number, number], gtMask.data)),
      categories,
    })
  }

  private async request<T>(method: 'GET' | 'POST', path: string, body?: unknown): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    })
    const text = await res.text()
    if (!res.ok) {
      let kind = `HTTP ${res.status}`
      let detail = text
      try {
        const obj = JSON.parse(text)
        if (typeof obj.error === 'string') kind = obj.error
        if (typeof obj.detail === 'string') detail = obj.detail
      } catch {
        // non-JSON error body; keep raw text
      }
      throw new ServiceError(res.status, kind, detail)
    }
    return JSON.parse(text) as T
  }
}
