/**
 * Address-free buffer descriptions handed to the client. A view is a typed
 * array plus a shape; `strides` (in elements) may describe a non-contiguous
 * layout, which is rejected rather than copied. Validation runs before any
 * bytes are encoded or sent, and every error names the offending argument.
 */

import { ArgumentError } from './errors.js'

export interface BufferView {
  data: Float32Array | Uint8Array
  /** (categories, height, width) for likelihoods, (height, width) for masks */
  shape: readonly number[]
  /** element strides; omitted means row-major contiguous */
  strides?: readonly number[]
}

function checkShape(field: string, view: BufferView, rank: number): void {
  const { shape } = view
  if (!Array.isArray(shape) || shape.length !== rank) {
    const got = Array.isArray(shape) ? `rank ${shape.length}` : String(shape)
    throw new ArgumentError(field, `expected a rank-${rank} shape, got ${got}`)
  }
  for (const d of shape) {
    if (!Number.isInteger(d) || d < 1) {
      throw new ArgumentError(field, `shape dimensions must be positive integers, got [${shape.join(', ')}]`)
    }
  }
  const n = shape.reduce((a, b) => a * b, 1)
  if (view.data.length !== n) {
    throw new ArgumentError(field, `buffer holds ${view.data.length} elements, shape [${shape.join(', ')}] needs ${n}`)
  }
  if (view.strides !== undefined) {
    const want = contiguousStrides(shape)
    const got = view.strides
    if (got.length !== rank || want.some((s, i) => got[i] !== s)) {
      throw new ArgumentError(
        field,
        `non-contiguous strides [${got.join(', ')}]; row-major contiguous [${want.join(', ')}] required`,
      )
    }
  }
}

export function contiguousStrides(shape: readonly number[]): number[] {
  const out = new Array<number>(shape.length)
  let step = 1
  for (let i = shape.length - 1; i >= 0; i--) {
    out[i] = step
    step *= shape[i]
  }
  return out
}

/** Require a float32 (L, H, W) likelihood view. */
export function checkLikelihood(field: string, view: BufferView): asserts view is BufferView & { data: Float32Array } {
  if (!(view.data instanceof Float32Array)) {
    throw new ArgumentError(field, `expected a Float32Array, got ${view.data?.constructor?.name ?? typeof view.data}`)
  }
  checkShape(field, view, 3)
}

/** Require a uint8 (H, W) mask view. */
export function checkMask(field: string, view: BufferView): asserts view is BufferView & { data: Uint8Array } {
  if (!(view.data instanceof Uint8Array)) {
    throw new ArgumentError(field, `expected a Uint8Array, got ${view.data?.constructor?.name ?? typeof view.data}`)
  }
  checkShape(field, view, 2)
}

export function checkSameGrid(field: string, view: BufferView, height: number, width: number): void {
  const [h, w] = view.shape.slice(-2)
  if (h !== height || w !== width) {
    throw new ArgumentError(field, `grid ${h}x${w} does not match ${height}x${width}`)
  }
}
