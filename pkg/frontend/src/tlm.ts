/**
 * TLM tensor codec. Layout: 4-byte magic "TLM1", then three little-endian
 * u32 dims (categories, height, width), then float32 little-endian payload,
 * nothing trailing.
 */

import { FormatError, TruncationError } from './errors.js'

export const TLM_MAGIC = 'TLM1'

const HEADER_BYTES = 16

export interface Tensor {
  shape: [number, number, number]
  data: Float32Array
}

export function encodeTensor(shape: readonly [number, number, number], data: Float32Array): Uint8Array {
  const [c, h, w] = shape
  for (const d of shape) {
    if (!Number.isInteger(d) || d < 1) {
      throw new FormatError(`tensor dimensions must be positive integers, got ${shape.join('x')}`)
    }
  }
  const n = c * h * w
  if (data.length !== n) {
    throw new FormatError(`payload has ${data.length} elements, shape needs ${n}`)
  }
  for (let i = 0; i < n; i++) {
    if (!Number.isFinite(data[i])) throw new FormatError(`non-finite value at flat index ${i}`)
  }
  const out = new Uint8Array(HEADER_BYTES + 4 * n)
  const view = new DataView(out.buffer)
  for (let i = 0; i < 4; i++) out[i] = TLM_MAGIC.charCodeAt(i)
  view.setUint32(4, c, true)
  view.setUint32(8, h, true)
  view.setUint32(12, w, true)
  for (let i = 0; i < n; i++) view.setFloat32(HEADER_BYTES + 4 * i, data[i], true)
  return out
}

export function decodeTensor(bytes: Uint8Array): Tensor {
  if (bytes.length < HEADER_BYTES) {
    throw new TruncationError(`TLM header needs ${HEADER_BYTES} bytes, got ${bytes.length}`)
  }
  let magic = ''
  for (let i = 0; i < 4; i++) magic += String.fromCharCode(bytes[i])
  if (magic !== TLM_MAGIC) throw new FormatError(`bad TLM magic ${JSON.stringify(magic)}`)
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength)
  const c = view.getUint32(4, true)
  const h = view.getUint32(8, true)
  const w = view.getUint32(12, true)
  if (c < 1 || h < 1 || w < 1) {
    throw new FormatError(`TLM dimensions must be >= 1, got ${c}x${h}x${w}`)
  }
  const n = c * h * w
  const want = HEADER_BYTES + 4 * n
  if (bytes.length < want) {
    throw new TruncationError(`TLM payload truncated: expected ${want} bytes, got ${bytes.length}`)
  }
  if (bytes.length > want) {
    throw new FormatError(`${bytes.length - want} trailing bytes after TLM payload`)
  }
  const data = new Float32Array(n)
  for (let i = 0; i < n; i++) {
    const v = view.getFloat32(HEADER_BYTES + 4 * i, true)
    if (!Number.isFinite(v)) throw new FormatError(`non-finite value at flat index ${i}`)
    data[i] = v
  }
  return { shape: [c, h, w], data }
}
